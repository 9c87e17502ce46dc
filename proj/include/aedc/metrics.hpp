#pragma once

#include <string>
#include <vector>

#include "aedc/lstm.hpp"
#include "aedc/matrix.hpp"

namespace aedc {

struct DetPoint {
  double threshold;
  double fpr;
  double fnr;
};

// Threshold-ascending sweep: fpr non-increasing, fnr non-decreasing, with
// the (1,0) and (0,1) endpoints from the -inf/+inf sentinels.
struct DetCurve {
  std::vector<DetPoint> points;
};

// Thresholds at midpoints between distinct sorted scores plus +-inf
// sentinels; a clip is predicted positive when score > threshold.
// Needs at least one positive and one negative label.
DetCurve det_curve(const Vector& scores, const std::vector<int>& labels);

// Trapezoidal area under fnr-vs-fpr, in percent. Lower is better.
double auc_percent(const DetCurve& curve);

// fpr at the fpr = fnr crossing, linearly interpolated, in percent.
double eer_percent(const DetCurve& curve);

// ---- size accounting ---------------------------------------------------

struct TensorSize {
  std::string name;
  std::size_t elements;
  int bits;           // marked width, 32 when full precision
  std::size_t bytes;  // ceil(elements * bits / 8)
};

struct SizeReport {
  std::vector<TensorSize> tensors;
  std::size_t total_elements = 0;
  std::size_t weight_payload_bytes = 0;  // weight matrices at their marked bits
  std::size_t full_side_bytes = 0;       // biases + head (always 32-bit)
  std::size_t total_bytes = 0;
  std::size_t alpha_beta_overhead_bytes = 0;  // 2 float64 per quantized tensor
  double total_mb = 0.0;                      // total_bytes / 2^20
  double weight_payload_mb = 0.0;
};

SizeReport size_report(const LstmModel& m);

// ---- whole-model evaluation ---------------------------------------------

struct EvalReport {
  std::vector<double> auc;  // per class, percent
  std::vector<double> eer;
  double avg_auc = 0.0;
  double avg_eer = 0.0;
  std::size_t param_elements = 0;
  double params_mb = 0.0;
  std::vector<DetCurve> curves;
};

// Scores every clip (batched inference) and computes per-class DET metrics.
// labels[i] is clip i's multi-hot vector.
EvalReport evaluate(const LstmModel& m, const std::vector<const Matrix*>& features,
                    const std::vector<std::vector<int>>& labels,
                    std::size_t batch_size = 64);

// Clip scores only (probs per class), batched inference.
Matrix score_clips(const LstmModel& m, const std::vector<const Matrix*>& features,
                   std::size_t batch_size = 64);

}  // namespace aedc
