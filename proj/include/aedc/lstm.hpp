#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aedc/matrix.hpp"

namespace aedc {

// A model tensor: full-precision master values plus a quantization mark.
// n_bits == 0 means full precision; 1..16 means the forward pass sees
// fake_quant(value, n_bits) and serialization freezes packed codes.
struct TensorParam {
  Matrix value;
  int n_bits = 0;
};

enum class WeightState { kFull, kFactorized };

// Gate blocks are stacked [input, forget, cell-candidate, output] along the
// 4h axis of every weight matrix and bias.
struct LstmLayer {
  WeightState state = WeightState::kFull;

  // kFull
  TensorParam w_x;  // 4h x d_in
  TensorParam w_h;  // 4h x h

  // kFactorized: w_h ~ z_h * v_r^T, input path ~ z_x * basis^T where the
  // basis is v_x for layer 0 (its own truncated SVD) and the previous
  // layer's v_r for layers >= 1 (shared right singular vectors).
  TensorParam z_h;  // 4h x r
  TensorParam v_r;  // h x r
  TensorParam z_x;  // 4h x r_in
  TensorParam v_x;  // d x r_in, empty on layers >= 1

  TensorParam bias;  // 1 x 4h, never factorized or quantized
};

struct LstmModel {
  std::size_t hidden = 256;
  std::size_t input = 64;
  std::size_t classes = 3;
  double dropout = 0.2;
  int input_bits = 0;  // fake-quant features per clip when > 0
  std::vector<LstmLayer> layers;
  TensorParam head_w;  // C x h
  TensorParam head_b;  // 1 x C
};

// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init, forget-gate bias 1.
LstmModel make_lstm(std::size_t layer_count, std::size_t hidden, std::size_t input,
                    std::size_t classes, double dropout, std::uint64_t seed);

// ---- parameter enumeration -------------------------------------------------

struct ParamRef {
  std::string name;
  TensorParam* param;
};

// Canonical, fixed parameter order; gradient and optimizer buffers align
// with this list index-for-index.
std::vector<ParamRef> trainable_params(LstmModel& m);
std::vector<std::string> param_names(const LstmModel& m);

struct ParamCount {
  std::vector<std::pair<std::string, std::size_t>> per_tensor;
  std::size_t total = 0;
};

// Exact element counts; independent of quantization marks.
ParamCount param_count(const LstmModel& m);

// ---- forward / backward ----------------------------------------------------

struct ForwardMode {
  bool train = false;
  std::vector<std::uint64_t> seeds;  // one dropout stream per sequence

  static ForwardMode infer() { return {}; }
  static ForwardMode train_mode(std::uint64_t seed) { return {true, {seed}}; }
  static ForwardMode train_mode(std::vector<std::uint64_t> s) { return {true, std::move(s)}; }
};

// Per-timestep activations cached for BPTT, one entry per sequence batch
// row (layout B x dim).
struct StepCache {
  Matrix x;                 // B x d_in, input as consumed
  Matrix px, ph;            // factor projections (factorized layers only)
  Matrix i, f, g, o;        // gate activations
  Matrix c, tanh_c, h;      // cell and hidden state
  Matrix drop;              // dropout multipliers on this layer's output
};

struct LayerTrace {
  std::vector<StepCache> steps;
};

struct ForwardTrace {
  bool train = false;
  std::size_t batch = 0;
  std::size_t steps = 0;
  // model fingerprint, so backward can reject a mismatched trace
  std::size_t hidden = 0, input = 0, classes = 0;
  std::vector<WeightState> layer_states;
  std::vector<std::size_t> layer_ranks;     // r of v_r (0 when full)
  std::vector<std::size_t> layer_in_ranks;  // r_in of the input basis (0 when full)
  Matrix probs;  // B x C
  std::vector<LayerTrace> layers;
};

// Gradient tensors aligned with trainable_params order.
struct Gradients {
  std::vector<Matrix> tensors;
};

// Batched forward over equal-length sequences. probs: B x C, each entry
// clamped to [1e-12, 1 - 1e-12]. Dropout applies to layer outputs feeding
// the next layer (train mode only); quantized tensors go through the
// fake-quant path; input_bits > 0 fake-quants each clip's features.
Matrix forward_batch(const LstmModel& m, const std::vector<const Matrix*>& features,
                     const ForwardMode& mode, ForwardTrace* trace = nullptr);

// Single-sequence forward: probs for the clip from the final timestep's
// top-layer hidden state.
Vector forward(const LstmModel& m, const Matrix& features, const ForwardMode& mode,
               ForwardTrace* trace = nullptr);

// Exact BPTT gradients of a scalar loss given d(loss)/d(probs). For
// quantized tensors the gradient w.r.t. the fake-quantized surrogate is
// routed to the master values (straight-through estimator).
Gradients backward_batch(const LstmModel& m, const ForwardTrace& trace,
                         const Matrix& grad_probs);

Gradients backward(const LstmModel& m, const ForwardTrace& trace,
                   const Vector& grad_probs);

// True if any tensor carries a quantization mark (input_bits counts).
bool has_quantized_tensors(const LstmModel& m);

}  // namespace aedc
