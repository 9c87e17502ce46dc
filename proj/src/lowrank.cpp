#include "aedc/lowrank.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "aedc/svd.hpp"

namespace aedc {

namespace {

// z = U_r * diag(sigma_r), v = V_r
void truncate(const SvdResult& s, std::size_t r, Matrix& z, Matrix& v) {
  z = Matrix(s.u.rows, r);
  v = Matrix(s.v.rows, r);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < s.u.rows; ++i) z(i, j) = s.u(i, j) * s.sigma[j];
    for (std::size_t i = 0; i < s.v.rows; ++i) v(i, j) = s.v(i, j);
  }
}

double retained_ratio(const Vector& sigma, std::size_t r) {
  double head = 0.0, total = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    total += sigma[j] * sigma[j];
    if (j < r) head += sigma[j] * sigma[j];
  }
  return head / total;
}

}  // namespace

std::size_t select_rank(const Vector& sigma, double tau) {
  if (sigma.empty()) throw std::invalid_argument("select_rank: empty sigma");
  if (!(tau > 0.0) || tau > 1.0)
    throw std::invalid_argument("select_rank: tau must be in (0, 1], got " +
                                std::to_string(tau));
  double total = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (sigma[j] < 0.0) throw std::invalid_argument("select_rank: negative sigma");
    if (j > 0 && sigma[j] > sigma[j - 1])
      throw std::invalid_argument("select_rank: sigma not descending");
    total += sigma[j] * sigma[j];
  }
  if (total == 0.0)
    throw std::invalid_argument("select_rank: all-zero sigma, rank undefined");

  double head = 0.0;
  for (std::size_t r = 1; r <= sigma.size(); ++r) {
    head += sigma[r - 1] * sigma[r - 1];
    if (head / total >= tau) return r;
  }
  return sigma.size();  // guards rounding at tau = 1
}

LstmModel factorize_model(const LstmModel& model, double tau, RankSelection* selection) {
  if (!(tau > 0.0) || tau > 1.0)
    throw std::invalid_argument("factorize_model: tau must be in (0, 1], got " +
                                std::to_string(tau));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (model.layers[l].state != WeightState::kFull)
      throw std::invalid_argument("factorize_model: layer " + std::to_string(l) +
                                  " is not in Full state");
  }
  if (has_quantized_tensors(model))
    throw std::invalid_argument("factorize_model: model carries quantization marks");

  LstmModel out;
  out.hidden = model.hidden;
  out.input = model.input;
  out.classes = model.classes;
  out.dropout = model.dropout;
  out.input_bits = model.input_bits;
  out.head_w = model.head_w;
  out.head_b = model.head_b;
  out.layers.resize(model.layers.size());

  RankSelection sel;
  sel.tau = tau;

  const Matrix* prev_v_r = nullptr;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LstmLayer& src = model.layers[l];
    LstmLayer& dst = out.layers[l];
    dst.state = WeightState::kFactorized;
    dst.bias = src.bias;

    const SvdResult sh = svd(src.w_h.value);
    const std::size_t r = select_rank(sh.sigma, tau);
    truncate(sh, r, dst.z_h.value, dst.v_r.value);
    sel.recurrent_rank.push_back(r);
    sel.recurrent_retained.push_back(retained_ratio(sh.sigma, r));

    if (l == 0) {
      const SvdResult sx = svd(src.w_x.value);
      const std::size_t rx = select_rank(sx.sigma, tau);
      truncate(sx, rx, dst.z_x.value, dst.v_x.value);
      sel.input_rank = rx;
      sel.input_retained = retained_ratio(sx.sigma, rx);
    } else {
      dst.z_x.value = least_squares_project(src.w_x.value, *prev_v_r);
    }
    prev_v_r = &out.layers[l].v_r.value;
  }

  if (selection) *selection = sel;
  return out;
}

}  // namespace aedc
