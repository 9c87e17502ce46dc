#pragma once

#include <cstddef>
#include <vector>

#include "aedc/lstm.hpp"
#include "aedc/matrix.hpp"

namespace aedc {

// Ranks chosen for one model at a given retained-energy fraction tau.
struct RankSelection {
  double tau = 1.0;
  std::vector<std::size_t> recurrent_rank;   // r_l for each layer's w_h
  std::vector<double> recurrent_retained;    // achieved energy ratio
  std::size_t input_rank = 0;                // layer 0's own w_x factorization
  double input_retained = 0.0;
};

// Smallest r with sum_{j<=r} sigma_j^2 / sum_j sigma_j^2 >= tau.
// sigma must be descending and nonnegative; all-zero sigma is an error.
std::size_t select_rank(const Vector& sigma, double tau);

// Factorizes every layer of a fully-trained full-state model:
//   w_h^l = U S V^T  ->  z_h^l = U_r S_r, v_r^l = V_r
//   the consumer of h^l (layer l+1's input matrix) is refit as
//   z_x^{l+1} = least_squares_project(w_x^{l+1}, v_r^l)
//   layer 0's input matrix gets its own truncated SVD at the same tau
// Biases and the classifier head stay full. Quantization marks must be
// absent. Fills `selection` with the chosen ranks when non-null.
LstmModel factorize_model(const LstmModel& model, double tau,
                          RankSelection* selection = nullptr);

}  // namespace aedc
