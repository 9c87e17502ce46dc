#pragma once

#include "aedc/matrix.hpp"

namespace aedc {

// Thin SVD a = u * diag(sigma) * v^T with k = min(rows, cols).
//   u: rows x k, orthonormal columns
//   sigma: length k, descending, nonnegative
//   v: cols x k, orthonormal columns
struct SvdResult {
  Matrix u;
  Vector sigma;
  Matrix v;
};

// One-sided Jacobi SVD. Deterministic: fixed sweep order, singular values
// sorted descending, and each (u, v) column pair signed so that the
// largest-magnitude component of the v column is positive (first index wins
// ties). Zero singular directions get identity-derived basis columns.
// Throws NumericError if rotations have not converged after 60 sweeps.
SvdResult svd(const Matrix& a);

// Closed-form minimizer of ||z * v_r^T - w_x||_F for v_r with orthonormal
// columns: z = w_x * v_r. Validates the orthonormality precondition to 1e-8.
Matrix least_squares_project(const Matrix& w_x, const Matrix& v_r);

}  // namespace aedc
