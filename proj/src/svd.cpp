#include "aedc/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "aedc/common.hpp"

namespace aedc {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kRotationTol = 1e-12;

// One-sided Jacobi on the columns of b (rows >= cols). Orthogonalizes the
// columns in place while accumulating the right rotations in v.
void jacobi_sweeps(Matrix& b, Matrix& v, std::size_t orig_rows, std::size_t orig_cols) {
  const std::size_t m = b.rows;
  const std::size_t n = b.cols;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double bp = b(i, p);
          const double bq = b(i, q);
          app += bp * bp;
          aqq += bq * bq;
          apq += bp * bq;
        }
        if (std::fabs(apq) <= kRotationTol * std::sqrt(app * aqq)) continue;
        converged = false;

        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;

        for (std::size_t i = 0; i < m; ++i) {
          const double bp = b(i, p);
          const double bq = b(i, q);
          b(i, p) = cs * bp - sn * bq;
          b(i, q) = sn * bp + cs * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = cs * vp - sn * vq;
          v(i, q) = sn * vp + cs * vq;
        }
      }
    }
    if (converged) return;
  }
  throw NumericError("svd did not converge for " + std::to_string(orig_rows) + "x" +
                     std::to_string(orig_cols) + " matrix after " +
                     std::to_string(kMaxSweeps) + " sweeps");
}

// Fills u columns whose singular value is exactly zero with
// Gram-Schmidt-orthogonalized standard basis vectors (lowest index first).
void complete_zero_columns(Matrix& u, const Vector& sigma) {
  const std::size_t m = u.rows;
  const std::size_t k = u.cols;
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (sigma[j] != 0.0) continue;
    for (; candidate < m; ++candidate) {
      Vector e(m, 0.0);
      e[candidate] = 1.0;
      for (std::size_t jj = 0; jj < k; ++jj) {
        if (jj == j || (sigma[jj] == 0.0 && jj > j)) continue;
        double proj = 0.0;
        for (std::size_t i = 0; i < m; ++i) proj += e[i] * u(i, jj);
        for (std::size_t i = 0; i < m; ++i) e[i] -= proj * u(i, jj);
      }
      double nrm = 0.0;
      for (double x : e) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) u(i, j) = e[i] / nrm;
        ++candidate;
        break;
      }
    }
  }
}

// Core for rows >= cols.
SvdResult svd_tall(const Matrix& a, std::size_t orig_rows, std::size_t orig_cols) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;

  Matrix b = a;
  Matrix v = Matrix::identity(n);
  jacobi_sweeps(b, v, orig_rows, orig_cols);

  Vector sigma(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += b(i, j) * b(i, j);
    sigma[j] = std::sqrt(s);
  }

  // descending order, stable on ties
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult r;
  r.u = Matrix(m, n);
  r.v = Matrix(n, n);
  r.sigma.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    r.sigma[j] = sigma[src];
    if (sigma[src] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) r.u(i, j) = b(i, src) / sigma[src];
    }
    for (std::size_t i = 0; i < n; ++i) r.v(i, j) = v(i, src);
  }
  complete_zero_columns(r.u, r.sigma);
  return r;
}

void apply_sign_convention(SvdResult& r) {
  const std::size_t k = r.sigma.size();
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < r.v.rows; ++i) {
      const double a = std::fabs(r.v(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (r.v(arg, j) < 0.0) {
      for (std::size_t i = 0; i < r.v.rows; ++i) r.v(i, j) = -r.v(i, j);
      for (std::size_t i = 0; i < r.u.rows; ++i) r.u(i, j) = -r.u(i, j);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (a.rows == 0 || a.cols == 0)
    throw std::invalid_argument("svd: empty matrix " + std::to_string(a.rows) + "x" +
                                std::to_string(a.cols));
  for (double x : a.data)
    if (!std::isfinite(x)) throw std::invalid_argument("svd: non-finite entry");

  SvdResult r;
  if (a.rows >= a.cols) {
    r = svd_tall(a, a.rows, a.cols);
  } else {
    SvdResult t = svd_tall(transpose(a), a.rows, a.cols);
    r.u = std::move(t.v);
    r.sigma = std::move(t.sigma);
    r.v = std::move(t.u);
  }
  apply_sign_convention(r);
  return r;
}

Matrix least_squares_project(const Matrix& w_x, const Matrix& v_r) {
  if (w_x.cols != v_r.rows)
    throw std::invalid_argument("least_squares_project: dimension mismatch " +
                                std::to_string(w_x.rows) + "x" + std::to_string(w_x.cols) +
                                " vs " + std::to_string(v_r.rows) + "x" +
                                std::to_string(v_r.cols));
  // precondition: v_r^T v_r = I to 1e-8
  for (std::size_t p = 0; p < v_r.cols; ++p) {
    for (std::size_t q = p; q < v_r.cols; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < v_r.rows; ++i) s += v_r(i, p) * v_r(i, q);
      const double want = (p == q) ? 1.0 : 0.0;
      if (std::fabs(s - want) > 1e-8)
        throw std::invalid_argument(
            "least_squares_project: v_r columns are not orthonormal (entry " +
            std::to_string(p) + "," + std::to_string(q) + " off by " +
            std::to_string(s - want) + ")");
    }
  }
  return matmul(w_x, v_r);
}

}  // namespace aedc
