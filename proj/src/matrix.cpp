#include "aedc/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace aedc {

namespace {

[[noreturn]] void dim_error(const char* op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument(std::string(op) + ": dimension mismatch " +
                              std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                              " vs " + std::to_string(b.rows) + "x" +
                              std::to_string(b.cols));
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) dim_error("matmul", a, b);
  Matrix c(a.rows, b.cols);
  add_matmul(c, a, b);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) dim_error("matmul_nt", a, b);
  Matrix c(a.rows, b.rows);
  add_matmul_nt(c, a, b);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) dim_error("matmul_tn", a, b);
  Matrix c(a.cols, b.cols);
  add_matmul_tn(c, a, b);
  return c;
}

// ikj order keeps the inner loop contiguous in both b and c.
void add_matmul(Matrix& c, const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
    dim_error("add_matmul", a, b);
  const std::size_t n = b.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = ar[k];
      const double* br = b.row(k);
      for (std::size_t j = 0; j < n; ++j) cr[j] += aik * br[j];
    }
  }
}

void add_matmul_nt(Matrix& c, const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
    dim_error("add_matmul_nt", a, b);
  const std::size_t n = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* br = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ar[k] * br[k];
      cr[j] += s;
    }
  }
}

// c += a^T * b; accumulates rank-1 updates row by row so the inner loop
// stays contiguous.
void add_matmul_tn(Matrix& c, const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
    dim_error("add_matmul_tn", a, b);
  const std::size_t n = b.cols;
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* ar = a.row(k);
    const double* br = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = ar[i];
      double* cr = c.row(i);
      for (std::size_t j = 0; j < n; ++j) cr[j] += aki * br[j];
    }
  }
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) dim_error("add", a, b);
  Matrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) dim_error("sub", a, b);
  Matrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (double& v : c.data) v *= s;
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::fabs(v));
  return m;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: length mismatch " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols != x.size())
    throw std::invalid_argument("matvec: dimension mismatch " + std::to_string(a.rows) +
                                "x" + std::to_string(a.cols) + " vs length " +
                                std::to_string(x.size()));
  Vector y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace aedc
