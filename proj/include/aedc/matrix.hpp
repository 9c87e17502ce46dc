#pragma once

#include <cstddef>
#include <vector>

namespace aedc {

// Dense row-major real matrix. This is the only tensor type in the library;
// plain vectors are std::vector<double>.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // length rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  static Matrix identity(std::size_t n);
};

using Vector = std::vector<double>;

// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// c = a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Accumulating variants used by the training hot path.
void add_matmul(Matrix& c, const Matrix& a, const Matrix& b);
void add_matmul_nt(Matrix& c, const Matrix& a, const Matrix& b);
void add_matmul_tn(Matrix& c, const Matrix& a, const Matrix& b);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix transpose(const Matrix& a);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double dot(const Vector& a, const Vector& b);

Vector matvec(const Matrix& a, const Vector& x);

}  // namespace aedc
