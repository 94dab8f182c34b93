#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dwke {

/// Dense row-major matrix for the small Newton systems (N <= 64).
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) {
    return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
              static_cast<std::size_t>(j)];
  }
  double operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
              static_cast<std::size_t>(j)];
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

/// Solves A x = b in place by LU with partial pivoting. Throws on a
/// numerically singular pivot.
inline std::vector<double> lu_solve(Matrix a, std::vector<double> b) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n)
    throw std::invalid_argument("lu_solve: dimension mismatch");
  std::vector<int> piv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) piv[static_cast<std::size_t>(i)] = i;
  for (int col = 0; col < n; ++col) {
    int p = col;
    double best = std::abs(a(col, col));
    for (int i = col + 1; i < n; ++i) {
      const double v = std::abs(a(i, col));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best < 1e-300) throw std::runtime_error("lu_solve: singular matrix");
    if (p != col) {
      for (int j = 0; j < n; ++j) std::swap(a(p, j), a(col, j));
      std::swap(b[static_cast<std::size_t>(p)], b[static_cast<std::size_t>(col)]);
    }
    for (int i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      a(i, col) = 0.0;
      for (int j = col + 1; j < n; ++j) a(i, j) -= f * a(col, j);
      b[static_cast<std::size_t>(i)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) acc -= a(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = acc / a(i, i);
  }
  return x;
}

}  // namespace dwke
