#pragma once

#include <cstddef>
#include <vector>

namespace htlab {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct LinearSolveResult {
  bool consistent = false;
  std::size_t rank = 0;
  std::vector<double> particular;               // least-norm solution
  std::vector<std::vector<double>> null_basis;  // orthonormal
};

// Gaussian elimination with partial pivoting; rank decisions at a relative
// tolerance against the largest input entry. The particular solution is
// projected onto the row space so it is the minimum-norm solution.
LinearSolveResult solve_dense(const Matrix& A, const std::vector<double>& b,
                              double rel_tol = 1e-9);

double dot(const std::vector<double>& x, const std::vector<double>& y);
double norm2(const std::vector<double>& x);

}  // namespace htlab
