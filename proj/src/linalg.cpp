#include "htlab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace htlab {

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

LinearSolveResult solve_dense(const Matrix& A, const std::vector<double>& b,
                              double rel_tol) {
  const std::size_t m = A.rows;
  const std::size_t n = A.cols;
  Matrix w = A;
  std::vector<double> rhs = b;

  double max_entry = 0.0;
  for (double v : w.a) max_entry = std::max(max_entry, std::abs(v));
  double max_rhs = 0.0;
  for (double v : rhs) max_rhs = std::max(max_rhs, std::abs(v));
  const double tol = rel_tol * std::max(max_entry, 1e-30);
  const double tol_rhs = rel_tol * std::max({max_entry, max_rhs, 1e-30});

  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t best = row;
    for (std::size_t r = row + 1; r < m; ++r) {
      if (std::abs(w.at(r, col)) > std::abs(w.at(best, col))) best = r;
    }
    if (std::abs(w.at(best, col)) <= tol) continue;
    if (best != row) {
      for (std::size_t c = 0; c < n; ++c) std::swap(w.at(best, c), w.at(row, c));
      std::swap(rhs[best], rhs[row]);
    }
    const double inv = 1.0 / w.at(row, col);
    for (std::size_t c = col; c < n; ++c) w.at(row, c) *= inv;
    rhs[row] *= inv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == row) continue;
      const double f = w.at(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) w.at(r, c) -= f * w.at(row, c);
      rhs[r] -= f * rhs[row];
    }
    pivot_col.push_back(col);
    ++row;
  }

  LinearSolveResult out;
  out.rank = pivot_col.size();
  out.consistent = true;
  for (std::size_t r = out.rank; r < m; ++r) {
    if (std::abs(rhs[r]) > tol_rhs) {
      out.consistent = false;
      return out;
    }
  }

  // Particular solution with free variables set to zero.
  std::vector<double> part(n, 0.0);
  for (std::size_t r = 0; r < out.rank; ++r) part[pivot_col[r]] = rhs[r];

  // Null basis: one vector per free column.
  std::vector<char> is_pivot(n, 0);
  for (std::size_t c : pivot_col) is_pivot[c] = 1;
  std::vector<std::vector<double>> basis;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<double> v(n, 0.0);
    v[f] = 1.0;
    for (std::size_t r = 0; r < out.rank; ++r) v[pivot_col[r]] = -w.at(r, f);
    basis.push_back(std::move(v));
  }

  // Modified Gram-Schmidt; degenerate directions are dropped.
  std::vector<std::vector<double>> ortho;
  for (auto& v : basis) {
    for (const auto& q : ortho) {
      const double c = dot(v, q);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
    const double nv = norm2(v);
    if (nv > 1e-14) {
      for (double& x : v) x /= nv;
      ortho.push_back(std::move(v));
    }
  }

  // Least-norm: remove the null-space component of the particular solution.
  for (const auto& q : ortho) {
    const double c = dot(part, q);
    for (std::size_t i = 0; i < part.size(); ++i) part[i] -= c * q[i];
  }

  out.particular = std::move(part);
  out.null_basis = std::move(ortho);
  return out;
}

}  // namespace htlab
