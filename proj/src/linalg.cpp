#include "febvp/linalg.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace febvp::linalg {

double norm1(const Matrix& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) col += std::abs(m(i, j));
    best = std::max(best, col);
  }
  return best;
}

std::optional<Lu> Lu::factor(Matrix m) {
  const std::size_t n = m.n;
  Lu out;
  out.perm_.resize(n);
  std::iota(out.perm_.begin(), out.perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    const double pivot = m(p, k);
    if (pivot == 0.0 || !std::isfinite(pivot)) return std::nullopt;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(k, j));
      std::swap(out.perm_[p], out.perm_[k]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      m(i, k) /= pivot;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= m(i, k) * m(k, j);
    }
  }
  out.lu_ = std::move(m);
  return out;
}

Vec Lu::solve(Vec b) const {
  const std::size_t n = lu_.n;
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  return x;
}

Matrix Lu::inverse() const {
  const std::size_t n = lu_.n;
  Matrix inv(n);
  for (std::size_t j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    const Vec col = solve(std::move(e));
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

}  // namespace febvp::linalg
