#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace febvp {

using Vec = std::vector<double>;

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

/// ∞-norm of a - b; NaN propagates so callers can detect it.
inline double inf_dist(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (std::isnan(d)) return d;
    m = std::max(m, d);
  }
  return m;
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

/// a + s * v, elementwise.
inline Vec axpy(const Vec& a, double s, const Vec& v) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * v[i];
  return out;
}

}  // namespace febvp
