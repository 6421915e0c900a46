#pragma once

#include <optional>
#include <vector>

#include "febvp/vec.hpp"

namespace febvp::linalg {

/// Dense row-major square matrix, sized for the small Jacobians of shooting.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  explicit Matrix(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

double norm1(const Matrix& m);

/// LU factorisation with partial pivoting. Empty when a pivot is exactly zero
/// or non-finite.
class Lu {
 public:
  static std::optional<Lu> factor(Matrix m);
  Vec solve(Vec b) const;
  Matrix inverse() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace febvp::linalg
