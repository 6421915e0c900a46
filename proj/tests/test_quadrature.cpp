#include <cmath>

#include "doctest.h"

#include "febvp/quadrature.hpp"

using namespace febvp;

TEST_CASE("64-point Gauss-Legendre") {
  const GaussLegendre& gl = gauss_legendre_64();
  REQUIRE(gl.nodes.size() == 64);
  double w = 0.0;
  for (double e : gl.weights) w += e;
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  // exact through degree 127
  for (int p : {0, 2, 10, 64, 126}) {
    double s = 0.0;
    for (std::size_t i = 0; i < 64; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], p);
    CHECK(s == doctest::Approx(2.0 / (p + 1)).epsilon(1e-13));
  }
  double odd = 0.0;
  for (std::size_t i = 0; i < 64; ++i) odd += gl.weights[i] * std::pow(gl.nodes[i], 127);
  CHECK(std::abs(odd) <= 1e-14);
  // nodes are symmetric and sorted
  for (std::size_t i = 0; i < 64; ++i) CHECK(gl.nodes[i] == doctest::Approx(-gl.nodes[63 - i]).epsilon(1e-15));
  for (std::size_t i = 1; i < 64; ++i) CHECK(gl.nodes[i] > gl.nodes[i - 1]);
  // smooth integrand
  double e = 0.0;
  for (std::size_t i = 0; i < 64; ++i) e += gl.weights[i] * std::exp(gl.nodes[i]);
  CHECK(e == doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("small rules") {
  const GaussLegendre two = gauss_legendre(2);
  CHECK(two.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(two.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(gauss_legendre(0));
}
