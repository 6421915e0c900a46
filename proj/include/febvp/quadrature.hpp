#pragma once

#include <vector>

namespace febvp {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule, nodes refined by Newton on P_n.
GaussLegendre gauss_legendre(int n);

/// The 64-point rule, computed once.
const GaussLegendre& gauss_legendre_64();

}  // namespace febvp
