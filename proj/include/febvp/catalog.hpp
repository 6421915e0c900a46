#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "febvp/ode.hpp"

namespace febvp {

/// (tau, alpha, beta, a, b) -> R^n, used both for F and for S (with v in the
/// last slot).
using DependenceFn =
    std::function<Vec(double tau, double alpha, double beta, const Vec& a, const Vec& b)>;

/// A named scalar family with its ode and, where the closed form is known,
/// its exact F and S.
struct CatalogEntry {
  std::string name;
  std::map<std::string, double> params;
  SecondOrderOde ode;
  DependenceFn closed_F;
  DependenceFn closed_S;
  /// Interval lengths at or above this bound reach conjugate points.
  std::optional<double> max_interval;
};

/// Known families and their parameter defaults:
///   free_fall {g = -9.8}       x'' = g
///   conic {k = 1, g = 0}        x'' = k^2 x + g
///   linear_basis {}             x'' = -x, closed form through the (cos, sin) basis
///   oscillator {}               alias of linear_basis
///   linear_zero {}              x'' = 0
///
/// Throws InvalidArgument for an unknown family or parameter.
CatalogEntry make_catalog_entry(const std::string& name,
                                const std::map<std::string, double>& params = {});

std::vector<std::string> catalog_names();

}  // namespace febvp
