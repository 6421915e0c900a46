#include "febvp/catalog.hpp"

#include <cmath>
#include <numbers>

#include "febvp/closed_forms.hpp"
#include "febvp/error.hpp"

namespace febvp {
namespace {

std::map<std::string, double> merge(const std::string& family, std::map<std::string, double> defaults,
                                    const std::map<std::string, double>& given) {
  for (const auto& [name, value] : given) {
    auto it = defaults.find(name);
    if (it == defaults.end())
      throw Error(ErrorCode::InvalidArgument,
                  "family '" + family + "' has no parameter '" + name + "'", family);
    if (!std::isfinite(value))
      throw Error(ErrorCode::InvalidArgument, "parameter '" + name + "' must be finite", family);
    it->second = value;
  }
  return defaults;
}

DependenceFn scalar(std::function<double(double, double, double, double, double)> fn) {
  return [fn = std::move(fn)](double tau, double alpha, double beta, const Vec& a, const Vec& b) {
    return Vec{fn(tau, alpha, beta, a.at(0), b.at(0))};
  };
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"free_fall", "conic", "linear_basis", "oscillator", "linear_zero"};
}

CatalogEntry make_catalog_entry(const std::string& name,
                                const std::map<std::string, double>& params) {
  CatalogEntry e;
  e.name = name;
  e.ode.dim = 1;
  e.ode.label = name;

  if (name == "free_fall") {
    e.params = merge(name, {{"g", -9.8}}, params);
    const double g = e.params.at("g");
    e.ode.rhs = [g](double, std::span<const double>, std::span<const double>,
                    std::span<double> out) { out[0] = g; };
    e.closed_F = scalar([g](double t, double al, double be, double a, double b) {
      return free_fall_F(g, t, al, be, a, b);
    });
    e.closed_S = scalar([g](double t, double al, double be, double a, double v) {
      return free_fall_S(g, t, al, be, a, v);
    });
  } else if (name == "conic") {
    e.params = merge(name, {{"g", 0.0}, {"k", 1.0}}, params);
    const ConicParams p{e.params.at("k"), e.params.at("g")};
    // pow(k, 2) keeps this bit-identical to the parsed text "k^2*x + g".
    e.ode.rhs = [p](double, std::span<const double> x, std::span<const double>,
                    std::span<double> out) { out[0] = std::pow(p.k, 2.0) * x[0] + p.g; };
    e.closed_F = scalar([p](double t, double al, double be, double a, double b) {
      return conic_F(p, t, al, be, a, b);
    });
    e.closed_S = scalar([p](double t, double al, double be, double a, double v) {
      return conic_S(p, t, al, be, a, v);
    });
  } else if (name == "linear_basis" || name == "oscillator") {
    e.params = merge(name, {}, params);
    e.ode.rhs = [](double, std::span<const double> x, std::span<const double>,
                   std::span<double> out) { out[0] = -x[0]; };
    e.closed_F = scalar([basis = LinearBasis::cos_sin()](double t, double al, double be, double a,
                                                         double b) {
      return linear_F(basis, t, al, be, a, b);
    });
    e.closed_S = scalar(cos_sin_S);
    e.max_interval = std::numbers::pi;
  } else if (name == "linear_zero") {
    e.params = merge(name, {}, params);
    e.ode.rhs = [](double, std::span<const double>, std::span<const double>,
                   std::span<double> out) { out[0] = 0.0; };
    e.closed_F = scalar([](double t, double al, double be, double a, double b) {
      return free_fall_F(0.0, t, al, be, a, b);
    });
    e.closed_S = scalar([](double t, double al, double be, double a, double v) {
      return free_fall_S(0.0, t, al, be, a, v);
    });
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown catalog family '" + name + "'", name);
  }
  return e;
}

}  // namespace febvp
