#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "febvp/laws.hpp"
#include "febvp/shooting.hpp"

namespace febvp {

/// Writes Christoffel symbols at `point` into `gamma`, laid out as
/// gamma[(k * n + i) * n + j] = Γ^k_ij.
using ChristoffelFn = std::function<void(std::span<const double> point, std::span<double> gamma)>;

struct Box {
  Vec lo;
  Vec hi;
};

/// A symmetric linear connection in a single chart.
struct Connection {
  int dim = 1;
  ChristoffelFn gamma;
  std::string label;
  /// Region in which sampled endpoints keep shooting inside a convex
  /// neighbourhood.
  Box sampling_box;

  static Connection flat(int dim);
  /// Levi-Civita connection of the Poincaré half-plane metric (dx² + dy²) / y².
  static Connection half_plane();
};

/// max |Γ^k_ij - Γ^k_ji| at `point`.
double symmetry_defect(const Connection& conn, std::span<const double> point);

/// Samples `count` points of the sampling box and throws InvalidArgument when
/// the connection is not symmetric to 1e-12 at one of them.
void check_symmetric(const Connection& conn, int count = 32, std::uint64_t seed = 1);

/// x''^k = -Σ Γ^k_ij(x) x'^i x'^j
SecondOrderOde geodesic_ode(const Connection& conn);

/// G(a, b, ρ): the geodesic through a at 0 and b at 1, evaluated at ρ.
class GeodesicMap {
 public:
  GeodesicMap(Connection conn, ShootingConfig cfg = {});

  const Connection& connection() const noexcept { return conn_; }
  const ShootingConfig& shooting_config() const noexcept { return evaluator_->config(); }
  const ShootingEvaluator& evaluator() const noexcept { return *evaluator_; }

  Vec operator()(const Vec& a, const Vec& b, double rho) const;

 private:
  Connection conn_;
  std::shared_ptr<ShootingEvaluator> evaluator_;
};

inline Vec geodesic_G(const GeodesicMap& gmap, const Vec& a, const Vec& b, double rho) {
  return gmap(a, b, rho);
}

/// Closed-form half-plane geodesic: the arc of the semicircle centred on
/// y = 0 through a and b (a vertical ray when a1 == b1), parametrised by
/// hyperbolic arclength.
Vec half_plane_geodesic(const Vec& a, const Vec& b, double rho);

/// Residuals of G(a,b,0) = a, G(a,b,1) = b, G(a,a,ρ) = a and
/// G(a,b,(1-ρ)ζ+ρη) = G(G(a,b,ζ), G(a,b,η), ρ). a, b are drawn from the
/// connection's sampling box, ζ, η, ρ from spec.tau_range; per-equation maxima
/// go to extras "g2", "g0", "g3". Draw order: a[n], b[n], ζ, η, ρ.
LawReport check_klapka(const GeodesicMap& gmap, const SampleSpec& spec);

/// For G affine in its endpoints, with Q(ρ)(b) = G(0, b, ρ): residuals of
/// Q((ζ+η)/2)(b) = (Q(ζ)(b) + Q(η)(b))/2, G(a,b,1-ρ) = G(b,a,ρ) and
/// Q(1/2)(a) = a/2; extras "jensen", "swap", "half". Draw order as check_klapka.
LawReport jensen_midpoint_check(const GeodesicMap& gmap, const SampleSpec& spec);

}  // namespace febvp
