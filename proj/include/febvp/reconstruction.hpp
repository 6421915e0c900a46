#pragma once

#include "febvp/catalog.hpp"
#include "febvp/laws.hpp"
#include "febvp/shooting.hpp"

namespace febvp {

struct ReconstructionConfig {
  double fd_step = 1e-3;
  /// Combine steps h and h/2 as (4 D(h/2) - D(h)) / 3.
  bool richardson = true;
  /// Accuracy of a numerically computed S; when positive the step is raised
  /// to max(fd_step, solver_tol^(1/4)) to balance truncation against noise.
  double solver_tol = 0.0;

  double effective_step() const;
  void validate() const;
};

/// Tolerance of |S(τ,τ,τ,x,v) - x|∞ before MidpointViolation is raised.
inline constexpr double kMidpointTolerance = 1e-6;

/// Right-hand side recovered from an extension S as the second τ-derivative of
/// S(·, τ, τ, x, v) at τ, by central differences.
///
/// Throws MidpointViolation when S(τ,τ,τ,x,v) differs from x, and
/// EvaluationFailure when S fails at a stencil point.
Vec reconstruct_f(const DependenceFn& S, double tau, const Vec& x, const Vec& v,
                  const ReconstructionConfig& cfg = {});

/// |reconstruct_f(S) - f|∞ over (τ, x, v) drawn from tau_range and ab_range
/// (draw order τ, x[n], v[n]).
LawReport check_reconstruction(const DependenceFn& S, const SecondOrderOde& truth,
                               const ReconstructionConfig& cfg, const SampleSpec& spec);

/// check_reconstruction with S computed by shooting on `ode` itself; the
/// noise-aware step uses max(newton_tol, integrator rel_tol) as solver_tol.
LawReport roundtrip_check(const SecondOrderOde& ode, const ReconstructionConfig& cfg,
                          const ShootingConfig& shooting_cfg, const SampleSpec& spec);

}  // namespace febvp
