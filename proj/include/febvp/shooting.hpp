#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "febvp/ode.hpp"

namespace febvp {

/// Two-point position data x(alpha) = a, x(beta) = b with alpha != beta.
struct NeumannConditions {
  double alpha = 0.0;
  double beta = 1.0;
  Vec a;
  Vec b;

  void validate(int dim) const;
};

/// x(alpha) = a together with the mean velocity over the segment from alpha
/// to beta; alpha == beta turns the second condition into x'(alpha) = v.
struct IntegralConditions {
  double alpha = 0.0;
  double beta = 1.0;
  Vec a;
  Vec v;

  void validate(int dim) const;
};

struct ShootingConfig {
  double newton_tol = 1e-10;           ///< on the ∞-norm of x_u(beta) - b
  int max_newton_iters = 50;
  double jacobian_fd_step = 1e-6;      ///< relative: step_j = this * max(1, |u_j|)
  bool damping = true;                 ///< halving line search on the residual norm
  int max_halvings = 20;
  double cond_limit = 1e12;            ///< 1-norm condition number bound
  /// Lower bound on the smallest gain of the Jacobian scaled by 1/(beta - alpha),
  /// which is the identity for free motion. Below it the Jacobian is
  /// indistinguishable from singular at the integrator's accuracy.
  double min_relative_gain = 1e-5;
  IntegratorConfig integrator;

  void validate() const;
};

struct ShootingResult {
  Vec initial_velocity;  ///< the solved x'(alpha)
  Trajectory trajectory;
  int iterations = 0;
  double final_residual = 0.0;
  double condition = 1.0;  ///< 1-norm condition estimate of the final Jacobian
};

/// Separation below which alpha and beta are treated as coincident and the
/// Cauchy form of the conditions is used.
double diag_switch(double alpha) noexcept;

/// Newton shooting on the initial velocity. The default guess is the secant
/// slope (b - a) / (beta - alpha).
///
/// Throws ConjugatePoint when the shooting Jacobian is numerically singular at
/// an iterate (including the converged one), NoConvergence when the iteration
/// budget or line search is exhausted, and propagates integrator errors.
ShootingResult solve_neumann(const SecondOrderOde& ode, const NeumannConditions& cond,
                             const ShootingConfig& cfg = {},
                             const std::optional<Vec>& guess = std::nullopt);

/// Integral-condition solve: reduces to the Neumann problem with
/// b = a + v (beta - alpha) off the diagonal, and to the Cauchy problem
/// x(alpha) = a, x'(alpha) = v on it.
ShootingResult solve_integral(const SecondOrderOde& ode, const IntegralConditions& cond,
                              const ShootingConfig& cfg = {});

/// State at tau on the solution described by `result`, integrating beyond the
/// stored span from the nearer end when needed.
StatePoint state_at(const SecondOrderOde& ode, const ShootingResult& result, double tau,
                    const IntegratorConfig& cfg = {});

/// Position part of state_at.
Vec solution_at(const SecondOrderOde& ode, const ShootingResult& result, double tau,
                const IntegratorConfig& cfg = {});

/// F(tau, alpha, beta, a, b): the value at tau of the solution through both
/// boundary points.
Vec eval_F(const SecondOrderOde& ode, double tau, const NeumannConditions& cond,
           const ShootingConfig& cfg = {});

/// S(tau, alpha, beta, a, v): F(tau, alpha, beta, a, a + v (beta - alpha)) away from
/// the diagonal, the Cauchy solution with x(alpha) = a, x'(alpha) = v on it.
Vec eval_S(const SecondOrderOde& ode, double tau, double alpha, double beta, const Vec& a,
           const Vec& v, const ShootingConfig& cfg = {});

/// Caching evaluator for F and S on one ode. Shooting results are memoised
/// by the exact bit pattern of the boundary conditions; concurrent readers are
/// safe.
class ShootingEvaluator {
 public:
  ShootingEvaluator(SecondOrderOde ode, ShootingConfig cfg = {}, bool cache = true);

  const SecondOrderOde& ode() const noexcept { return ode_; }
  const ShootingConfig& config() const noexcept { return cfg_; }

  std::shared_ptr<const ShootingResult> solve(const NeumannConditions& cond) const;
  Vec F(double tau, const NeumannConditions& cond) const;
  Vec S(double tau, double alpha, double beta, const Vec& a, const Vec& v) const;

  std::size_t cache_size() const;
  void clear_cache();

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& k) const noexcept;
  };

  SecondOrderOde ode_;
  ShootingConfig cfg_;
  bool use_cache_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::vector<std::uint64_t>, std::shared_ptr<const ShootingResult>,
                             KeyHash>
      cache_;
};

}  // namespace febvp
