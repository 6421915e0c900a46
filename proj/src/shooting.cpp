#include "febvp/shooting.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <sstream>

#include "febvp/error.hpp"
#include "febvp/linalg.hpp"

namespace febvp {
namespace {

void check_vec(const Vec& v, int dim, const char* what) {
  if (v.size() != static_cast<std::size_t>(dim)) {
    std::ostringstream os;
    os << what << " has " << v.size() << " components, expected " << dim;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  if (!all_finite(v)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be finite");
}

struct Residual {
  Trajectory traj;
  Vec r;
  double norm = 0.0;
};

Residual shoot(const SecondOrderOde& ode, const NeumannConditions& cond, const Vec& u,
               const IntegratorConfig& icfg) {
  Residual out;
  out.traj = integrate_ivp(ode, StatePoint{cond.alpha, cond.a, u}, cond.beta, icfg);
  const StatePoint end = out.traj.end();
  out.r.resize(cond.b.size());
  for (std::size_t i = 0; i < out.r.size(); ++i) out.r[i] = end.x[i] - cond.b[i];
  out.norm = all_finite(out.r) ? inf_norm(out.r) : INFINITY;
  return out;
}

/// Forward-difference Jacobian of u -> x_u(beta). Each perturbed solution is
/// integrated adaptively and the nominal one replayed on its knots, so both
/// ends of a difference see the same discrete map. The perturbed knots also
/// resolve the perturbation when the nominal solution is trivial (x = 0 takes
/// one huge step).
linalg::Matrix shooting_jacobian(const SecondOrderOde& ode, const NeumannConditions& cond,
                                 const Vec& u, double fd_step, const IntegratorConfig& icfg) {
  const std::size_t n = u.size();
  linalg::Matrix jac(n);
  for (std::size_t j = 0; j < n; ++j) {
    Vec up = u;
    const double du = fd_step * std::max(1.0, std::abs(u[j]));
    up[j] += du;
    const double step = up[j] - u[j];
    const Trajectory perturbed = integrate_ivp(ode, StatePoint{cond.alpha, cond.a, up}, cond.beta, icfg);
    const Vec y = perturbed.end().x;
    const Vec y0 = propagate_on_knots(ode, cond.alpha, cond.a, u, perturbed.knots());
    for (std::size_t i = 0; i < n; ++i) jac(i, j) = (y[i] - y0[i]) / step;
  }
  return jac;
}

struct Conditioning {
  std::optional<linalg::Lu> lu;
  double condition = INFINITY;
};

Conditioning assess(const linalg::Matrix& jac, double length, const ShootingConfig& cfg,
                    const NeumannConditions& cond) {
  Conditioning out;
  out.lu = linalg::Lu::factor(jac);
  bool singular = !out.lu.has_value();
  double gain = 0.0;
  if (!singular) {
    const double inv_norm = linalg::norm1(out.lu->inverse());
    out.condition = linalg::norm1(jac) * inv_norm;
    // Gain of jac / length is 1 / ||(jac / length)^-1|| = 1 / (|length| ||jac^-1||).
    gain = 1.0 / (std::abs(length) * inv_norm);
    singular = !std::isfinite(out.condition) || out.condition > cfg.cond_limit ||
               gain < cfg.min_relative_gain;
  }
  if (singular) {
    std::ostringstream os;
    os << "shooting Jacobian is numerically singular on [" << cond.alpha << ", " << cond.beta
       << "] (condition " << out.condition << ", relative gain " << gain
       << "): boundary data at or near a conjugate point";
    throw Error(ErrorCode::ConjugatePoint, os.str(), "solve_neumann");
  }
  return out;
}

}  // namespace

void NeumannConditions::validate(int dim) const {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw Error(ErrorCode::InvalidArgument, "alpha and beta must be finite");
  if (!(std::abs(alpha - beta) > 0.0))
    throw Error(ErrorCode::InvalidArgument, "Neumann conditions need alpha != beta");
  check_vec(a, dim, "a");
  check_vec(b, dim, "b");
}

void IntegralConditions::validate(int dim) const {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw Error(ErrorCode::InvalidArgument, "alpha and beta must be finite");
  check_vec(a, dim, "a");
  check_vec(v, dim, "v");
}

void ShootingConfig::validate() const {
  if (!(newton_tol > 0)) throw Error(ErrorCode::InvalidArgument, "newton_tol must be positive");
  if (max_newton_iters < 1)
    throw Error(ErrorCode::InvalidArgument, "max_newton_iters must be >= 1");
  if (!(jacobian_fd_step > 0))
    throw Error(ErrorCode::InvalidArgument, "jacobian_fd_step must be positive");
  integrator.validate();
}

double diag_switch(double alpha) noexcept { return 1e-8 * std::max(1.0, std::abs(alpha)); }

ShootingResult solve_neumann(const SecondOrderOde& ode, const NeumannConditions& cond,
                             const ShootingConfig& cfg, const std::optional<Vec>& guess) {
  cfg.validate();
  cond.validate(ode.dim);
  const double length = cond.beta - cond.alpha;

  Vec u;
  if (guess) {
    check_vec(*guess, ode.dim, "guess");
    u = *guess;
  } else {
    u.resize(cond.a.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = (cond.b[i] - cond.a[i]) / length;
  }

  Residual cur = shoot(ode, cond, u, cfg.integrator);
  for (int iter = 0;; ++iter) {
    const linalg::Matrix jac = shooting_jacobian(ode, cond, u, cfg.jacobian_fd_step, cfg.integrator);
    const Conditioning c = assess(jac, length, cfg, cond);
    if (cur.norm <= cfg.newton_tol) {
      return ShootingResult{std::move(u), std::move(cur.traj), iter, cur.norm, c.condition};
    }
    if (iter >= cfg.max_newton_iters) {
      std::ostringstream os;
      os << "Newton shooting did not converge in " << cfg.max_newton_iters
         << " iterations (residual " << cur.norm << ")";
      throw Error(ErrorCode::NoConvergence, os.str(), "solve_neumann");
    }

    Vec rhs(cur.r.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -cur.r[i];
    const Vec du = c.lu->solve(std::move(rhs));

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= (cfg.damping ? cfg.max_halvings : 0); ++h, lambda *= 0.5) {
      Vec trial = axpy(u, lambda, du);
      try {
        Residual next = shoot(ode, cond, trial, cfg.integrator);
        if (!cfg.damping || next.norm < cur.norm) {
          u = std::move(trial);
          cur = std::move(next);
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (!cfg.damping || e.code() == ErrorCode::InvalidArgument) throw;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search failed to reduce residual " << cur.norm << " after "
         << cfg.max_halvings << " halvings";
      throw Error(ErrorCode::NoConvergence, os.str(), "solve_neumann");
    }
  }
}

ShootingResult solve_integral(const SecondOrderOde& ode, const IntegralConditions& cond,
                              const ShootingConfig& cfg) {
  cfg.validate();
  cond.validate(ode.dim);
  const double length = cond.beta - cond.alpha;
  if (std::abs(length) <= diag_switch(cond.alpha)) {
    ShootingResult out;
    out.initial_velocity = cond.v;
    out.trajectory = integrate_ivp(ode, StatePoint{cond.alpha, cond.a, cond.v}, cond.alpha,
                                   cfg.integrator);
    return out;
  }
  return solve_neumann(ode, NeumannConditions{cond.alpha, cond.beta, cond.a, axpy(cond.a, length, cond.v)},
                       cfg);
}

StatePoint state_at(const SecondOrderOde& ode, const ShootingResult& result, double tau,
                    const IntegratorConfig& cfg) {
  const Trajectory& traj = result.trajectory;
  if (traj.contains(tau)) return traj.eval(tau);
  // Continue from whichever stored end lies on tau's side.
  const bool past_end = (traj.tau_end() >= traj.tau_start()) ? tau > traj.tau_end()
                                                              : tau < traj.tau_end();
  const StatePoint from = past_end ? traj.end() : traj.start();
  return integrate_ivp(ode, from, tau, cfg).end();
}

Vec solution_at(const SecondOrderOde& ode, const ShootingResult& result, double tau,
                const IntegratorConfig& cfg) {
  return state_at(ode, result, tau, cfg).x;
}

Vec eval_F(const SecondOrderOde& ode, double tau, const NeumannConditions& cond,
           const ShootingConfig& cfg) {
  if (!std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "tau must be finite");
  return solution_at(ode, solve_neumann(ode, cond, cfg), tau, cfg.integrator);
}

Vec eval_S(const SecondOrderOde& ode, double tau, double alpha, double beta, const Vec& a,
           const Vec& v, const ShootingConfig& cfg) {
  if (!std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "tau must be finite");
  return solution_at(ode, solve_integral(ode, IntegralConditions{alpha, beta, a, v}, cfg), tau,
                     cfg.integrator);
}

ShootingEvaluator::ShootingEvaluator(SecondOrderOde ode, ShootingConfig cfg, bool cache)
    : ode_(std::move(ode)), cfg_(std::move(cfg)), use_cache_(cache) {
  cfg_.validate();
}

std::size_t ShootingEvaluator::KeyHash::operator()(
    const std::vector<std::uint64_t>& k) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t w : k) {
    h ^= w;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

std::shared_ptr<const ShootingResult> ShootingEvaluator::solve(
    const NeumannConditions& cond) const {
  if (!use_cache_) return std::make_shared<const ShootingResult>(solve_neumann(ode_, cond, cfg_));

  std::vector<std::uint64_t> key;
  key.reserve(2 + cond.a.size() + cond.b.size());
  key.push_back(std::bit_cast<std::uint64_t>(cond.alpha));
  key.push_back(std::bit_cast<std::uint64_t>(cond.beta));
  for (double e : cond.a) key.push_back(std::bit_cast<std::uint64_t>(e));
  for (double e : cond.b) key.push_back(std::bit_cast<std::uint64_t>(e));
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto result = std::make_shared<const ShootingResult>(solve_neumann(ode_, cond, cfg_));
  std::unique_lock lock(mutex_);
  return cache_.try_emplace(std::move(key), std::move(result)).first->second;
}

Vec ShootingEvaluator::F(double tau, const NeumannConditions& cond) const {
  if (!std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "tau must be finite");
  return solution_at(ode_, *solve(cond), tau, cfg_.integrator);
}

Vec ShootingEvaluator::S(double tau, double alpha, double beta, const Vec& a, const Vec& v) const {
  if (!std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "tau must be finite");
  const double length = beta - alpha;
  if (std::abs(length) <= diag_switch(alpha)) {
    IntegralConditions{alpha, beta, a, v}.validate(ode_.dim);
    return integrate_ivp(ode_, StatePoint{alpha, a, v}, tau, cfg_.integrator).end().x;
  }
  return F(tau, NeumannConditions{alpha, beta, a, axpy(a, length, v)});
}

std::size_t ShootingEvaluator::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

void ShootingEvaluator::clear_cache() {
  std::unique_lock lock(mutex_);
  cache_.clear();
}

}  // namespace febvp
