#include "febvp/laws.hpp"

#include <array>
#include <cmath>
#include <memory>

#include "febvp/error.hpp"
#include "febvp/linalg.hpp"
#include "febvp/quadrature.hpp"

namespace febvp {

namespace detail {

void Aggregator::add(double residual, std::vector<std::pair<std::string, Vec>> args) {
  if (!std::isfinite(residual)) {
    fail();
    return;
  }
  ++report_.samples;
  ++ok_;
  sum_ += residual;
  if (ok_ == 1 || residual > report_.max_residual) {
    report_.max_residual = residual;
    report_.worst_case = std::move(args);
  }
}

LawReport Aggregator::finish() {
  report_.mean_residual = ok_ > 0 ? std::min(sum_ / ok_, report_.max_residual) : 0.0;
  return std::move(report_);
}

std::pair<double, double> draw_pair(SplitMix64& rng, const SampleSpec& spec) {
  const Range r = spec.alpha_beta_range;
  if (spec.interval_length) {
    const double alpha = rng.uniform(r.lo, r.hi);
    return {alpha, alpha + *spec.interval_length};
  }
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double alpha = rng.uniform(r.lo, r.hi);
    const double beta = rng.uniform(r.lo, r.hi);
    if (std::abs(alpha - beta) >= spec.min_separation) return {alpha, beta};
  }
  throw Error(ErrorCode::InvalidArgument,
              "alpha_beta_range too narrow for the requested min_separation");
}

Vec draw_vec(SplitMix64& rng, Range r, int n) {
  Vec out(static_cast<std::size_t>(n));
  for (auto& e : out) e = rng.uniform(r.lo, r.hi);
  return out;
}

}  // namespace detail

using detail::Aggregator;
using detail::draw_pair;
using detail::draw_vec;

namespace {

Vec scalar_arg(double x) { return Vec{x}; }

SampleSpec effective(const SampleSpec& spec, const DependenceEvaluator& F) {
  spec.validate();
  if (!F.eval_f) throw Error(ErrorCode::InvalidArgument, "evaluator has no F");
  SampleSpec out = spec;
  out.min_separation = std::max(spec.min_separation, F.min_separation);
  return out;
}

}  // namespace

void SampleSpec::validate() const {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  if (!(min_separation > 0)) throw Error(ErrorCode::InvalidArgument, "min_separation must be > 0");
  for (const Range& r : {tau_range, ab_range, alpha_beta_range})
    if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi))
      throw Error(ErrorCode::InvalidArgument, "sample ranges must be finite with lo <= hi");
  if (interval_length && !(std::abs(*interval_length) > 0 && std::isfinite(*interval_length)))
    throw Error(ErrorCode::InvalidArgument, "interval_length must be finite and non-zero");
  if (!interval_length && alpha_beta_range.hi - alpha_beta_range.lo < min_separation)
    throw Error(ErrorCode::InvalidArgument,
                "alpha_beta_range is shorter than min_separation");
}

double LawReport::extra(const std::string& key) const {
  for (const auto& [k, v] : extras)
    if (k == key) return v;
  throw Error(ErrorCode::InvalidArgument, "report '" + law + "' has no entry '" + key + "'");
}

nlohmann::ordered_json to_json(const LawReport& report) {
  nlohmann::ordered_json j;
  j["law"] = report.law;
  j["samples"] = report.samples;
  j["max_residual"] = report.max_residual;
  j["mean_residual"] = report.mean_residual;
  nlohmann::ordered_json worst = nlohmann::ordered_json::object();
  for (const auto& [name, value] : report.worst_case) {
    if (value.size() == 1) worst[name] = value[0];
    else worst[name] = value;
  }
  j["worst_case"] = std::move(worst);
  j["failures"] = report.failures;
  for (const auto& [name, value] : report.extras) j[name] = value;
  return j;
}

DependenceEvaluator numeric_evaluator(const SecondOrderOde& ode, const ShootingConfig& cfg) {
  auto ev = std::make_shared<ShootingEvaluator>(ode, cfg);
  DependenceEvaluator out;
  out.dim = ode.dim;
  out.label = "shooting:" + ode.label;
  out.eval_f = [ev](double tau, double alpha, double beta, const Vec& a, const Vec& b) {
    return ev->F(tau, NeumannConditions{alpha, beta, a, b});
  };
  out.eval_s = [ev](double tau, double alpha, double beta, const Vec& a, const Vec& v) {
    return ev->S(tau, alpha, beta, a, v);
  };
  return out;
}

DependenceEvaluator closed_form_evaluator(const CatalogEntry& entry) {
  if (!entry.closed_F)
    throw Error(ErrorCode::InvalidArgument, "family '" + entry.name + "' has no closed form");
  DependenceEvaluator out;
  out.dim = entry.ode.dim;
  out.label = "closed:" + entry.name;
  out.eval_f = entry.closed_F;
  out.eval_s = entry.closed_S;
  return out;
}

LawReport check_composition(const DependenceEvaluator& F, const SampleSpec& spec_in) {
  const SampleSpec spec = effective(spec_in, F);
  SplitMix64 rng(spec.seed);
  Aggregator agg("composition");
  for (int i = 0; i < spec.count; ++i) {
    const double tau = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const auto [alpha, beta] = draw_pair(rng, spec);
    const auto [gamma, delta] = draw_pair(rng, spec);
    const Vec a = draw_vec(rng, spec.ab_range, F.dim);
    const Vec b = draw_vec(rng, spec.ab_range, F.dim);
    try {
      const Vec direct = F.eval_f(tau, alpha, beta, a, b);
      const Vec at_gamma = F.eval_f(gamma, alpha, beta, a, b);
      const Vec at_delta = F.eval_f(delta, alpha, beta, a, b);
      const Vec composed = F.eval_f(tau, gamma, delta, at_gamma, at_delta);
      agg.add(inf_dist(direct, composed),
              {{"tau", scalar_arg(tau)}, {"alpha", scalar_arg(alpha)}, {"beta", scalar_arg(beta)},
               {"gamma", scalar_arg(gamma)}, {"delta", scalar_arg(delta)}, {"a", a}, {"b", b}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  return agg.finish();
}

LawReport check_boundary(const DependenceEvaluator& F, const SampleSpec& spec_in) {
  const SampleSpec spec = effective(spec_in, F);
  SplitMix64 rng(spec.seed);
  Aggregator agg("boundary");
  for (int i = 0; i < spec.count; ++i) {
    const auto [alpha, beta] = draw_pair(rng, spec);
    const Vec a = draw_vec(rng, spec.ab_range, F.dim);
    const Vec b = draw_vec(rng, spec.ab_range, F.dim);
    try {
      const double ra = inf_dist(F.eval_f(alpha, alpha, beta, a, b), a);
      const double rb = inf_dist(F.eval_f(beta, alpha, beta, a, b), b);
      agg.add(std::isnan(ra) || std::isnan(rb) ? NAN : std::max(ra, rb),
              {{"alpha", scalar_arg(alpha)}, {"beta", scalar_arg(beta)}, {"a", a}, {"b", b}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  return agg.finish();
}

LawReport check_extension(const DependenceEvaluator& F, const SampleSpec& spec_in) {
  const SampleSpec spec = effective(spec_in, F);
  if (!F.eval_s) throw Error(ErrorCode::InvalidArgument, "evaluator has no extension S");
  constexpr std::array<double, 3> eps{1e-2, 1e-3, 1e-4};
  constexpr double kFlatFloor = 1e-12;

  SplitMix64 rng(spec.seed);
  Aggregator agg("extension");
  std::array<double, 3> diag{0.0, 0.0, 0.0};
  for (int i = 0; i < spec.count; ++i) {
    const double tau = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const auto [alpha, beta] = draw_pair(rng, spec);
    const Vec a = draw_vec(rng, spec.ab_range, F.dim);
    const Vec v = draw_vec(rng, spec.ab_range, F.dim);
    try {
      const Vec s = F.eval_s(tau, alpha, beta, a, v);
      const Vec f = F.eval_f(tau, alpha, beta, a, axpy(a, beta - alpha, v));
      const Vec on_diag = F.eval_s(tau, alpha, alpha, a, v);
      std::array<double, 3> d{};
      for (std::size_t e = 0; e < eps.size(); ++e)
        d[e] = inf_dist(F.eval_s(tau, alpha, alpha + eps[e], a, v), on_diag);
      const double r = inf_dist(s, f);
      if (std::isfinite(r) && std::isfinite(d[0]) && std::isfinite(d[1]) && std::isfinite(d[2]))
        for (std::size_t e = 0; e < eps.size(); ++e) diag[e] = std::max(diag[e], d[e]);
      agg.add(r, {{"tau", scalar_arg(tau)}, {"alpha", scalar_arg(alpha)},
                  {"beta", scalar_arg(beta)}, {"a", a}, {"v", v}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  LawReport report = agg.finish();
  const bool decreasing = diag[0] > diag[1] && diag[1] > diag[2];
  const bool flat = diag[0] <= kFlatFloor && diag[1] <= kFlatFloor && diag[2] <= kFlatFloor;
  report.extras = {{"diag_1e-2", diag[0]},
                   {"diag_1e-3", diag[1]},
                   {"diag_1e-4", diag[2]},
                   {"diagonal_monotone", (decreasing || flat) ? 1.0 : 0.0}};
  return report;
}

namespace {

/// 64-point Gauss–Legendre mean of x' over [alpha, beta].
Vec mean_velocity(const Trajectory& traj, double alpha, double beta, std::size_t dim) {
  const GaussLegendre& gl = gauss_legendre_64();
  Vec mean(dim, 0.0);
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double gamma = 0.5 * (gl.nodes[q] + 1.0);
    const StatePoint s = traj.eval(alpha + gamma * (beta - alpha));
    for (std::size_t c = 0; c < dim; ++c) mean[c] += 0.5 * gl.weights[q] * s.v[c];
  }
  return mean;
}

/// Shoots on the integral condition itself: finds x'(alpha) = u so that the
/// quadrature mean of x_u' over [alpha, beta] equals v.
Trajectory solve_integral_direct(const SecondOrderOde& ode, const IntegralConditions& cond,
                                 const ShootingConfig& cfg) {
  const std::size_t n = cond.a.size();
  auto residual = [&](const Vec& u, Trajectory* keep) {
    Trajectory t = integrate_ivp(ode, StatePoint{cond.alpha, cond.a, u}, cond.beta, cfg.integrator);
    Vec r = mean_velocity(t, cond.alpha, cond.beta, n);
    for (std::size_t c = 0; c < n; ++c) r[c] -= cond.v[c];
    if (keep) *keep = std::move(t);
    return r;
  };
  Vec u = cond.v;
  Trajectory traj;
  Vec r = residual(u, &traj);
  for (int iter = 0; inf_norm(r) > cfg.newton_tol; ++iter) {
    if (iter >= cfg.max_newton_iters)
      throw Error(ErrorCode::NoConvergence, "integral-condition shooting did not converge",
                  "check_lemma1_equivalence");
    linalg::Matrix jac(n);
    for (std::size_t j = 0; j < n; ++j) {
      Vec up = u;
      up[j] += cfg.jacobian_fd_step * std::max(1.0, std::abs(u[j]));
      const double step = up[j] - u[j];
      const Vec rj = residual(up, nullptr);
      for (std::size_t i = 0; i < n; ++i) jac(i, j) = (rj[i] - r[i]) / step;
    }
    const auto lu = linalg::Lu::factor(jac);
    if (!lu)
      throw Error(ErrorCode::ConjugatePoint, "singular integral-condition Jacobian",
                  "check_lemma1_equivalence");
    Vec rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -r[i];
    const Vec next = axpy(u, 1.0, lu->solve(std::move(rhs)));
    Trajectory next_traj;
    const Vec next_r = residual(next, &next_traj);
    // Below the integrator's accuracy the residual stops decreasing.
    if (!(inf_norm(next_r) < inf_norm(r))) break;
    u = next;
    r = next_r;
    traj = std::move(next_traj);
  }
  return traj;
}

}  // namespace

LawReport check_lemma1_equivalence(const SecondOrderOde& ode, const SampleSpec& spec,
                                   const ShootingConfig& cfg) {
  spec.validate();
  constexpr int kPoints = 20;
  SplitMix64 rng(spec.seed);
  Aggregator agg("lemma1");
  double quad_max = 0.0;
  const auto n = static_cast<std::size_t>(ode.dim);
  for (int i = 0; i < spec.count; ++i) {
    const auto [alpha, beta] = draw_pair(rng, spec);
    const Vec a = draw_vec(rng, spec.ab_range, ode.dim);
    const Vec v = draw_vec(rng, spec.ab_range, ode.dim);
    try {
      const Trajectory integral =
          solve_integral_direct(ode, IntegralConditions{alpha, beta, a, v}, cfg);
      const ShootingResult neumann =
          solve_neumann(ode, NeumannConditions{alpha, beta, a, axpy(a, beta - alpha, v)}, cfg);
      double r = 0.0;
      for (int p = 0; p < kPoints; ++p) {
        const double tau = p == kPoints - 1 ? beta : alpha + (beta - alpha) * p / (kPoints - 1);
        const StatePoint s1 = integral.eval(tau);
        const StatePoint s2 = neumann.trajectory.eval(tau);
        r = std::max(r, inf_dist(s1.x, s2.x));
      }
      quad_max = std::max(quad_max, inf_dist(mean_velocity(neumann.trajectory, alpha, beta, n), v));
      agg.add(r, {{"alpha", scalar_arg(alpha)}, {"beta", scalar_arg(beta)}, {"a", a}, {"v", v}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  LawReport report = agg.finish();
  report.extras = {{"quadrature_max", quad_max}};
  return report;
}

LawReport check_angelesco(const std::function<ScalarFn(SplitMix64&)>& member,
                          const SampleSpec& spec, Range delta_range) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  Aggregator agg("angelesco");
  for (int i = 0; i < spec.count; ++i) {
    const ScalarFn x = member(rng);
    const double tau = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const double delta = rng.uniform(delta_range.lo, delta_range.hi);
    try {
      const double res = angelesco_residual(x, tau, delta);
      const double scale = angelesco_scale(x, tau, delta);
      agg.add(scale > 0 ? std::abs(res) / scale : std::abs(res),
              {{"tau", scalar_arg(tau)}, {"delta", scalar_arg(delta)}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  return agg.finish();
}

std::function<ScalarFn(SplitMix64&)> conic_members(ConicParams p, Range ab_range) {
  return [p, ab_range](SplitMix64& rng) -> ScalarFn {
    const double A = rng.uniform(ab_range.lo, ab_range.hi);
    const double B = rng.uniform(ab_range.lo, ab_range.hi);
    if (p.k == 0.0)
      return [A, B, p](double t) { return A + B * t + 0.5 * p.g * t * t; };
    return [A, B, p](double t) {
      return A * std::cosh(p.k * t) + B * std::sinh(p.k * t) - p.g / (p.k * p.k);
    };
  };
}

}  // namespace febvp
