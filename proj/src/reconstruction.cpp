#include "febvp/reconstruction.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "febvp/error.hpp"

namespace febvp {

double ReconstructionConfig::effective_step() const {
  return solver_tol > 0 ? std::max(fd_step, std::pow(solver_tol, 0.25)) : fd_step;
}

void ReconstructionConfig::validate() const {
  if (!(fd_step > 0)) throw Error(ErrorCode::InvalidArgument, "fd_step must be positive");
  if (solver_tol < 0) throw Error(ErrorCode::InvalidArgument, "solver_tol must be >= 0");
}

Vec reconstruct_f(const DependenceFn& S, double tau, const Vec& x, const Vec& v,
                  const ReconstructionConfig& cfg) {
  cfg.validate();
  auto at = [&](double t) {
    try {
      return S(t, tau, tau, x, v);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "S failed at stencil point tau=" << t << ": " << e.what();
      throw Error(ErrorCode::EvaluationFailure, os.str(), std::string(to_string(e.code())));
    }
  };

  const Vec mid = at(tau);
  const double defect = inf_dist(mid, x);
  if (!(defect <= kMidpointTolerance)) {
    std::ostringstream os;
    os << "S(tau, tau, tau, x, v) differs from x by " << defect;
    throw Error(ErrorCode::MidpointViolation, os.str(), "reconstruct_f");
  }

  auto second_difference = [&](double h) {
    const Vec plus = at(tau + h);
    const Vec minus = at(tau - h);
    Vec d(x.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (plus[i] - 2.0 * mid[i] + minus[i]) / (h * h);
    return d;
  };

  const double h = cfg.effective_step();
  Vec coarse = second_difference(h);
  if (!cfg.richardson) return coarse;
  const Vec fine = second_difference(0.5 * h);
  for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return coarse;
}

LawReport check_reconstruction(const DependenceFn& S, const SecondOrderOde& truth,
                               const ReconstructionConfig& cfg, const SampleSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  detail::Aggregator agg("reconstruction");
  for (int i = 0; i < spec.count; ++i) {
    const double tau = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const Vec x = detail::draw_vec(rng, spec.ab_range, truth.dim);
    const Vec v = detail::draw_vec(rng, spec.ab_range, truth.dim);
    try {
      const Vec f = reconstruct_f(S, tau, x, v, cfg);
      agg.add(inf_dist(f, truth(tau, x, v)), {{"tau", Vec{tau}}, {"x", x}, {"v", v}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  return agg.finish();
}

LawReport roundtrip_check(const SecondOrderOde& ode, const ReconstructionConfig& cfg,
                          const ShootingConfig& shooting_cfg, const SampleSpec& spec) {
  auto ev = std::make_shared<ShootingEvaluator>(ode, shooting_cfg, false);
  const DependenceFn S = [ev](double tau, double alpha, double beta, const Vec& a, const Vec& v) {
    return ev->S(tau, alpha, beta, a, v);
  };
  ReconstructionConfig numeric = cfg;
  numeric.solver_tol = std::max(shooting_cfg.newton_tol, shooting_cfg.integrator.rel_tol);
  LawReport report = check_reconstruction(S, ode, numeric, spec);
  report.law = "roundtrip";
  return report;
}

}  // namespace febvp
