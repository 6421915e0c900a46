#include "febvp/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "febvp/error.hpp"

namespace febvp {
namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, DOPRI5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kMinRatio = 0.2;
constexpr double kMaxRatio = 5.0;
constexpr double kBeta = 0.04;  // PI stabilisation
constexpr double kExpo = 0.2 - kBeta * 0.75;

/// Scratch space for one Dormand–Prince step on y = (x, v).
class Stepper {
 public:
  Stepper(const SecondOrderOde& ode)
      : ode_(ode), m_(2 * static_cast<std::size_t>(ode.dim)), tmp_(m_), y1_(m_) {
    for (auto& k : k_) k.assign(m_, 0.0);
  }

  std::size_t size() const noexcept { return m_; }

  // dy/dt = (v, f(t, x, v))
  void deriv(double t, std::span<const double> y, std::span<double> dy) const {
    const std::size_t n = m_ / 2;
    std::copy(y.begin() + n, y.end(), dy.begin());
    ode_.rhs(t, y.first(n), y.subspan(n), dy.subspan(n));
    for (std::size_t i = n; i < m_; ++i) {
      if (!std::isfinite(dy[i])) {
        std::ostringstream os;
        os << "rhs '" << ode_.label << "' returned a non-finite value at tau=" << t;
        throw Error(ErrorCode::NonFiniteRhs, os.str(), "integrate_ivp");
      }
    }
  }

  void init_fsal(double t, std::span<const double> y) { deriv(t, y, k_[0]); }

  /// Stages 2..7 from y at t with step h; k_[0] must hold f(t, y). Leaves the
  /// 5th-order solution in y1().
  void step(double t, double h, std::span<const double> y) {
    auto& [k1, k2, k3, k4, k5, k6, k7] = k_;
    for (std::size_t i = 0; i < m_; ++i) tmp_[i] = y[i] + h * a21 * k1[i];
    deriv(t + c2 * h, tmp_, k2);
    for (std::size_t i = 0; i < m_; ++i) tmp_[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    deriv(t + c3 * h, tmp_, k3);
    for (std::size_t i = 0; i < m_; ++i)
      tmp_[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    deriv(t + c4 * h, tmp_, k4);
    for (std::size_t i = 0; i < m_; ++i)
      tmp_[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    deriv(t + c5 * h, tmp_, k5);
    for (std::size_t i = 0; i < m_; ++i)
      tmp_[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    deriv(t + h, tmp_, k6);
    for (std::size_t i = 0; i < m_; ++i)
      y1_[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    deriv(t + h, y1_, k7);
  }

  /// Hairer's RMS error norm of the embedded estimate.
  double error_norm(double h, std::span<const double> y, double rtol, double atol) const {
    auto& [k1, k2, k3, k4, k5, k6, k7] = k_;
    double sum = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(y1_[i]));
      sum += (e / sk) * (e / sk);
    }
    return std::sqrt(sum / static_cast<double>(m_));
  }

  void dense(double h, std::span<const double> y, std::span<double> out) const {
    auto& [k1, k2, k3, k4, k5, k6, k7] = k_;
    auto r2 = out.subspan(0, m_), r3 = out.subspan(m_, m_), r4 = out.subspan(2 * m_, m_),
         r5 = out.subspan(3 * m_, m_);
    for (std::size_t i = 0; i < m_; ++i) {
      r2[i] = y1_[i] - y[i];
      r3[i] = h * k1[i] - r2[i];
      r4[i] = r2[i] - h * k7[i] - r3[i];
      r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
  }

  void accept() { std::swap(k_[0], k_[6]); }

  std::span<const double> y1() const noexcept { return y1_; }

 private:
  const SecondOrderOde& ode_;
  std::size_t m_;
  std::array<Vec, 7> k_;
  Vec tmp_;
  Vec y1_;
};

void check_start(const SecondOrderOde& ode, std::span<const double> x, std::span<const double> v,
                 double tau0) {
  if (ode.dim < 1) throw Error(ErrorCode::InvalidArgument, "ode dimension must be >= 1");
  if (!ode.rhs) throw Error(ErrorCode::InvalidArgument, "ode has no right-hand side");
  const auto n = static_cast<std::size_t>(ode.dim);
  if (x.size() != n || v.size() != n)
    throw Error(ErrorCode::InvalidArgument, "start state does not match ode dimension");
  if (!std::isfinite(tau0) || !all_finite(x) || !all_finite(v))
    throw Error(ErrorCode::InvalidArgument, "start state must be finite");
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0 && abs_tol > 0 && h_init > 0 && h_min > 0))
    throw Error(ErrorCode::InvalidArgument, "integrator tolerances and steps must be positive");
  if (h_min > h_init) throw Error(ErrorCode::InvalidArgument, "h_min must not exceed h_init");
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
}

StatePoint Trajectory::from_y(double tau, std::span<const double> y) const {
  const auto n = static_cast<std::size_t>(dim_);
  return StatePoint{tau, Vec(y.begin(), y.begin() + n), Vec(y.begin() + n, y.end())};
}

StatePoint Trajectory::knot_state(std::size_t i) const {
  const std::size_t m = 2 * static_cast<std::size_t>(dim_);
  return from_y(knots_[i], std::span<const double>(states_).subspan(i * m, m));
}

StatePoint Trajectory::eval(double tau) const {
  if (!(tau >= tau_lo() && tau <= tau_hi())) {
    std::ostringstream os;
    os << "tau=" << tau << " outside trajectory span [" << tau_lo() << ", " << tau_hi() << "]";
    throw Error(ErrorCode::OutOfSpan, os.str(), "eval_trajectory");
  }
  // First knot at or beyond tau in integration order.
  auto it = forward_ ? std::lower_bound(knots_.begin(), knots_.end(), tau)
                     : std::lower_bound(knots_.begin(), knots_.end(), tau, std::greater<>());
  const auto idx = static_cast<std::size_t>(it - knots_.begin());
  if (*it == tau) return knot_state(idx);

  const std::size_t seg = idx - 1;
  const std::size_t m = 2 * static_cast<std::size_t>(dim_);
  const double t0 = knots_[seg];
  const double h = knots_[seg + 1] - t0;
  const double theta = (tau - t0) / h;
  const double theta1 = 1.0 - theta;
  const double* y0 = states_.data() + seg * m;
  const double* r = dense_.data() + seg * 4 * m;
  Vec y(m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = y0[i] +
           theta * (r[i] + theta1 * (r[m + i] + theta * (r[2 * m + i] + theta1 * r[3 * m + i])));
  }
  return from_y(tau, y);
}

Trajectory integrate_ivp(const SecondOrderOde& ode, const StatePoint& start, double tau_end,
                         const IntegratorConfig& config) {
  config.validate();
  check_start(ode, start.x, start.v, start.tau);
  if (!std::isfinite(tau_end)) throw Error(ErrorCode::InvalidArgument, "tau_end must be finite");

  Trajectory traj;
  traj.dim_ = ode.dim;
  traj.label_ = ode.label;
  traj.forward_ = tau_end >= start.tau;
  traj.knots_.push_back(start.tau);
  traj.states_.insert(traj.states_.end(), start.x.begin(), start.x.end());
  traj.states_.insert(traj.states_.end(), start.v.begin(), start.v.end());
  if (tau_end == start.tau) return traj;

  Stepper stepper(ode);
  const std::size_t m = stepper.size();
  const double dir = traj.forward_ ? 1.0 : -1.0;
  Vec y(traj.states_);
  double t = start.tau;
  double h = dir * std::min(config.h_init, std::abs(tau_end - t));
  double facold = 1e-4;
  bool rejected_last = false;
  Vec dense(4 * m);

  stepper.init_fsal(t, y);
  for (long nstep = 0;; ++nstep) {
    if (nstep >= config.max_steps) {
      std::ostringstream os;
      os << "exceeded " << config.max_steps << " steps at tau=" << t;
      throw Error(ErrorCode::MaxStepsExceeded, os.str(), "integrate_ivp");
    }
    const bool last = std::abs(tau_end - t) <= 1.01 * std::abs(h);
    const double t_next = last ? tau_end : t + h;
    h = t_next - t;

    stepper.step(t, h, y);
    const double err = stepper.error_norm(h, y, config.rel_tol, config.abs_tol);
    const double fac11 = std::pow(err, kExpo);
    if (err <= 1.0) {
      stepper.dense(h, y, dense);
      traj.dense_.insert(traj.dense_.end(), dense.begin(), dense.end());
      const auto y1 = stepper.y1();
      y.assign(y1.begin(), y1.end());
      traj.knots_.push_back(t_next);
      traj.states_.insert(traj.states_.end(), y.begin(), y.end());
      stepper.accept();
      t = t_next;
      if (last) break;

      double ratio = kSafety * std::pow(facold, kBeta) / std::max(fac11, 1e-300);
      ratio = std::clamp(ratio, kMinRatio, kMaxRatio);
      if (rejected_last) ratio = std::min(ratio, 1.0);
      facold = std::max(err, 1e-4);
      h *= ratio;
      rejected_last = false;
    } else {
      const double ratio = std::max(kMinRatio, kSafety / fac11);
      h *= ratio;
      rejected_last = true;
      if (std::abs(h) < config.h_min) {
        std::ostringstream os;
        os << "step size " << std::abs(h) << " below h_min at tau=" << t;
        throw Error(ErrorCode::StepSizeUnderflow, os.str(), "integrate_ivp");
      }
    }
  }
  return traj;
}

Vec propagate_on_knots(const SecondOrderOde& ode, double tau0, std::span<const double> x0,
                       std::span<const double> v0, std::span<const double> knots) {
  check_start(ode, x0, v0, tau0);
  if (knots.empty() || knots.front() != tau0)
    throw Error(ErrorCode::InvalidArgument, "knot sequence must start at tau0");
  Stepper stepper(ode);
  Vec y(x0.begin(), x0.end());
  y.insert(y.end(), v0.begin(), v0.end());
  if (knots.size() == 1) return y;
  stepper.init_fsal(knots[0], y);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double h = knots[i + 1] - knots[i];
    stepper.step(knots[i], h, y);
    const auto y1 = stepper.y1();
    y.assign(y1.begin(), y1.end());
    stepper.accept();
  }
  return y;
}

}  // namespace febvp
