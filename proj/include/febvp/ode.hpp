#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "febvp/vec.hpp"

namespace febvp {

/// Right-hand side f(tau, x, v) of x'' = f(tau, x, x'); writes dim values into `out`.
using RhsFn = std::function<void(double tau, std::span<const double> x,
                                 std::span<const double> v, std::span<double> out)>;

/// A second-order system x'' = f(tau, x, x') in dimension `dim`.
struct SecondOrderOde {
  int dim = 1;
  RhsFn rhs;
  std::string label;

  Vec operator()(double tau, std::span<const double> x, std::span<const double> v) const {
    Vec out(static_cast<std::size_t>(dim));
    rhs(tau, x, v, out);
    return out;
  }
};

/// Cauchy data: position x and velocity v at time tau.
struct StatePoint {
  double tau = 0.0;
  Vec x;
  Vec v;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;
  long max_steps = 1'000'000;

  /// Throws InvalidArgument when any field violates its constraint.
  void validate() const;
};

/// Dense-output solution of a Cauchy problem. Immutable once built.
///
/// The state is stored as the first-order vector y = (x, v) of size 2n at
/// every accepted step, together with the Dormand–Prince continuous
/// extension coefficients of each step.
class Trajectory {
 public:
  Trajectory() = default;

  double tau_lo() const noexcept { return forward_ ? knots_.front() : knots_.back(); }
  double tau_hi() const noexcept { return forward_ ? knots_.back() : knots_.front(); }
  double tau_start() const noexcept { return knots_.front(); }
  double tau_end() const noexcept { return knots_.back(); }
  int dim() const noexcept { return dim_; }
  const std::string& ode_label() const noexcept { return label_; }
  std::size_t segment_count() const noexcept { return knots_.size() - 1; }

  /// Knot times in integration order (first = start, last = end).
  std::span<const double> knots() const noexcept { return knots_; }

  bool contains(double tau) const noexcept { return tau >= tau_lo() && tau <= tau_hi(); }

  /// Interpolated state; knots return the stored state bit-for-bit.
  /// Throws OutOfSpan outside [tau_lo, tau_hi].
  StatePoint eval(double tau) const;

  StatePoint start() const { return knot_state(0); }
  StatePoint end() const { return knot_state(knots_.size() - 1); }

 private:
  friend Trajectory integrate_ivp(const SecondOrderOde&, const StatePoint&, double,
                                  const IntegratorConfig&);

  StatePoint knot_state(std::size_t i) const;
  StatePoint from_y(double tau, std::span<const double> y) const;

  int dim_ = 0;
  bool forward_ = true;
  std::string label_;
  std::vector<double> knots_;
  std::vector<double> states_;  // (knots) x 2n
  std::vector<double> dense_;   // (segments) x 4 x 2n: rcont2..rcont5
};

/// Solves the Cauchy problem x(start.tau) = start.x, x'(start.tau) = start.v up
/// to tau_end (backwards when tau_end < start.tau) with an adaptive
/// Dormand–Prince 5(4) pair.
///
/// Throws StepSizeUnderflow, MaxStepsExceeded or NonFiniteRhs.
Trajectory integrate_ivp(const SecondOrderOde& ode, const StatePoint& start, double tau_end,
                         const IntegratorConfig& config = {});

/// Interpolates `traj` at tau (free-function form of Trajectory::eval).
inline StatePoint eval_trajectory(const Trajectory& traj, double tau) { return traj.eval(tau); }

/// Re-runs the Dormand–Prince map on a fixed knot sequence (no step-size
/// control) and returns the final state (x, v) concatenated. With the knots of
/// an adaptive run from the same start this reproduces its end state exactly,
/// so finite differences taken through it are free of step-selection noise.
Vec propagate_on_knots(const SecondOrderOde& ode, double tau0, std::span<const double> x0,
                       std::span<const double> v0, std::span<const double> knots);

}  // namespace febvp
