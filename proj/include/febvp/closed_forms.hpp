#pragma once

#include <functional>
#include <string>

namespace febvp {

using ScalarFn = std::function<double(double)>;

/// Two solutions x1, x2 of a scalar linear second-order equation.
struct LinearBasis {
  ScalarFn x1;
  ScalarFn x2;
  std::string label;

  /// x1(alpha) x2(beta) - x1(beta) x2(alpha)
  double wronskian_pair(double alpha, double beta) const;

  static LinearBasis cos_sin();
  static LinearBasis one_tau();
};

/// Parameters of x'' = k^2 x + g.
struct ConicParams {
  double k = 1.0;
  double g = 0.0;
};

/// |k (beta - alpha)| below which conic_F switches to its small-k expansion.
inline constexpr double kConicSeriesSwitch = 1e-4;

/// Relative size of the Wronskian below which a basis counts as degenerate.
/// At 1e-10, F would already have lost ten digits to the division.
inline constexpr double kWronskianTolerance = 1e-10;

/// Dependence map of the linear equation spanned by `basis`:
///
///   F = [(x1(τ)x2(β) - x1(β)x2(τ)) a + (x1(α)x2(τ) - x1(τ)x2(α)) b] / w(α, β).
///
/// Throws DegenerateBasis when |w(α, β)| <= kWronskianTolerance * max(|x1(α)x2(β)|, |x1(β)x2(α)|, 1).
double linear_F(const LinearBasis& basis, double tau, double alpha, double beta, double a,
                double b);

/// det [[x1(α), x2(α), a], [x1(β), x2(β), b], [x1(τ), x2(τ), F]]
double neuman_det(const LinearBasis& basis, double tau, double alpha, double beta, double a,
                  double b, double f_val);

/// Uniform motion under constant acceleration g through (α, a) and (β, b).
double free_fall_F(double g, double tau, double alpha, double beta, double a, double b);

/// a + v (τ - α) + g (τ - α)(τ - β) / 2, valid on the diagonal too.
double free_fall_S(double g, double tau, double alpha, double beta, double a, double v);

/// Dependence map of x'' = k^2 x + g. For |k(β-α)| >= kConicSeriesSwitch this
/// is the sinh quotient
///
///   [(k²a+g) sinh k(τ-β) + (k²b+g) sinh k(α-τ) - g sinh k(α-β)] / (k² sinh k(α-β))
///
/// evaluated in a rearranged form that keeps the g-part free of the 1/k²
/// cancellation; below the switch the expansion through k⁴ around free fall
/// is used.
double conic_F(const ConicParams& p, double tau, double alpha, double beta, double a, double b);

/// Smooth extension of conic_F across α = β (Cauchy solution on the diagonal).
double conic_S(const ConicParams& p, double tau, double alpha, double beta, double a, double v);

/// Extension of the (cos, sin) family, i.e. x'' = -x, across α = β:
/// a cos((α+β-2τ)/2)/cos(L/2) + v (τ-α) sinc(τ-α)/sinc(L) with L = β - α.
double cos_sin_S(double tau, double alpha, double beta, double a, double v);

/// Five-point Angelesco product identity residual:
/// (x(τ+4Δ)-x(τ+Δ))(x(τ+2Δ)-x(τ+Δ)) - (x(τ+3Δ)-x(τ))(x(τ+3Δ)-x(τ+2Δ)).
double angelesco_residual(const ScalarFn& x, double tau, double delta);

/// Sum of the magnitudes of the two products, for relative residuals.
double angelesco_scale(const ScalarFn& x, double tau, double delta);

}  // namespace febvp
