#include "febvp/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "febvp/error.hpp"

namespace febvp {
namespace {

double sinhc(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z * z / 6.0;
  return std::sinh(z) / z;
}

double sinc(double z) {
  if (std::abs(z) < 1e-5) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

// g-part of the conic solution with zero boundary values:
// g (τ-α)(τ-β)/2 · sinhc(k(β-τ)/2) sinhc(k(α-τ)/2) / cosh(kL/2).
double conic_forcing(double k, double g, double s, double t, double length) {
  return 0.5 * g * s * t * sinhc(0.5 * k * t) * sinhc(0.5 * k * s) / std::cosh(0.5 * k * length);
}

}  // namespace

double LinearBasis::wronskian_pair(double alpha, double beta) const {
  return x1(alpha) * x2(beta) - x1(beta) * x2(alpha);
}

LinearBasis LinearBasis::cos_sin() {
  return LinearBasis{[](double t) { return std::cos(t); }, [](double t) { return std::sin(t); },
                     "cos_sin"};
}

LinearBasis LinearBasis::one_tau() {
  return LinearBasis{[](double) { return 1.0; }, [](double t) { return t; }, "one_tau"};
}

double linear_F(const LinearBasis& basis, double tau, double alpha, double beta, double a,
                double b) {
  const double x1a = basis.x1(alpha), x2a = basis.x2(alpha);
  const double x1b = basis.x1(beta), x2b = basis.x2(beta);
  const double x1t = basis.x1(tau), x2t = basis.x2(tau);
  const double w = x1a * x2b - x1b * x2a;
  const double scale = std::max({std::abs(x1a * x2b), std::abs(x1b * x2a), 1.0});
  if (!(std::abs(w) > kWronskianTolerance * scale)) {
    std::ostringstream os;
    os << "basis '" << basis.label << "' is degenerate on (" << alpha << ", " << beta
       << "): w = " << w;
    throw Error(ErrorCode::DegenerateBasis, os.str(), "linear_F");
  }
  return ((x1t * x2b - x1b * x2t) * a + (x1a * x2t - x1t * x2a) * b) / w;
}

double neuman_det(const LinearBasis& basis, double tau, double alpha, double beta, double a,
                  double b, double f_val) {
  const double x1a = basis.x1(alpha), x2a = basis.x2(alpha);
  const double x1b = basis.x1(beta), x2b = basis.x2(beta);
  const double x1t = basis.x1(tau), x2t = basis.x2(tau);
  // Cofactor expansion along the last column.
  return a * (x1b * x2t - x2b * x1t) - b * (x1a * x2t - x2a * x1t) +
         f_val * (x1a * x2b - x2a * x1b);
}

double free_fall_F(double g, double tau, double alpha, double beta, double a, double b) {
  if (!(alpha != beta)) throw Error(ErrorCode::InvalidArgument, "free_fall_F needs alpha != beta");
  return a + (b - a) * ((tau - alpha) / (beta - alpha)) + 0.5 * g * (tau - alpha) * (tau - beta);
}

double free_fall_S(double g, double tau, double alpha, double beta, double a, double v) {
  return a + v * (tau - alpha) + 0.5 * g * (tau - alpha) * (tau - beta);
}

double conic_F(const ConicParams& p, double tau, double alpha, double beta, double a, double b) {
  if (!(alpha != beta)) throw Error(ErrorCode::InvalidArgument, "conic_F needs alpha != beta");
  const double k = p.k, g = p.g;
  const double length = beta - alpha;
  const double s = tau - alpha;
  const double t = tau - beta;

  if (std::abs(k * length) >= kConicSeriesSwitch) {
    const double sl = std::sinh(k * length);
    return (a * std::sinh(-k * t) + b * std::sinh(k * s)) / sl +
           conic_forcing(k, g, s, t, length);
  }

  // x = x0 + k² x1 + k⁴ x2 with x0 the free fall and x1, x2 vanishing at α, β.
  const double q = s / length;
  const double x0 = a + (b - a) * q + 0.5 * g * s * t;
  const double x1 = s * t *
                    (a * (1.0 / 3 - q / 6) + b * (1.0 / 6 + q / 6) +
                     g * (s * s - length * s - length * length) / 24);
  const double l2 = length * length, s2 = s * s;
  const double x2 =
      s * t *
      (a * (-l2 / 45 - length * s / 45 + s2 / 30 - s2 * q / 120) +
       b * (-7 * l2 / 360 - 7 * length * s / 360 + s2 / 120 + s2 * q / 120) +
       g * (l2 * l2 / 240 + l2 * length * s / 240 - l2 * s2 / 360 - length * s2 * s / 360 +
            s2 * s2 / 720));
  const double kk = k * k;
  return x0 + kk * (x1 + kk * x2);
}

double conic_S(const ConicParams& p, double tau, double alpha, double beta, double a, double v) {
  const double k = p.k;
  const double length = beta - alpha;
  const double s = tau - alpha;
  const double t = tau - beta;
  const double ch = std::cosh(0.5 * k * length);
  return a * std::cosh(0.5 * k * (alpha + beta - 2 * tau)) / ch +
         v * s * sinhc(k * s) / sinhc(k * length) + conic_forcing(k, p.g, s, t, length);
}

double cos_sin_S(double tau, double alpha, double beta, double a, double v) {
  const double length = beta - alpha;
  const double s = tau - alpha;
  return a * std::cos(0.5 * (alpha + beta - 2 * tau)) / std::cos(0.5 * length) +
         v * s * sinc(s) / sinc(length);
}

double angelesco_residual(const ScalarFn& x, double tau, double delta) {
  if (!(delta != 0.0)) throw Error(ErrorCode::InvalidArgument, "angelesco_residual needs delta != 0");
  const double x0 = x(tau), x1 = x(tau + delta), x2 = x(tau + 2 * delta),
               x3 = x(tau + 3 * delta), x4 = x(tau + 4 * delta);
  return (x4 - x1) * (x2 - x1) - (x3 - x0) * (x3 - x2);
}

double angelesco_scale(const ScalarFn& x, double tau, double delta) {
  const double x0 = x(tau), x1 = x(tau + delta), x2 = x(tau + 2 * delta),
               x3 = x(tau + 3 * delta), x4 = x(tau + 4 * delta);
  return std::abs((x4 - x1) * (x2 - x1)) + std::abs((x3 - x0) * (x3 - x2));
}

}  // namespace febvp
