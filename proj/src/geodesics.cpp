#include "febvp/geodesics.hpp"

#include <cmath>
#include <sstream>

#include "febvp/error.hpp"

namespace febvp {
namespace {

Vec draw_in_box(SplitMix64& rng, const Box& box) {
  Vec out(box.lo.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(box.lo[i], box.hi[i]);
  return out;
}

Vec scaled(const Vec& v, double s) {
  Vec out(v);
  for (auto& e : out) e *= s;
  return out;
}

Vec midpoint(const Vec& p, const Vec& q) {
  Vec out(p.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (p[i] + q[i]);
  return out;
}

}  // namespace

Connection Connection::flat(int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "connection dimension must be >= 1");
  Connection c;
  c.dim = dim;
  c.label = "flat";
  c.gamma = [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
  c.sampling_box = Box{Vec(static_cast<std::size_t>(dim), -2.0), Vec(static_cast<std::size_t>(dim), 2.0)};
  return c;
}

Connection Connection::half_plane() {
  Connection c;
  c.dim = 2;
  c.label = "half_plane";
  c.gamma = [](std::span<const double> p, std::span<double> g) {
    std::fill(g.begin(), g.end(), 0.0);
    const double inv_y = 1.0 / p[1];
    g[(0 * 2 + 0) * 2 + 1] = -inv_y;  // Γ^x_xy
    g[(0 * 2 + 1) * 2 + 0] = -inv_y;  // Γ^x_yx
    g[(1 * 2 + 0) * 2 + 0] = inv_y;   // Γ^y_xx
    g[(1 * 2 + 1) * 2 + 1] = -inv_y;  // Γ^y_yy
  };
  c.sampling_box = Box{{-0.5, 0.5}, {0.5, 2.0}};
  return c;
}

double symmetry_defect(const Connection& conn, std::span<const double> point) {
  const auto n = static_cast<std::size_t>(conn.dim);
  Vec g(n * n * n);
  conn.gamma(point, g);
  double defect = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        defect = std::max(defect, std::abs(g[(k * n + i) * n + j] - g[(k * n + j) * n + i]));
  return defect;
}

void check_symmetric(const Connection& conn, int count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (int s = 0; s < count; ++s) {
    const Vec p = draw_in_box(rng, conn.sampling_box);
    const double defect = symmetry_defect(conn, p);
    if (!(defect <= 1e-12)) {
      std::ostringstream os;
      os << "connection '" << conn.label << "' is not symmetric (defect " << defect << ")";
      throw Error(ErrorCode::InvalidArgument, os.str(), conn.label);
    }
  }
}

SecondOrderOde geodesic_ode(const Connection& conn) {
  SecondOrderOde ode;
  ode.dim = conn.dim;
  ode.label = "geodesic:" + conn.label;
  ode.rhs = [gamma = conn.gamma, n = static_cast<std::size_t>(conn.dim)](
                double, std::span<const double> x, std::span<const double> v,
                std::span<double> out) {
    Vec g(n * n * n);
    gamma(x, g);
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += g[(k * n + i) * n + j] * v[i] * v[j];
      out[k] = -acc;
    }
  };
  return ode;
}

GeodesicMap::GeodesicMap(Connection conn, ShootingConfig cfg)
    : conn_(std::move(conn)),
      evaluator_(std::make_shared<ShootingEvaluator>(geodesic_ode(conn_), std::move(cfg))) {}

Vec GeodesicMap::operator()(const Vec& a, const Vec& b, double rho) const {
  return evaluator_->F(rho, NeumannConditions{0.0, 1.0, a, b});
}

Vec half_plane_geodesic(const Vec& a, const Vec& b, double rho) {
  if (a.size() != 2 || b.size() != 2 || !(a[1] > 0) || !(b[1] > 0))
    throw Error(ErrorCode::InvalidArgument, "half-plane points need y > 0");
  if (a[0] == b[0]) return Vec{a[0], a[1] * std::pow(b[1] / a[1], rho)};
  const double c = (b[0] * b[0] + b[1] * b[1] - a[0] * a[0] - a[1] * a[1]) / (2.0 * (b[0] - a[0]));
  const double r = std::hypot(a[0] - c, a[1]);
  const double sa = std::atanh((a[0] - c) / r);
  const double sb = std::atanh((b[0] - c) / r);
  const double s = sa + rho * (sb - sa);
  return Vec{c + r * std::tanh(s), r / std::cosh(s)};
}

LawReport check_klapka(const GeodesicMap& gmap, const SampleSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  detail::Aggregator agg("klapka");
  double g0 = 0.0, g2 = 0.0, g3 = 0.0;
  for (int s = 0; s < spec.count; ++s) {
    const Vec a = draw_in_box(rng, gmap.connection().sampling_box);
    const Vec b = draw_in_box(rng, gmap.connection().sampling_box);
    const double zeta = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const double eta = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const double rho = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    try {
      const double r2 = std::max(inf_dist(gmap(a, b, 0.0), a), inf_dist(gmap(a, b, 1.0), b));
      const double r0 = inf_dist(gmap(a, a, rho), a);
      const Vec lhs = gmap(a, b, (1.0 - rho) * zeta + rho * eta);
      const Vec rhs = gmap(gmap(a, b, zeta), gmap(a, b, eta), rho);
      const double r3 = inf_dist(lhs, rhs);
      const double r = std::max({r0, r2, r3});
      if (std::isfinite(r)) {
        g0 = std::max(g0, r0);
        g2 = std::max(g2, r2);
        g3 = std::max(g3, r3);
      }
      agg.add(std::isnan(r0) || std::isnan(r2) || std::isnan(r3) ? NAN : r,
              {{"a", a}, {"b", b}, {"zeta", Vec{zeta}}, {"eta", Vec{eta}}, {"rho", Vec{rho}}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  LawReport report = agg.finish();
  report.extras = {{"g0", g0}, {"g2", g2}, {"g3", g3}};
  return report;
}

LawReport jensen_midpoint_check(const GeodesicMap& gmap, const SampleSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  detail::Aggregator agg("jensen");
  const Vec origin(static_cast<std::size_t>(gmap.connection().dim), 0.0);
  auto Q = [&](double rho, const Vec& b) { return gmap(origin, b, rho); };
  double jensen = 0.0, swap = 0.0, half = 0.0;
  for (int s = 0; s < spec.count; ++s) {
    const Vec a = draw_in_box(rng, gmap.connection().sampling_box);
    const Vec b = draw_in_box(rng, gmap.connection().sampling_box);
    const double zeta = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const double eta = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    const double rho = rng.uniform(spec.tau_range.lo, spec.tau_range.hi);
    try {
      const double rj = inf_dist(Q(0.5 * (zeta + eta), b), midpoint(Q(zeta, b), Q(eta, b)));
      const double rs = inf_dist(gmap(a, b, 1.0 - rho), gmap(b, a, rho));
      const double rh = inf_dist(Q(0.5, a), scaled(a, 0.5));
      const double r = std::max({rj, rs, rh});
      if (std::isfinite(r)) {
        jensen = std::max(jensen, rj);
        swap = std::max(swap, rs);
        half = std::max(half, rh);
      }
      agg.add(std::isnan(rj) || std::isnan(rs) || std::isnan(rh) ? NAN : r,
              {{"a", a}, {"b", b}, {"zeta", Vec{zeta}}, {"eta", Vec{eta}}, {"rho", Vec{rho}}});
    } catch (const Error&) {
      agg.fail();
    }
  }
  LawReport report = agg.finish();
  report.extras = {{"jensen", jensen}, {"swap", swap}, {"half", half}};
  return report;
}

}  // namespace febvp
