// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "febvp/catalog.hpp"
#include "febvp/cli.hpp"
#include "febvp/closed_forms.hpp"
#include "febvp/expr.hpp"
#include "febvp/geodesics.hpp"
#include "febvp/laws.hpp"
#include "febvp/random.hpp"
#include "febvp/reconstruction.hpp"
#include "febvp/shooting.hpp"

using namespace febvp;

namespace {

struct Family {
  std::string label;
  CatalogEntry entry;
  Range alpha_beta;
};

std::vector<Family> families() {
  std::vector<Family> out;
  out.push_back({"free_fall", make_catalog_entry("free_fall", {{"g", -9.8}}), {-2.0, 2.0}});
  for (double k : {0.5, 1.0, 2.0})
    for (double g : {0.0, 2.0, -2.0}) {
      char label[64];
      std::snprintf(label, sizeof label, "conic(k=%g,g=%g)", k, g);
      out.push_back({label, make_catalog_entry("conic", {{"k", k}, {"g", g}}), {-2.0, 2.0}});
    }
  // |beta - alpha| <= 3 keeps the (cos, sin) basis away from its conjugate length.
  out.push_back({"cos_sin", make_catalog_entry("oscillator"), {-1.5, 1.5}});
  out.push_back({"linear_zero", make_catalog_entry("linear_zero"), {-2.0, 2.0}});
  return out;
}

SampleSpec sampling(int count, Range alpha_beta, std::uint64_t seed = 42) {
  SampleSpec s;
  s.count = count;
  s.seed = seed;
  s.alpha_beta_range = alpha_beta;
  return s;
}

/// Shared sampling for the law sweeps: tau, alpha, beta, a, b in [-1, 1].
/// On [-2, 2] the k = 2 conic reaches |F| ~ 1e4 for close alpha, beta and
/// roundoff alone pushes the composition residual past 1e-10.
SampleSpec law_sampling(int count, const Family& f) {
  SampleSpec s = sampling(count, {std::max(f.alpha_beta.lo, -1.0), std::min(f.alpha_beta.hi, 1.0)});
  s.tau_range = {-1.0, 1.0};
  s.ab_range = {-1.0, 1.0};
  return s;
}

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void check(bool ok, const std::string& what) {
    if (!ok) {
      ok_ = false;
      if (!failed_.empty()) failed_ += "; ";
      failed_ += what;
    }
  }

  void note(const char* fmt, double value) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt, value);
    if (!notes_.empty()) notes_ += ", ";
    notes_ += buf;
  }

  bool ok() const { return ok_; }

  void print() const {
    std::printf("%s %2d %s: %s%s%s\n", ok_ ? "PASS" : "FAIL", id_, title_.c_str(), notes_.c_str(),
                failed_.empty() ? "" : " | failed: ", failed_.c_str());
  }

 private:
  int id_;
  std::string title_;
  bool ok_ = true;
  std::string notes_;
  std::string failed_;
};

void check_report(Criterion& c, const LawReport& r, double threshold, const std::string& who,
                  double& worst) {
  worst = std::max(worst, r.max_residual);
  const bool ok = r.failures == 0 && r.max_residual <= threshold;
  if (!ok) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %s max %.3g failures %d", who.c_str(), r.law.c_str(),
                  r.max_residual, r.failures);
    c.check(false, buf);
  }
}

template <class Fn>
bool throws_code(ErrorCode code, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

Criterion boundary_law(double& sweep_seconds) {
  Criterion c(1, "boundary law");
  const auto t0 = std::chrono::steady_clock::now();
  double closed = 0.0, numeric = 0.0;
  for (const Family& f : families()) {
    check_report(c, check_boundary(closed_form_evaluator(f.entry), law_sampling(500, f)), 1e-9,
                 f.label + " closed", closed);
    check_report(c, check_boundary(numeric_evaluator(f.entry.ode), law_sampling(500, f)), 1e-8,
                 f.label + " shooting", numeric);
  }
  sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.note("closed max %.2e", closed);
  c.note("shooting max %.2e", numeric);
  return c;
}

Criterion composition_law() {
  Criterion c(2, "composition law");
  double closed = 0.0, numeric = 0.0;
  for (const Family& f : families()) {
    check_report(c, check_composition(closed_form_evaluator(f.entry), law_sampling(500, f)), 1e-10,
                 f.label + " closed", closed);
    check_report(c, check_composition(numeric_evaluator(f.entry.ode), law_sampling(500, f)), 1e-7,
                 f.label + " shooting", numeric);
  }
  c.note("closed max %.2e", closed);
  c.note("shooting max %.2e", numeric);
  return c;
}

Criterion extension_law() {
  Criterion c(3, "extension");
  double worst = 0.0;
  for (const Family& f : families()) {
    struct Variant {
      const char* name;
      DependenceEvaluator eval;
      SampleSpec spec;
    };
    const Variant variants[] = {{"closed", closed_form_evaluator(f.entry), law_sampling(500, f)},
                                {"shooting", numeric_evaluator(f.entry.ode), law_sampling(500, f)}};
    for (const Variant& v : variants) {
      const LawReport r = check_extension(v.eval, v.spec);
      check_report(c, r, 1e-8, f.label + " " + v.name, worst);
      c.check(r.extra("diagonal_monotone") == 1.0, f.label + " " + v.name + " diagonal not decreasing");
    }
  }
  c.note("off-diagonal max %.2e", worst);
  return c;
}

Criterion reconstruction() {
  Criterion c(4, "reconstruction");
  double numeric = 0.0, analytic = 0.0;
  SampleSpec cube = sampling(100, {-1.0, 1.0});
  cube.tau_range = {-1.0, 1.0};
  cube.ab_range = {-1.0, 1.0};
  ShootingConfig shooting;
  for (const Family& f : families()) {
    const double threshold = f.entry.name == "free_fall" || f.entry.name == "linear_zero" ? 1e-6 : 1e-4;
    check_report(c, roundtrip_check(f.entry.ode, ReconstructionConfig{}, shooting, cube), threshold,
                 f.label + " roundtrip", numeric);
    check_report(c, check_reconstruction(f.entry.closed_S, f.entry.ode, ReconstructionConfig{}, cube), 1e-8,
                 f.label + " analytic", analytic);
  }
  c.note("roundtrip max %.2e", numeric);
  c.note("analytic max %.2e", analytic);
  return c;
}

Criterion initial_slope() {
  Criterion c(5, "initial derivative");
  const double h = 1e-4;
  double worst = 0.0;
  for (const Family& f : families()) {
    const ShootingEvaluator shoot(f.entry.ode);
    SplitMix64 rng(5);
    for (int s = 0; s < 100; ++s) {
      const double alpha = rng.uniform(-1, 1);
      const Vec a{rng.uniform(-1, 1)}, v{rng.uniform(-1, 1)};
      const auto slope = [&](const DependenceFn& S) {
        return (S(alpha + h, alpha, alpha, a, v)[0] - S(alpha - h, alpha, alpha, a, v)[0]) / (2 * h);
      };
      const DependenceFn numeric = [&](double t, double al, double be, const Vec& x, const Vec& u) {
        return shoot.S(t, al, be, x, u);
      };
      const double err = std::max(std::abs(slope(f.entry.closed_S) - v[0]), std::abs(slope(numeric) - v[0]));
      worst = std::max(worst, err);
      if (!(err <= 1e-6)) {
        c.check(false, f.label);
        break;
      }
    }
  }
  c.note("max |slope - v| %.2e", worst);
  return c;
}

Criterion lemma1() {
  Criterion c(6, "integral/Neumann equivalence");
  double worst = 0.0, quad = 0.0;
  for (const Family& f : families()) {
    const LawReport r = check_lemma1_equivalence(f.entry.ode, law_sampling(100, f));
    check_report(c, r, 1e-9, f.label, worst);
    quad = std::max(quad, r.extra("quadrature_max"));
    c.check(r.extra("quadrature_max") <= 1e-8, f.label + " quadrature");
  }
  c.note("trajectory max %.2e", worst);
  c.note("quadrature max %.2e", quad);
  return c;
}

Criterion linear_family() {
  Criterion c(7, "linear family determinant and Wronskian guard");
  const LinearBasis basis = LinearBasis::cos_sin();
  SplitMix64 rng(7);
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    const double alpha = rng.uniform(-2, 2);
    const double beta = alpha + rng.uniform(0.05, 3.0) * (rng.unit() < 0.5 ? -1 : 1);
    const double tau = rng.uniform(-3, 3), a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const double f = linear_F(basis, tau, alpha, beta, a, b);
    worst = std::max(worst, std::abs(neuman_det(basis, tau, alpha, beta, a, b, f)));
  }
  c.note("max |det| %.2e", worst);
  c.check(worst <= 1e-12, "determinant");

  for (double alpha : {-1.0, 0.0, 0.3, 2.0}) {
    for (double off : {0.0, 5e-11, -5e-11, 1e-10 * 0.99, -1e-10 * 0.99}) {
      const double beta = alpha + std::numbers::pi + off;
      c.check(throws_code(ErrorCode::DegenerateBasis, [&] { linear_F(basis, 0.5, alpha, beta, 1.0, 2.0); }),
              "no DegenerateBasis near the root");
    }
    for (double off : {1e-9, -1e-9, 0.1}) {
      const double beta = alpha + std::numbers::pi + off;
      c.check(!throws_code(ErrorCode::DegenerateBasis, [&] { linear_F(basis, 0.5, alpha, beta, 1.0, 2.0); }),
              "guard fires away from the root");
    }
  }
  return c;
}

Criterion angelesco() {
  Criterion c(8, "Angelesco identity");
  double worst = 0.0;
  for (double k : {0.5, 1.0, 2.0})
    for (double g : {0.0, 2.0, -2.0}) {
      SampleSpec s = sampling(50, {-1.0, 1.0});
      s.tau_range = {-1.0, 1.0};
      check_report(c, check_angelesco(conic_members({k, g}, {-2.0, 2.0}), s), 1e-10, "conic", worst);
    }
  c.note("relative max %.2e", worst);
  const double cubic = angelesco_residual([](double t) { return t * t * t; }, 0.0, 1.0);
  c.note("cubic %g", cubic);
  c.check(cubic == -72.0, "cubic residual");

  SplitMix64 rng(8);
  double limit = 0.0;
  for (int s = 0; s < 200; ++s) {
    const double g = rng.uniform(-5, 5), tau = rng.uniform(-2, 2), alpha = rng.uniform(-2, 2);
    const double beta = alpha + rng.uniform(0.05, 2.0), a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    for (double k : {1e-6, 1e-8, 0.0}) {
      const double d = conic_F({k, g}, tau, alpha, beta, a, b) - free_fall_F(g, tau, alpha, beta, a, b);
      limit = std::max(limit, std::abs(d));
    }
  }
  c.note("k->0 gap %.2e", limit);
  c.check(limit <= 1e-9, "small-k limit");
  return c;
}

Criterion geodesics() {
  Criterion c(9, "geodesic laws");
  double flat_k = 0.0, flat_j = 0.0, hp = 0.0, oracle = 0.0;
  for (int dim : {1, 2, 3}) {
    const GeodesicMap flat(Connection::flat(dim));
    check_report(c, check_klapka(flat, sampling(200, {-2, 2})), 1e-12, "flat", flat_k);
    check_report(c, jensen_midpoint_check(flat, sampling(200, {-2, 2})), 1e-12, "flat", flat_j);
  }
  const GeodesicMap half(Connection::half_plane());
  SampleSpec unit = sampling(100, {0, 1});
  unit.tau_range = {0.0, 1.0};
  check_report(c, check_klapka(half, unit), 1e-6, "half_plane", hp);

  SplitMix64 rng(9);
  const Box& box = half.connection().sampling_box;
  for (int s = 0; s < 100; ++s) {
    const Vec a{rng.uniform(box.lo[0], box.hi[0]), rng.uniform(box.lo[1], box.hi[1])};
    const Vec b{rng.uniform(box.lo[0], box.hi[0]), rng.uniform(box.lo[1], box.hi[1])};
    const double rho = rng.uniform(-0.25, 1.25);
    oracle = std::max(oracle, inf_dist(half(a, b, rho), half_plane_geodesic(a, b, rho)));
  }
  c.check(oracle <= 1e-6, "semicircle oracle");
  c.note("flat klapka %.2e", flat_k);
  c.note("flat jensen %.2e", flat_j);
  c.note("half-plane klapka %.2e", hp);
  c.note("semicircle gap %.2e", oracle);
  return c;
}

Criterion conjugate_points() {
  Criterion c(10, "conjugate point");
  const SecondOrderOde osc = make_catalog_entry("oscillator").ode;
  for (int rep = 0; rep < 3; ++rep)
    for (double alpha : {0.0, 0.7, -1.3}) {
      const NeumannConditions cond{alpha, alpha + std::numbers::pi, {0.0}, {1.0}};
      c.check(throws_code(ErrorCode::ConjugatePoint, [&] { solve_neumann(osc, cond); }),
              "no ConjugatePoint at length pi");
    }
  double worst = 0.0;
  for (double alpha : {0.0, 0.7, -1.3}) {
    const NeumannConditions cond{alpha, alpha + std::numbers::pi - 0.1, {0.0}, {1.0}};
    try {
      const ShootingResult r = solve_neumann(osc, cond);
      worst = std::max(worst, std::abs(r.trajectory.end().x[0] - cond.b[0]));
      worst = std::max(worst, std::abs(r.trajectory.start().x[0] - cond.a[0]));
    } catch (const Error& e) {
      c.check(false, e.what());
    }
  }
  c.note("boundary residual at pi-0.1 %.2e", worst);
  c.check(worst <= 1e-8, "boundary residual");
  return c;
}

Criterion parser() {
  Criterion c(11, "expression parser");
  static const char alphabet[] = "0123456789.eE+-*/^() ,xvtaukgsincoexplqrbh_$";
  SplitMix64 rng(11);
  int parsed = 0, escaped = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string text;
    const int len = static_cast<int>(rng() % 24);
    for (int j = 0; j < len; ++j) text += alphabet[rng() % (sizeof alphabet - 1)];
    try {
      const Expr e = parse(text, 1, {"k", "g"});
      ++parsed;
      const double x[] = {0.5}, v[] = {-1.5}, p[] = {2.0, -1.0};
      try {
        (void)e.eval(0.25, x, v, std::span<const double>(p, e.parameters().size()));
      } catch (const EvaluationError&) {
      }
    } catch (const ParseError&) {
    } catch (...) {
      ++escaped;
    }
  }
  c.note("fuzz inputs parsed %g", parsed);
  c.check(escaped == 0, "fuzz escaped");

  const std::map<std::string, double> params{{"k", 1.3}, {"g", -0.7}};
  const SecondOrderOde builtin = make_catalog_entry("conic", params).ode;
  const SecondOrderOde parsed_ode = ode_from_expressions({"k^2*x+g"}, params);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double tau = rng.uniform(-5, 5);
    const Vec x{rng.uniform(-5, 5)}, v{rng.uniform(-5, 5)};
    if (std::bit_cast<std::uint64_t>(builtin(tau, x, v)[0]) !=
        std::bit_cast<std::uint64_t>(parsed_ode(tau, x, v)[0]))
      ++mismatches;
  }
  c.note("parity mismatches %g", mismatches);
  c.check(mismatches == 0, "catalog parity");

  const double none[] = {0.0};
  const auto value = [&](const char* s) { return parse(s, 1).eval(0.0, none, none, {}); };
  c.check(value("2^3^2") == 512.0, "2^3^2");
  c.check(value("-2^2") == -4.0, "-2^2");
  return c;
}

Criterion determinism() {
  Criterion c(12, "determinism");
  const std::vector<std::vector<std::string>> runs = {
      {"verify", "--catalog", "conic", "--param", "k=2", "--param", "g=-2", "--laws",
       "composition,boundary,extension,lemma1", "--samples", "50", "--seed", "12", "--format", "json"},
      {"verify", "--catalog", "oscillator", "--closed-form", "--laws", "composition,boundary,extension,angelesco",
       "--samples", "200", "--seed", "12", "--format", "json"},
      {"verify", "--connection", "half_plane", "--laws", "klapka", "--tau-range", "0", "1", "--samples", "30",
       "--format", "json"},
      {"reconstruct", "--catalog", "free_fall", "--point", "0.1", "0.2", "0.3", "--format", "json"},
  };
  for (const auto& args : runs) {
    std::ostringstream first, second, err;
    febvp::cli::run(args, first, err);
    febvp::cli::run(args, second, err);
    c.check(!first.str().empty() && first.str() == second.str(), args[0] + " output differs");
  }
  c.note("%g repeated reports identical", static_cast<double>(runs.size()));
  return c;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  double sweep = 0.0;
  std::vector<Criterion> results;
  results.push_back(boundary_law(sweep));
  results.push_back(composition_law());
  results.push_back(extension_law());
  results.push_back(reconstruction());
  results.push_back(initial_slope());
  results.push_back(lemma1());
  results.push_back(linear_family());
  results.push_back(angelesco());
  results.push_back(geodesics());
  results.push_back(conjugate_points());
  results.push_back(parser());
  results.push_back(determinism());
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  results[0].note("suite %.1f s", total);
  results[0].check(total <= 60.0, "runtime over 60 s");

  int failed = 0;
  for (const Criterion& c : results) {
    c.print();
    if (!c.ok()) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
