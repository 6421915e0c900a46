#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "febvp/catalog.hpp"
#include "febvp/closed_forms.hpp"
#include "febvp/random.hpp"
#include "febvp/shooting.hpp"

namespace febvp {

/// An evaluable F(tau, alpha, beta, a, b), optionally with its extension
/// S(tau, alpha, beta, a, v).
struct DependenceEvaluator {
  int dim = 1;
  DependenceFn eval_f;
  DependenceFn eval_s;  // may be empty
  double min_separation = 0.0;
  std::string label;
};

/// Wraps a caching shooting evaluator (kept alive by the returned closures).
DependenceEvaluator numeric_evaluator(const SecondOrderOde& ode, const ShootingConfig& cfg = {});

/// Closed-form F and S of a catalog family.
DependenceEvaluator closed_form_evaluator(const CatalogEntry& entry);

struct Range {
  double lo = -2.0;
  double hi = 2.0;
};

struct SampleSpec {
  int count = 100;
  std::uint64_t seed = 42;
  Range tau_range{-2.0, 2.0};
  Range ab_range{-2.0, 2.0};
  Range alpha_beta_range{-2.0, 2.0};
  double min_separation = 0.05;
  /// When set, every sampled pair has beta = alpha + interval_length.
  std::optional<double> interval_length;

  void validate() const;
};

struct LawReport {
  std::string law;
  int samples = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  std::vector<std::pair<std::string, Vec>> worst_case;
  int failures = 0;
  /// Law-specific side results (e.g. per-epsilon diagonal maxima).
  std::vector<std::pair<std::string, double>> extras;

  double extra(const std::string& key) const;
};

/// {law, samples, max_residual, mean_residual, worst_case, failures, ...extras}
nlohmann::ordered_json to_json(const LawReport& report);

/// |F(τ,α,β,a,b) - F(τ,γ,δ,F(γ,α,β,a,b),F(δ,α,β,a,b))|∞ over sampled tuples.
/// Draw order per sample: τ, (α, β), (γ, δ), a[n], b[n].
LawReport check_composition(const DependenceEvaluator& F, const SampleSpec& spec);

/// max(|F(α,α,β,a,b) - a|∞, |F(β,α,β,a,b) - b|∞). Draw order: (α, β), a[n], b[n].
LawReport check_boundary(const DependenceEvaluator& F, const SampleSpec& spec);

/// Off-diagonal |S(τ,α,β,a,v) - F(τ,α,β,a,a+v(β-α))|∞ as the residual; the
/// diagonal continuity maxima max|S(τ,α,α+ε,a,v) - S(τ,α,α,a,v)| for
/// ε = 1e-2, 1e-3, 1e-4 go to extras "diag_1e-2" .. "diag_1e-4", and
/// "diagonal_monotone" is 1 when they strictly decrease (or all lie below
/// 1e-12, which happens for S independent of β). Draw order: τ, (α, β), a[n], v[n].
LawReport check_extension(const DependenceEvaluator& F, const SampleSpec& spec);

/// Trajectory found by shooting on the integral condition directly (quadrature
/// mean of x' equal to v) versus the Neumann solve through b = a + v(β-α),
/// compared in x at 20 equispaced points of [α, β]. The 64-point
/// Gauss–Legendre mean of x' along the Neumann solution minus v goes to
/// extras "quadrature_max". Draw order: (α, β), a[n], v[n].
LawReport check_lemma1_equivalence(const SecondOrderOde& ode, const SampleSpec& spec,
                                   const ShootingConfig& cfg = {});

/// Relative Angelesco residual |res| / (|P1| + |P2|) over sampled members
/// drawn by `member`, at τ from spec.tau_range and Δ from `delta_range`.
LawReport check_angelesco(const std::function<ScalarFn(SplitMix64&)>& member,
                          const SampleSpec& spec, Range delta_range = {0.1, 0.5});

/// Members A cosh(kτ) + B sinh(kτ) - g/k² of x'' = k²x + g with A, B from
/// ab_range and (k, g) fixed.
std::function<ScalarFn(SplitMix64&)> conic_members(ConicParams p, Range ab_range);

namespace detail {

/// Accumulates per-sample residuals into a LawReport.
class Aggregator {
 public:
  explicit Aggregator(std::string law) { report_.law = std::move(law); }

  void add(double residual, std::vector<std::pair<std::string, Vec>> args);
  void fail() { ++report_.failures; ++report_.samples; }
  LawReport finish();

 private:
  LawReport report_;
  double sum_ = 0.0;
  int ok_ = 0;
};

/// (alpha, beta) drawn as pairs from alpha_beta_range until |alpha - beta| >= min_separation,
/// or alpha with beta = alpha + interval_length when that is set.
std::pair<double, double> draw_pair(SplitMix64& rng, const SampleSpec& spec);
Vec draw_vec(SplitMix64& rng, Range r, int n);

}  // namespace detail

}  // namespace febvp
