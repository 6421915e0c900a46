#include "febvp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"

#include "febvp/catalog.hpp"
#include "febvp/error.hpp"
#include "febvp/expr.hpp"
#include "febvp/geodesics.hpp"
#include "febvp/laws.hpp"
#include "febvp/reconstruction.hpp"
#include "febvp/shooting.hpp"

namespace febvp::cli {
namespace {

using json = nlohmann::ordered_json;

/// Bad flags, config contents or flag combinations (exit code 1).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& message, std::string context = {},
                      std::string code = "Usage")
      : std::runtime_error(message), context_(std::move(context)), code_(std::move(code)) {}
  const std::string& context() const noexcept { return context_; }
  const std::string& code() const noexcept { return code_; }

 private:
  std::string context_;
  std::string code_;
};

enum class Format { Table, Json, Csv };

Format parse_format(const std::string& s) {
  if (s == "table") return Format::Table;
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw UsageError("unknown output format '" + s + "' (expected table, json or csv)", "format");
}

struct RunConfig {
  std::optional<std::string> catalog;
  std::map<std::string, double> params;
  std::vector<std::string> expressions;
  // Flat condition lists: alpha beta a.. b.. / alpha beta a.. v.. / alpha a.. v..
  std::vector<double> neumann;
  std::vector<double> integral;
  std::vector<double> cauchy;
  SampleSpec sampling;
  ShootingConfig tolerances;
  Format format = Format::Table;
  std::uint64_t seed = 42;
};

/// Raw flag storage shared by all subcommands; only the parsed one is read.
struct Flags {
  std::string config;
  std::string catalog;
  std::vector<std::string> params;
  std::vector<std::string> odes;
  std::string format;
  std::uint64_t seed = 0;
  double newton_tol = 0, rel_tol = 0, abs_tol = 0;
  int max_iters = 0;

  std::vector<double> neumann, integral, cauchy, taus;

  std::vector<std::string> laws;
  bool closed_form = false;
  int samples = 0;
  std::vector<double> tau_range, ab_range, alpha_beta_range;
  double min_separation = 0, length = 0;
  std::string connection = "flat";
  int dim = 2;
  std::vector<std::string> thresholds;

  std::vector<std::vector<double>> points;
  double fd_step = 1e-3;
  bool no_richardson = false;
  double tolerance = 0;

  std::vector<double> a, b, rho;
};

bool given(const CLI::App* app, const std::string& name) {
  const CLI::Option* opt = app->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw UsageError(what + ": '" + std::string(text) + "' is not a finite number", what);
  return value;
}

std::pair<std::string, double> parse_assignment(const std::string& text, const std::string& flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError(flag + " expects name=value, got '" + text + "'", flag);
  return {text.substr(0, eq), parse_double(std::string_view(text).substr(eq + 1), flag)};
}

std::uint64_t default_seed() {
  const char* env = std::getenv("FEBVP_SEED");
  if (env == nullptr || *env == '\0') return 42;
  std::uint64_t seed = 0;
  const std::string_view s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError("FEBVP_SEED must be an unsigned integer, got '" + std::string(s) + "'",
                     "FEBVP_SEED");
  return seed;
}

// ---- config file -----------------------------------------------------------

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw UsageError(where + ": " + e.what(), where);
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be an object", where);
  for (const auto& item : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return item.key() == k; }))
      throw UsageError("unknown key '" + item.key() + "' in " + where, where + "." + item.key());
  }
}

Range get_range(const json& j, const std::string& where) {
  const auto v = get_as<std::vector<double>>(j, where);
  if (v.size() != 2) throw UsageError(where + " must be [lo, hi]", where);
  return Range{v[0], v[1]};
}

void apply_config(const json& j, RunConfig& cfg) {
  check_keys(j, {"ode", "conditions", "sampling", "tolerances", "output_format", "seed"}, "config");
  if (j.contains("ode")) {
    const json& o = j["ode"];
    check_keys(o, {"catalog", "expressions", "params"}, "ode");
    if (o.contains("catalog")) cfg.catalog = get_as<std::string>(o["catalog"], "ode.catalog");
    if (o.contains("expressions"))
      cfg.expressions = get_as<std::vector<std::string>>(o["expressions"], "ode.expressions");
    if (o.contains("params"))
      cfg.params = get_as<std::map<std::string, double>>(o["params"], "ode.params");
  }
  if (j.contains("conditions")) {
    const json& c = j["conditions"];
    check_keys(c, {"neumann", "integral", "cauchy"}, "conditions");
    if (c.contains("neumann")) cfg.neumann = get_as<std::vector<double>>(c["neumann"], "conditions.neumann");
    if (c.contains("integral"))
      cfg.integral = get_as<std::vector<double>>(c["integral"], "conditions.integral");
    if (c.contains("cauchy")) cfg.cauchy = get_as<std::vector<double>>(c["cauchy"], "conditions.cauchy");
  }
  if (j.contains("sampling")) {
    const json& s = j["sampling"];
    check_keys(s, {"count", "tau_range", "ab_range", "alpha_beta_range", "min_separation",
                   "interval_length"},
               "sampling");
    SampleSpec& spec = cfg.sampling;
    if (s.contains("count")) spec.count = get_as<int>(s["count"], "sampling.count");
    if (s.contains("tau_range")) spec.tau_range = get_range(s["tau_range"], "sampling.tau_range");
    if (s.contains("ab_range")) spec.ab_range = get_range(s["ab_range"], "sampling.ab_range");
    if (s.contains("alpha_beta_range"))
      spec.alpha_beta_range = get_range(s["alpha_beta_range"], "sampling.alpha_beta_range");
    if (s.contains("min_separation"))
      spec.min_separation = get_as<double>(s["min_separation"], "sampling.min_separation");
    if (s.contains("interval_length"))
      spec.interval_length = get_as<double>(s["interval_length"], "sampling.interval_length");
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    check_keys(t, {"newton_tol", "max_newton_iters", "jacobian_fd_step", "rel_tol", "abs_tol",
                   "h_init", "h_min", "max_steps"},
               "tolerances");
    ShootingConfig& sc = cfg.tolerances;
    auto num = [&](const char* key, auto& field) {
      if (t.contains(key))
        field = get_as<std::decay_t<decltype(field)>>(t[key], std::string("tolerances.") + key);
    };
    num("newton_tol", sc.newton_tol);
    num("max_newton_iters", sc.max_newton_iters);
    num("jacobian_fd_step", sc.jacobian_fd_step);
    num("rel_tol", sc.integrator.rel_tol);
    num("abs_tol", sc.integrator.abs_tol);
    num("h_init", sc.integrator.h_init);
    num("h_min", sc.integrator.h_min);
    num("max_steps", sc.integrator.max_steps);
  }
  if (j.contains("output_format"))
    cfg.format = parse_format(get_as<std::string>(j["output_format"], "output_format"));
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j["seed"], "seed");
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'", path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what(),
                     path + ": byte " + std::to_string(e.byte));
  }
  apply_config(j, cfg);
}

RunConfig resolve(const CLI::App* sub, const Flags& f) {
  RunConfig cfg;
  cfg.seed = default_seed();
  if (given(sub, "--config")) load_config_file(f.config, cfg);

  if (given(sub, "--catalog") && given(sub, "--ode"))
    throw UsageError("give either --catalog or --ode, not both", "ode_source");
  if (given(sub, "--catalog")) {
    cfg.catalog = f.catalog;
    cfg.expressions.clear();
  }
  if (given(sub, "--ode")) {
    cfg.expressions = f.odes;
    cfg.catalog.reset();
  }
  for (const auto& p : f.params) {
    auto [name, value] = parse_assignment(p, "--param");
    cfg.params[name] = value;
  }

  if (given(sub, "--neumann") || given(sub, "--integral") || given(sub, "--cauchy")) {
    cfg.neumann = f.neumann;
    cfg.integral = f.integral;
    cfg.cauchy = f.cauchy;
  }

  if (given(sub, "--format")) cfg.format = parse_format(f.format);
  if (given(sub, "--seed")) cfg.seed = f.seed;
  if (given(sub, "--newton-tol")) cfg.tolerances.newton_tol = f.newton_tol;
  if (given(sub, "--rel-tol")) cfg.tolerances.integrator.rel_tol = f.rel_tol;
  if (given(sub, "--abs-tol")) cfg.tolerances.integrator.abs_tol = f.abs_tol;
  if (given(sub, "--max-iters")) cfg.tolerances.max_newton_iters = f.max_iters;

  SampleSpec& spec = cfg.sampling;
  if (given(sub, "--samples")) spec.count = f.samples;
  if (given(sub, "--tau-range")) spec.tau_range = Range{f.tau_range[0], f.tau_range[1]};
  if (given(sub, "--ab-range")) spec.ab_range = Range{f.ab_range[0], f.ab_range[1]};
  if (given(sub, "--alpha-beta-range"))
    spec.alpha_beta_range = Range{f.alpha_beta_range[0], f.alpha_beta_range[1]};
  if (given(sub, "--min-separation")) spec.min_separation = f.min_separation;
  if (given(sub, "--length")) spec.interval_length = f.length;
  spec.seed = cfg.seed;

  if (cfg.catalog && !cfg.expressions.empty())
    throw UsageError("config gives both a catalog and expressions", "ode_source");
  try {
    cfg.tolerances.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("tolerances: ") + e.what(), "tolerances");
  }
  return cfg;
}

// ---- ode source and conditions ----------------------------------------------

struct OdeSource {
  SecondOrderOde ode;
  std::optional<CatalogEntry> entry;
};

OdeSource build_ode(const RunConfig& cfg) {
  OdeSource src;
  if (cfg.catalog) {
    src.entry = make_catalog_entry(*cfg.catalog, cfg.params);
    src.ode = src.entry->ode;
    return src;
  }
  if (cfg.expressions.empty())
    throw UsageError("no ode given: use --catalog NAME or --ode EXPR (one per component)",
                     "ode_source");
  const int dim = static_cast<int>(cfg.expressions.size());
  std::set<std::string> names;
  for (const auto& [name, value] : cfg.params) names.insert(name);
  for (std::size_t i = 0; i < cfg.expressions.size(); ++i) {
    try {
      (void)parse(cfg.expressions[i], dim, names);
    } catch (const ParseError& e) {
      const std::string& text = cfg.expressions[i];
      throw UsageError("ode component " + std::to_string(i) + ": " + e.what() + "\n  " + text +
                           "\n  " + std::string(e.position(), ' ') + "^",
                       "ode[" + std::to_string(i) + "] position " + std::to_string(e.position()),
                       "ParseError");
    }
  }
  src.ode = ode_from_expressions(cfg.expressions, cfg.params);
  return src;
}

Vec slice(const std::vector<double>& raw, std::size_t from, std::size_t n) {
  return Vec(raw.begin() + static_cast<std::ptrdiff_t>(from),
             raw.begin() + static_cast<std::ptrdiff_t>(from + n));
}

void check_count(const std::vector<double>& raw, std::size_t expected, const std::string& flag,
                 const std::string& layout) {
  if (raw.size() != expected)
    throw UsageError(flag + " expects " + std::to_string(expected) + " numbers (" + layout +
                         "), got " + std::to_string(raw.size()),
                     flag);
}

// ---- output -----------------------------------------------------------------

using Cell = std::variant<std::string, double, long long>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c, Format fmt) {
  if (const auto* s = std::get_if<std::string>(&c)) return fmt == Format::Csv ? csv_field(*s) : *s;
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const double d = std::get<double>(c);
  if (fmt == Format::Csv) return shortest(d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", d);
  return buf;
}

void write_table(const Table& t, Format fmt, std::ostream& out) {
  if (fmt == Format::Csv) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      out << (i ? "," : "") << csv_field(t.header[i]);
    out << "\r\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i], fmt);
      out << "\r\n";
    }
    return;
  }
  std::vector<std::vector<std::string>> text;
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
  for (const auto& row : t.rows) {
    auto& line = text.emplace_back();
    for (std::size_t i = 0; i < row.size(); ++i) {
      line.push_back(cell_text(row[i], fmt));
      width[i] = std::max(width[i], line.back().size());
    }
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << "  ";
      out << std::string(width[i] - cells[i].size(), ' ') << cells[i];
    }
    out << '\n';
  };
  emit(t.header);
  for (const auto& line : text) emit(line);
}

std::vector<std::string> component_names(const std::string& base, int dim) {
  if (dim == 1) return {base};
  std::vector<std::string> out;
  for (int i = 1; i <= dim; ++i) out.push_back(base + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& dst, const std::vector<std::string>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void append(std::vector<Cell>& dst, const Vec& v) {
  for (double e : v) dst.emplace_back(e);
}

void write_json(const json& j, std::ostream& out) {
  out << j.dump(2, ' ', false, json::error_handler_t::replace) << '\n';
}

// ---- solve ------------------------------------------------------------------

int cmd_solve(const RunConfig& cfg, std::vector<double> taus, std::ostream& out) {
  const int kinds = !cfg.neumann.empty() + !cfg.integral.empty() + !cfg.cauchy.empty();
  if (kinds != 1)
    throw UsageError("solve needs exactly one of --neumann, --integral or --cauchy", "conditions");
  const OdeSource src = build_ode(cfg);
  const auto n = static_cast<std::size_t>(src.ode.dim);

  ShootingResult result;
  json cond;
  double lo = 0.0, hi = 0.0;
  if (!cfg.neumann.empty()) {
    check_count(cfg.neumann, 2 + 2 * n, "--neumann", "alpha beta a.. b..");
    const NeumannConditions c{cfg.neumann[0], cfg.neumann[1], slice(cfg.neumann, 2, n),
                              slice(cfg.neumann, 2 + n, n)};
    result = solve_neumann(src.ode, c, cfg.tolerances);
    cond = {{"kind", "neumann"}, {"alpha", c.alpha}, {"beta", c.beta}, {"a", c.a}, {"b", c.b}};
    lo = c.alpha;
    hi = c.beta;
  } else if (!cfg.integral.empty()) {
    check_count(cfg.integral, 2 + 2 * n, "--integral", "alpha beta a.. v..");
    const IntegralConditions c{cfg.integral[0], cfg.integral[1], slice(cfg.integral, 2, n),
                               slice(cfg.integral, 2 + n, n)};
    result = solve_integral(src.ode, c, cfg.tolerances);
    cond = {{"kind", "integral"}, {"alpha", c.alpha}, {"beta", c.beta}, {"a", c.a}, {"v", c.v}};
    lo = c.alpha;
    hi = c.beta;
  } else {
    check_count(cfg.cauchy, 1 + 2 * n, "--cauchy", "alpha a.. v..");
    const IntegralConditions c{cfg.cauchy[0], cfg.cauchy[0], slice(cfg.cauchy, 1, n),
                               slice(cfg.cauchy, 1 + n, n)};
    result = solve_integral(src.ode, c, cfg.tolerances);
    cond = {{"kind", "cauchy"}, {"alpha", c.alpha}, {"a", c.a}, {"v", c.v}};
    lo = hi = c.alpha;
  }

  if (taus.empty()) taus = lo == hi ? std::vector<double>{lo} : std::vector<double>{lo, hi};
  for (double t : taus)
    if (!std::isfinite(t)) throw UsageError("--tau values must be finite", "--tau");
  std::stable_sort(taus.begin(), taus.end());

  std::vector<StatePoint> states;
  for (double t : taus) states.push_back(state_at(src.ode, result, t, cfg.tolerances.integrator));

  if (cfg.format == Format::Json) {
    json j;
    j["command"] = "solve";
    j["ode"] = src.ode.label;
    j["dim"] = src.ode.dim;
    j["conditions"] = cond;
    j["iterations"] = result.iterations;
    j["final_residual"] = result.final_residual;
    j["rows"] = json::array();
    for (const auto& s : states) j["rows"].push_back({{"tau", s.tau}, {"x", s.x}, {"v", s.v}});
    write_json(j, out);
    return kExitOk;
  }
  Table t;
  t.header = {"tau"};
  append(t.header, component_names("x", src.ode.dim));
  append(t.header, component_names("v", src.ode.dim));
  for (const auto& s : states) {
    auto& row = t.rows.emplace_back();
    row.emplace_back(s.tau);
    append(row, s.x);
    append(row, s.v);
  }
  write_table(t, cfg.format, out);
  return kExitOk;
}

// ---- verify -----------------------------------------------------------------

const std::vector<std::string>& known_laws() {
  static const std::vector<std::string> laws = {"composition", "boundary", "extension", "lemma1",
                                                "klapka",      "jensen",   "angelesco"};
  return laws;
}

bool is_known_law(const std::string& name) {
  const auto& laws = known_laws();
  return std::find(laws.begin(), laws.end(), name) != laws.end();
}

double default_threshold(const std::string& law, bool closed, const std::string& connection) {
  if (law == "composition") return closed ? 1e-10 : 1e-7;
  if (law == "boundary") return closed ? 1e-9 : 1e-8;
  if (law == "extension") return 1e-8;
  if (law == "lemma1") return 1e-9;
  if (law == "klapka") return connection == "flat" ? 1e-12 : 1e-6;
  if (law == "jensen") return 1e-12;
  return 1e-10;  // angelesco
}

Connection make_connection(const std::string& name, int dim) {
  if (name == "flat") return Connection::flat(dim);
  if (name == "half_plane") return Connection::half_plane();
  throw UsageError("unknown connection '" + name + "' (expected flat or half_plane)", "--connection");
}

std::function<ScalarFn(SplitMix64&)> angelesco_members(const OdeSource& src, Range ab_range) {
  if (!src.entry)
    throw UsageError("angelesco needs a catalog family (conic, free_fall, linear_zero, oscillator)",
                     "angelesco");
  const CatalogEntry& e = *src.entry;
  if (e.name == "conic") return conic_members({e.params.at("k"), e.params.at("g")}, ab_range);
  if (e.name == "free_fall") return conic_members({0.0, e.params.at("g")}, ab_range);
  if (e.name == "linear_zero") return conic_members({0.0, 0.0}, ab_range);
  return [ab_range](SplitMix64& rng) -> ScalarFn {
    const double A = rng.uniform(ab_range.lo, ab_range.hi);
    const double B = rng.uniform(ab_range.lo, ab_range.hi);
    return [A, B](double t) { return A * std::cos(t) + B * std::sin(t); };
  };
}

int cmd_verify(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  std::vector<std::string> laws = f.laws;
  if (laws.empty()) laws = {"composition", "boundary", "extension"};
  for (const auto& law : laws)
    if (!is_known_law(law)) throw UsageError("unknown law '" + law + "'", "--laws");

  std::map<std::string, double> overrides;
  for (const auto& t : f.thresholds) {
    auto [law, value] = parse_assignment(t, "--threshold");
    if (!is_known_law(law)) throw UsageError("unknown law '" + law + "' in --threshold", "--threshold");
    overrides[law] = value;
  }
  const std::string connection = f.connection;
  const int conn_dim = f.dim;

  std::optional<OdeSource> src;
  auto source = [&]() -> const OdeSource& {
    if (!src) src = build_ode(cfg);
    return *src;
  };
  std::optional<DependenceEvaluator> evaluator;
  auto dependence = [&]() -> const DependenceEvaluator& {
    if (evaluator) return *evaluator;
    if (f.closed_form) {
      const OdeSource& s = source();
      if (!s.entry || !s.entry->closed_F)
        throw UsageError("--closed-form needs a catalog family with a closed form", "--closed-form");
      evaluator = closed_form_evaluator(*s.entry);
    } else {
      evaluator = numeric_evaluator(source().ode, cfg.tolerances);
    }
    return *evaluator;
  };
  std::optional<GeodesicMap> gmap;
  auto geodesics = [&]() -> const GeodesicMap& {
    if (!gmap) {
      Connection conn = make_connection(connection, conn_dim);
      check_symmetric(conn);
      gmap.emplace(std::move(conn), cfg.tolerances);
    }
    return *gmap;
  };

  json reports = json::array();
  Table table;
  table.header = {"law", "samples", "failures", "max_residual", "mean_residual", "threshold", "status"};
  bool all_passed = true;
  for (const auto& law : laws) {
    LawReport r;
    if (law == "composition") r = check_composition(dependence(), cfg.sampling);
    else if (law == "boundary") r = check_boundary(dependence(), cfg.sampling);
    else if (law == "extension") r = check_extension(dependence(), cfg.sampling);
    else if (law == "lemma1") r = check_lemma1_equivalence(source().ode, cfg.sampling, cfg.tolerances);
    else if (law == "klapka") r = check_klapka(geodesics(), cfg.sampling);
    else if (law == "jensen") r = jensen_midpoint_check(geodesics(), cfg.sampling);
    else r = check_angelesco(angelesco_members(source(), cfg.sampling.ab_range), cfg.sampling);

    const auto it = overrides.find(law);
    const double threshold =
        it != overrides.end() ? it->second : default_threshold(law, f.closed_form, connection);
    bool passed = r.failures == 0 && r.max_residual <= threshold;
    if (law == "extension") passed = passed && r.extra("diagonal_monotone") == 1.0;
    if (law == "lemma1") passed = passed && r.extra("quadrature_max") <= 1e-8;
    all_passed = all_passed && passed;

    json j = to_json(r);
    j["threshold"] = threshold;
    j["passed"] = passed;
    reports.push_back(std::move(j));
    table.rows.push_back({r.law, static_cast<long long>(r.samples),
                          static_cast<long long>(r.failures), r.max_residual, r.mean_residual,
                          threshold, std::string(passed ? "pass" : "FAIL")});
  }
  if (cfg.format == Format::Json) write_json(reports, out);
  else write_table(table, cfg.format, out);
  return all_passed ? kExitOk : kExitNumeric;
}

// ---- reconstruct --------------------------------------------------------------

int cmd_reconstruct(const RunConfig& cfg, const Flags& f, const CLI::App* sub, std::ostream& out) {
  if (f.points.empty()) throw UsageError("reconstruct needs at least one --point tau x.. v..", "--point");
  const OdeSource src = build_ode(cfg);
  const auto n = static_cast<std::size_t>(src.ode.dim);

  ReconstructionConfig rc;
  rc.fd_step = f.fd_step;
  rc.richardson = !f.no_richardson;
  DependenceFn S;
  if (f.closed_form) {
    if (!src.entry || !src.entry->closed_S)
      throw UsageError("--closed-form needs a catalog family with a closed form", "--closed-form");
    S = src.entry->closed_S;
  } else {
    auto ev = std::make_shared<ShootingEvaluator>(src.ode, cfg.tolerances);
    S = [ev](double tau, double alpha, double beta, const Vec& a, const Vec& v) {
      return ev->S(tau, alpha, beta, a, v);
    };
    rc.solver_tol = std::max(cfg.tolerances.newton_tol, cfg.tolerances.integrator.rel_tol);
  }
  try {
    rc.validate();
  } catch (const Error& e) {
    throw UsageError(e.what(), "--fd-step");
  }
  const double threshold = given(sub, "--threshold") ? f.tolerance : (f.closed_form ? 1e-8 : 1e-4);
  const bool has_truth = src.entry.has_value();

  struct Row {
    double tau;
    Vec x, v, f, truth;
    double err = 0.0;
  };
  std::vector<Row> rows;
  double max_err = 0.0;
  for (std::size_t p = 0; p < f.points.size(); ++p) {
    const auto& raw = f.points[p];
    check_count(raw, 1 + 2 * n, "--point", "tau x.. v..");
    Row row{raw[0], slice(raw, 1, n), slice(raw, 1 + n, n), {}, {}};
    row.f = reconstruct_f(S, row.tau, row.x, row.v, rc);
    if (has_truth) {
      row.truth = src.ode(row.tau, row.x, row.v);
      row.err = inf_dist(row.f, row.truth);
      max_err = std::max(max_err, row.err);
    }
    rows.push_back(std::move(row));
  }
  const bool passed = !has_truth || max_err <= threshold;

  if (cfg.format == Format::Json) {
    json j;
    j["command"] = "reconstruct";
    j["ode"] = src.ode.label;
    j["step"] = rc.effective_step();
    j["richardson"] = rc.richardson;
    j["rows"] = json::array();
    for (const auto& r : rows) {
      json jr = {{"tau", r.tau}, {"x", r.x}, {"v", r.v}, {"f_reconstructed", r.f}};
      if (has_truth) {
        jr["f_true"] = r.truth;
        jr["abs_err"] = r.err;
      }
      j["rows"].push_back(std::move(jr));
    }
    if (has_truth) {
      j["max_abs_err"] = max_err;
      j["threshold"] = threshold;
      j["passed"] = passed;
    }
    write_json(j, out);
  } else {
    Table t;
    t.header = {"tau"};
    append(t.header, component_names("x", src.ode.dim));
    append(t.header, component_names("v", src.ode.dim));
    append(t.header, component_names("f_reconstructed", src.ode.dim));
    if (has_truth) {
      append(t.header, component_names("f_true", src.ode.dim));
      t.header.push_back("abs_err");
    }
    for (const auto& r : rows) {
      auto& cells = t.rows.emplace_back();
      cells.emplace_back(r.tau);
      append(cells, r.x);
      append(cells, r.v);
      append(cells, r.f);
      if (has_truth) {
        append(cells, r.truth);
        cells.emplace_back(r.err);
      }
    }
    write_table(t, cfg.format, out);
  }
  return passed ? kExitOk : kExitNumeric;
}

// ---- geodesic -----------------------------------------------------------------

int cmd_geodesic(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  Connection conn = make_connection(f.connection, f.dim);
  check_symmetric(conn);
  const auto n = static_cast<std::size_t>(conn.dim);
  if (f.a.size() != n || f.b.size() != n)
    throw UsageError("--a and --b need " + std::to_string(n) + " coordinates each", "--a/--b");
  if (conn.label == "half_plane" && !(f.a[1] > 0 && f.b[1] > 0))
    throw UsageError("half-plane points need a positive second coordinate", "--a/--b");
  const std::string label = conn.label;
  const GeodesicMap gmap(std::move(conn), cfg.tolerances);

  std::vector<double> rhos = f.rho.empty() ? std::vector<double>{0.0, 0.5, 1.0} : f.rho;
  std::stable_sort(rhos.begin(), rhos.end());

  auto oracle = [&](double rho) {
    if (label == "half_plane") return half_plane_geodesic(f.a, f.b, rho);
    Vec p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = (1.0 - rho) * f.a[i] + rho * f.b[i];
    return p;
  };

  json rows = json::array();
  Table t;
  t.header = {"rho"};
  append(t.header, component_names("G", conn.dim));
  append(t.header, component_names("oracle", conn.dim));
  t.header.push_back("abs_err");
  for (double rho : rhos) {
    if (!std::isfinite(rho)) throw UsageError("--rho values must be finite", "--rho");
    const Vec g = gmap(f.a, f.b, rho);
    const Vec o = oracle(rho);
    const double err = inf_dist(g, o);
    rows.push_back({{"rho", rho}, {"G", g}, {"oracle", o}, {"abs_err", err}});
    auto& cells = t.rows.emplace_back();
    cells.emplace_back(rho);
    append(cells, g);
    append(cells, o);
    cells.emplace_back(err);
  }
  if (cfg.format == Format::Json) {
    json j;
    j["command"] = "geodesic";
    j["connection"] = label;
    j["a"] = f.a;
    j["b"] = f.b;
    j["rows"] = std::move(rows);
    write_json(j, out);
  } else {
    write_table(t, cfg.format, out);
  }
  return kExitOk;
}

// ---- flags ----------------------------------------------------------------------

void add_common(CLI::App* sub, Flags& f, bool ode_source) {
  sub->add_option("--config", f.config, "JSON config file; flags override its values");
  sub->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  sub->add_option("--seed", f.seed, "Sampling seed (default: $FEBVP_SEED or 42)");
  sub->add_option("--newton-tol", f.newton_tol, "Shooting residual tolerance");
  sub->add_option("--rel-tol", f.rel_tol, "Integrator relative tolerance");
  sub->add_option("--abs-tol", f.abs_tol, "Integrator absolute tolerance");
  sub->add_option("--max-iters", f.max_iters, "Newton iteration limit");
  if (ode_source) {
    sub->add_option("--catalog", f.catalog, "Catalog family: free_fall, conic, linear_basis, oscillator, linear_zero");
    sub->add_option("--param", f.params, "Parameter name=value (repeatable)");
    sub->add_option("--ode", f.odes, "Right-hand side expression, one per component (repeatable)");
  }
}

constexpr int kUnbounded = CLI::detail::expected_max_vector_size;

void report_error(std::ostream& err, std::string_view code, const std::string& message,
                  const std::string& context) {
  json j;
  j["code"] = code;
  j["message"] = message;
  j["context"] = context;
  err << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-point boundary value solver and functional law checker", "febvp"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* solve = app.add_subcommand("solve", "Solve a boundary or initial value problem");
  add_common(solve, f, true);
  solve->add_option("--neumann", f.neumann, "alpha beta a.. b..")->expected(4, kUnbounded);
  solve->add_option("--integral", f.integral, "alpha beta a.. v..")->expected(4, kUnbounded);
  solve->add_option("--cauchy", f.cauchy, "alpha a.. v..")->expected(3, kUnbounded);
  solve->add_option("--tau", f.taus, "Output points (repeatable)");

  CLI::App* verify = app.add_subcommand("verify", "Check functional laws on sampled data");
  add_common(verify, f, true);
  verify->add_option("--laws", f.laws, "composition, boundary, extension, lemma1, klapka, jensen, angelesco")
      ->delimiter(',');
  verify->add_flag("--closed-form", f.closed_form, "Use the catalog closed form instead of shooting");
  verify->add_option("--samples", f.samples, "Samples per law");
  verify->add_option("--tau-range", f.tau_range, "lo hi")->expected(2);
  verify->add_option("--ab-range", f.ab_range, "lo hi")->expected(2);
  verify->add_option("--alpha-beta-range", f.alpha_beta_range, "lo hi")->expected(2);
  verify->add_option("--min-separation", f.min_separation, "Minimum |beta - alpha|");
  verify->add_option("--length", f.length, "Fixed beta - alpha");
  verify->add_option("--connection", f.connection, "flat or half_plane (klapka, jensen)");
  verify->add_option("--dim", f.dim, "Dimension of the flat connection");
  verify->add_option("--threshold", f.thresholds, "Per-law threshold law=value (repeatable)");

  CLI::App* reconstruct = app.add_subcommand("reconstruct", "Recover the right-hand side from S");
  add_common(reconstruct, f, true);
  reconstruct->add_option("--point", f.points, "tau x.. v.. (repeatable)")->expected(3, kUnbounded);
  reconstruct->add_flag("--closed-form", f.closed_form, "Differentiate the catalog closed form");
  reconstruct->add_option("--fd-step", f.fd_step, "Finite difference step");
  reconstruct->add_flag("--no-richardson", f.no_richardson, "Skip Richardson extrapolation");
  reconstruct->add_option("--threshold", f.tolerance, "Largest accepted abs_err");

  CLI::App* geodesic = app.add_subcommand("geodesic", "Evaluate G(a, b, rho) by shooting");
  add_common(geodesic, f, false);
  geodesic->add_option("--connection", f.connection, "flat or half_plane");
  geodesic->add_option("--dim", f.dim, "Dimension of the flat connection");
  geodesic->add_option("--a", f.a, "Start point")->expected(1, kUnbounded)->required();
  geodesic->add_option("--b", f.b, "End point")->expected(1, kUnbounded)->required();
  geodesic->add_option("--rho", f.rho, "Parameters to evaluate (repeatable)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "Usage", e.what(), e.get_name());
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(resolve(solve, f), f.taus, out);
    if (verify->parsed()) return cmd_verify(resolve(verify, f), f, out);
    if (reconstruct->parsed()) return cmd_reconstruct(resolve(reconstruct, f), f, reconstruct, out);
    return cmd_geodesic(resolve(geodesic, f), f, out);
  } catch (const UsageError& e) {
    report_error(err, e.code(), e.what(), e.context());
    return kExitUsage;
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what(), e.context());
    return e.is_numeric() ? kExitNumeric : kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, "Internal", e.what(), "");
    return kExitNumeric;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace febvp::cli
