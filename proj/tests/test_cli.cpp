#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "febvp/cli.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = febvp::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json run_json(std::vector<std::string> args, int expected_code = 0) {
  args.push_back("--format");
  args.push_back("json");
  const Run r = run(std::move(args));
  CHECK_MESSAGE(r.code == expected_code, r.err);
  return json::parse(r.out);
}

json last_error(const Run& r) {
  const auto nl = r.err.find_last_of('\n', r.err.size() - 2);
  return json::parse(nl == std::string::npos ? r.err : r.err.substr(nl + 1));
}

}  // namespace

TEST_CASE("solve examples") {
  json j = run_json({"solve", "--catalog", "free_fall", "--param", "g=-9.8", "--neumann", "0", "1", "0",
                     "0", "--tau", "0.5"});
  CHECK(j["rows"][0]["x"][0].get<double>() == doctest::Approx(1.225).epsilon(1e-12));
  CHECK(j["conditions"]["kind"] == "neumann");

  j = run_json({"solve", "--catalog", "free_fall", "--param", "g=-9.8", "--cauchy", "0", "0", "1", "--tau",
                "1"});
  CHECK(j["rows"][0]["x"][0].get<double>() == doctest::Approx(-3.9).epsilon(1e-10));

  j = run_json({"solve", "--ode", "0", "--neumann", "0", "1", "2", "2", "--tau", "0.7"});
  CHECK(std::abs(j["rows"][0]["x"][0].get<double>() - 2.0) <= 1e-12);

  j = run_json({"solve", "--ode", "-x", "--integral", "0", "1", "0", "1", "--tau", "1", "--tau", "0.25",
                "--tau", "-0.5"});
  REQUIRE(j["rows"].size() == 3);
  CHECK(j["rows"][0]["tau"] == -0.5);
  CHECK(j["rows"][2]["tau"] == 1.0);
  CHECK(j["rows"][2]["x"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two-component solve") {
  const json j = run_json({"solve", "--ode", "0", "--ode", "-9.8", "--neumann", "0", "2", "0", "0", "10",
                           "0", "--tau", "1"});
  CHECK(j["dim"] == 2);
  CHECK(j["rows"][0]["x"][0].get<double>() == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(j["rows"][0]["x"][1].get<double>() == doctest::Approx(4.9).epsilon(1e-10));
}

TEST_CASE("table and csv output") {
  Run r = run({"solve", "--catalog", "linear_zero", "--neumann", "0", "1", "0", "1", "--tau", "0.5",
               "--tau", "0", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("tau,x,v\r\n0,0,1\r\n0.5,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);

  r = run({"solve", "--catalog", "linear_zero", "--neumann", "0", "1", "0", "1", "--tau", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("tau") != std::string::npos);
  CHECK(r.out.find("0.5") != std::string::npos);

  r = run({"verify", "--catalog", "free_fall", "--closed-form", "--samples", "10", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("law,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
}

TEST_CASE("solver failures exit 2 with a structured error") {
  const Run r = run({"solve", "--catalog", "oscillator", "--neumann", "0", "3.141592653589793", "0", "1",
                     "--tau", "1"});
  CHECK(r.code == febvp::cli::kExitNumeric);
  const json e = last_error(r);
  CHECK(e["code"] == "ConjugatePoint");
  CHECK(e.contains("message"));
  CHECK(e.contains("context"));
  CHECK(r.out.empty());

  const Run again = run({"solve", "--catalog", "oscillator", "--neumann", "0", "3.141592653589793", "0",
                         "1", "--tau", "1"});
  CHECK(again.err == r.err);

  const Run slow = run({"solve", "--ode", "1.5*x^2", "--neumann", "0", "0.5", "1", "0.64", "--max-iters",
                        "1", "--tau", "0"});
  CHECK(slow.code == febvp::cli::kExitNumeric);
  CHECK(last_error(slow)["code"] == "NoConvergence");
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == febvp::cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == febvp::cli::kExitUsage);
  CHECK(run({"solve", "--catalog", "free_fall", "--tau", "1"}).code == 1);
  CHECK(run({"solve", "--catalog", "free_fall", "--neumann", "0", "1", "0", "0", "--cauchy", "0", "0", "1"})
            .code == 1);
  CHECK(run({"solve", "--catalog", "nope", "--neumann", "0", "1", "0", "0"}).code == 1);
  CHECK(run({"solve", "--catalog", "conic", "--param", "q=1", "--neumann", "0", "1", "0", "0"}).code == 1);
  CHECK(run({"solve", "--catalog", "conic", "--ode", "x", "--neumann", "0", "1", "0", "0"}).code == 1);
  CHECK(run({"solve", "--ode", "x", "--neumann", "0", "1", "0"}).code == 1);
  CHECK(run({"solve", "--ode", "x", "--neumann", "0", "0", "0", "1"}).code == 1);
  CHECK(run({"solve", "--ode", "x", "--neumann", "0", "1", "0", "1", "--format", "xml"}).code == 1);
  CHECK(run({"solve", "--ode", "x", "--neumann", "0", "1", "0", "1", "--newton-tol", "-1"}).code == 1);

  const Run unknown = run({"verify", "--catalog", "free_fall", "--laws", "composition,bogus"});
  CHECK(unknown.code == 1);
  CHECK(last_error(unknown)["message"].get<std::string>().find("bogus") != std::string::npos);

  const Run parse = run({"solve", "--ode", "x +* 2", "--neumann", "0", "1", "0", "1"});
  CHECK(parse.code == 1);
  const json e = last_error(parse);
  CHECK(e["code"] == "ParseError");
  CHECK(e["message"].get<std::string>().find("position 3") != std::string::npos);
  CHECK(e["context"] == "ode[0] position 3");
}

TEST_CASE("help exits 0") {
  const Run r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("solve") != std::string::npos);
}

TEST_CASE("verify examples") {
  json j = run_json({"verify", "--catalog", "free_fall", "--param", "g=-9.8", "--closed-form", "--laws",
                     "composition", "--samples", "500", "--seed", "42"});
  REQUIRE(j.is_array());
  CHECK(j[0]["law"] == "composition");
  CHECK(j[0]["samples"] == 500);
  CHECK(j[0]["max_residual"].get<double>() <= 1e-12);
  CHECK(j[0]["passed"] == true);

  j = run_json({"verify", "--catalog", "oscillator", "--laws", "composition", "--samples", "50", "--length",
                "3.141592653589793", "--alpha-beta-range", "-1", "1"},
               2);
  CHECK(j[0]["failures"].get<int>() > 0);
  CHECK(j[0]["passed"] == false);

  j = run_json({"verify", "--laws", "klapka,jensen", "--connection", "flat", "--samples", "50"});
  CHECK(j[0]["max_residual"].get<double>() <= 1e-12);
  CHECK(j[1]["max_residual"].get<double>() <= 1e-12);

  j = run_json({"verify", "--catalog", "conic", "--param", "k=2", "--param", "g=1", "--closed-form", "--laws",
                "angelesco,boundary,extension", "--samples", "50"});
  CHECK(j.size() == 3);
  for (const auto& r : j) CHECK(r["passed"] == true);

  // A threshold below what the law achieves turns the run into a failure.
  j = run_json({"verify", "--catalog", "conic", "--laws", "composition", "--samples", "20", "--threshold",
                "composition=1e-300"},
               2);
  CHECK(j[0]["threshold"] == 1e-300);
}

TEST_CASE("same seed gives byte-identical json") {
  const std::vector<std::string> args = {"verify", "--catalog", "conic", "--param", "k=0.5",
                                         "--laws", "composition,boundary,extension,lemma1",
                                         "--samples", "30", "--seed", "7", "--format", "json"};
  const Run a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  std::vector<std::string> other = args;
  other[other.size() - 3] = "8";
  CHECK(run(other).out != a.out);
}

TEST_CASE("seed from the environment") {
  const std::vector<std::string> base = {"verify", "--catalog", "conic", "--closed-form", "--laws",
                                         "boundary", "--samples", "5", "--format", "json"};
  std::vector<std::string> seeded = base;
  seeded.insert(seeded.end(), {"--seed", "1234"});
  const std::string with_flag = run(seeded).out;

  ::setenv("FEBVP_SEED", "1234", 1);
  const std::string with_env = run(base).out;
  ::setenv("FEBVP_SEED", "oops", 1);
  const int bad = run(base).code;
  ::unsetenv("FEBVP_SEED");

  CHECK(with_env == with_flag);
  CHECK(run(base).out != with_flag);
  CHECK(bad == 1);
}

TEST_CASE("config file with flag overrides") {
  const std::string path = "febvp_cli_test_config.json";
  {
    std::ofstream f(path);
    f << R"({"ode": {"catalog": "free_fall", "params": {"g": -9.8}},
             "conditions": {"neumann": [0, 1, 0, 0]},
             "tolerances": {"newton_tol": 1e-11},
             "output_format": "json"})";
  }
  json j = json::parse(run({"solve", "--config", path, "--tau", "0.5"}).out);
  CHECK(j["rows"][0]["x"][0].get<double>() == doctest::Approx(1.225).epsilon(1e-12));

  j = json::parse(run({"solve", "--config", path, "--tau", "0.5", "--param", "g=-2"}).out);
  CHECK(j["rows"][0]["x"][0].get<double>() == doctest::Approx(0.25).epsilon(1e-12));

  const Run csv = run({"solve", "--config", path, "--tau", "0.5", "--format", "csv"});
  CHECK(csv.out.rfind("tau,x,v", 0) == 0);

  {
    std::ofstream f(path);
    f << R"({"ode": {"catalog": "free_fall"}, "bogus": 1})";
  }
  CHECK(run({"solve", "--config", path, "--neumann", "0", "1", "0", "0"}).code == 1);
  {
    std::ofstream f(path);
    f << R"({"ode": )";
  }
  CHECK(run({"solve", "--config", path, "--neumann", "0", "1", "0", "0"}).code == 1);
  std::remove(path.c_str());
  CHECK(run({"solve", "--config", path, "--neumann", "0", "1", "0", "0"}).code == 1);
}

TEST_CASE("reconstruct examples") {
  json j = run_json({"reconstruct", "--catalog", "free_fall", "--param", "g=-9.8", "--point", "0.3", "0.5",
                     "-1", "--point", "-0.7", "2", "0.25"});
  for (const auto& row : j["rows"])
    CHECK(std::abs(row["f_reconstructed"][0].get<double>() + 9.8) <= 1e-6);

  j = run_json({"reconstruct", "--catalog", "linear_zero", "--point", "0.1", "0.2", "0.3"});
  CHECK(std::abs(j["rows"][0]["f_reconstructed"][0].get<double>()) <= 1e-8);

  j = run_json({"reconstruct", "--catalog", "conic", "--param", "k=1", "--param", "g=0", "--point", "0", "2",
                "0"});
  CHECK(std::abs(j["rows"][0]["f_reconstructed"][0].get<double>() - 2.0) <= 1e-4);
  CHECK(j["rows"][0].contains("f_true"));

  j = run_json({"reconstruct", "--catalog", "conic", "--closed-form", "--point", "0", "2", "0"});
  CHECK(j["max_abs_err"].get<double>() <= 1e-8);

  j = run_json({"reconstruct", "--ode", "tau*v - x", "--point", "0.5", "1", "2"});
  CHECK_FALSE(j["rows"][0].contains("f_true"));
  CHECK(j["rows"][0]["f_reconstructed"][0].get<double>() == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("geodesic") {
  const json j = run_json({"geodesic", "--connection", "half_plane", "--a", "-0.3", "1", "--b", "0.3", "1"});
  REQUIRE(j["rows"].size() == 3);
  for (const auto& row : j["rows"]) CHECK(row["abs_err"].get<double>() <= 1e-6);
  CHECK(j["rows"][1]["G"][1].get<double>() == doctest::Approx(1.044030650891055015).epsilon(1e-9));

  const json flat = run_json({"geodesic", "--a", "0", "0", "--b", "2", "4", "--rho", "0.5"});
  CHECK(flat["rows"][0]["G"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat["rows"][0]["G"][1].get<double>() == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(run({"geodesic", "--connection", "half_plane", "--a", "0", "-1", "--b", "0", "1"}).code == 1);
  CHECK(run({"geodesic", "--connection", "sphere", "--a", "0", "1", "--b", "0", "1"}).code == 1);
}
