#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "apnn/config.hpp"
#include "apnn/errors.hpp"
#include "apnn/runner.hpp"

using namespace apnn;
namespace fs = std::filesystem;

namespace {

std::string key_of(const nlohmann::json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults parse and describe the desk problem") {
  const ExperimentConfig c = parse_config(nlohmann::json::object());
  CHECK(c.grid.dim == 1);
  CHECK(c.K == 2);
  CHECK(c.backend == Backend::bgk);
  CHECK(c.eps == 1.0);
  CHECK(c.kernel.b1[0] == doctest::Approx(c.kernel.b0[0] / 20));
  CHECK(c.network.v_scale == c.grid.v_max);
}

TEST_CASE("config errors name the offending key") {
  using nlohmann::json;
  CHECK(key_of(json{{"grid", {{"nx", 3}}}}) == "grid.nx");
  CHECK(key_of(json{{"grid", {{"n_x", 2}}}}) == "grid.n_x");
  CHECK(key_of(json{{"eps", -1}}) == "eps");
  CHECK(key_of(json{{"mode", "fly"}}) == "mode");
  CHECK(key_of(json{{"backend", "lbm"}}) == "backend");
  CHECK(key_of(json{{"train", {{"lr", "fast"}}}}) == "train.lr");
  CHECK(key_of(json{{"kernel", {{"b1", {1.0}}}}}) == "kernel.b1");
  CHECK(key_of(json{{"typo", 1}}) == "typo");
  CHECK(key_of(json{{"collocation", {{"t_end", 0.0}}}}) == "collocation.t_end");
}

TEST_CASE("overrides and hashing") {
  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "grid.n_x=64");
  apply_override(j, "init.kind=fluid");
  apply_override(j, "ap.eps_list=[1, 0.5]");
  const ExperimentConfig c = parse_config(j);
  CHECK(c.grid.n_x == 64);
  CHECK(c.init.kind == "fluid");
  CHECK(c.ap.eps_list == std::vector<double>{1.0, 0.5});
  ExperimentConfig d = c;
  d.out = "elsewhere";
  CHECK(c.hash() == d.hash());
  d.seed = 99;
  CHECK(c.hash() != d.hash());
  CHECK(parse_config(nlohmann::json::parse(c.to_json().dump())).hash() == c.hash());
  CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
  CHECK(fnv1a("") == 1469598103934665603ull);
  CHECK(hex64(255) == "00000000000000ff");
}

TEST_CASE("loading from a file") {
  const fs::path p = fs::temp_directory_path() / "apnn_cfg.json";
  {
    std::ofstream f(p);
    f << R"({"mode": "solve", "grid": {"n_x": 32}})";
  }
  CHECK(load_config(p.string()).grid.n_x == 32);
  CHECK(load_config(p.string(), {"grid.n_x=16"}).grid.n_x == 16);
  {
    std::ofstream f(p);
    f << "{ not json";
  }
  CHECK_THROWS_AS(load_config(p.string()), ConfigError);
}

TEST_CASE("runner: success writes a manifest, failures an error record") {
  const fs::path out = fs::temp_directory_path() / "apnn_runner_test";
  fs::remove_all(out);
  ExperimentConfig c = load_config("", {"mode=verify-hypo", "out=\"" + out.string() + "\""});
  RunResult r = run_experiment(c);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "hypo_report.json"));
  CHECK(r.summary["hypo"]["lambda_gap"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));

  c = load_config("", {"mode=solve", "solver.dt=0.5", "out=\"" + out.string() + "\""});
  r = run_experiment(c);
  CHECK(r.exit_code == 1);
  std::ifstream f(out / "error.json");
  const auto e = nlohmann::json::parse(f);
  CHECK(e["kind"] == "CflViolation");
}

TEST_CASE("solve writes trajectory, Lyapunov and error tables") {
  const fs::path out = fs::temp_directory_path() / "apnn_runner_solve";
  fs::remove_all(out);
  const ExperimentConfig c =
      load_config("", {"mode=solve", "grid.n_x=32", "solver.t_end=0.1", "out=\"" + out.string() + "\""});
  const RunResult r = run_experiment(c);
  REQUIRE(r.exit_code == 0);
  for (const char* f : {"trajectory.csv", "lyapunov.csv", "ek.csv", "report.json", "config.json"})
    CHECK(fs::exists(out / f));
  CHECK(r.summary["lyapunov"]["non_increasing"].get<bool>());
}
