// Command-line front end: one subcommand per experiment mode.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apnn/config.hpp"
#include "apnn/errors.hpp"
#include "apnn/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  long long seed = -1;
  std::vector<std::string> overrides;
  bool print_config = false;
};

int run_mode(const std::string& mode, const Flags& f) {
  std::vector<std::string> ov = f.overrides;
  ov.push_back("mode=\"" + mode + "\"");
  if (!f.out.empty()) ov.push_back("out=\"" + f.out + "\"");
  if (f.seed >= 0) ov.push_back("seed=" + std::to_string(f.seed));
  apnn::ExperimentConfig cfg;
  try {
    cfg = apnn::load_config(f.config, ov);
  } catch (const apnn::ConfigError& e) {
    std::cerr << "config error at '" << e.key() << "': " << e.what() << '\n';
    apnn::write_error_record(f.out.empty() ? "out" : f.out, e.kind(), e.key(), e.what());
    return 2;
  }
  if (f.print_config) {
    std::cout << cfg.to_json().dump(2) << '\n';
    return 0;
  }
  const apnn::RunResult r = apnn::run_experiment(cfg);
  if (r.exit_code == 0) {
    std::cout << r.summary.dump(2) << '\n';
  } else {
    std::cerr << r.summary.dump(2) << '\n';
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic-preserving neural solver for the stochastic linearized Boltzmann equation"};
  app.require_subcommand(1);
  Flags f;
  const char* help[] = {"train the micro-macro networks",
                        "run the IMEX reference solver",
                        "check the collision operator (symmetry, kernel, gap)",
                        "compare the solver with the acoustic limit over a range of eps",
                        "loss versus error over training checkpoints",
                        "velocity tails of the reference solution"};
  const auto& modes = apnn::experiment_modes();
  std::string chosen;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    CLI::App* sub = app.add_subcommand(modes[i], help[i]);
    sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "random seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--override", f.overrides, "key=value (dotted keys, JSON values)")->take_all();
    sub->add_flag("--print-config", f.print_config, "print the resolved config and exit");
    sub->callback([&, m = modes[i]] { chosen = m; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return run_mode(chosen, f);
}
