#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gmb/gmb.hpp"

namespace {

namespace fs = std::filesystem;
using namespace gmb;
using namespace gmb::harness;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t reps = 0;
  std::string out = "out";
  std::size_t parallel = 1;
};

/// BANDIT_GM_SEED takes precedence over --seed.
std::optional<std::uint64_t> effective_seed(const CommonOptions& opts) {
  if (const char* env = std::getenv("BANDIT_GM_SEED"); env && *env) return parse_u64("BANDIT_GM_SEED", env);
  return opts.seed;
}

std::vector<ExperimentConfig> configs_for(const CommonOptions& opts, bool allow_default_grid) {
  std::vector<ExperimentConfig> configs;
  if (opts.config.empty()) {
    if (!allow_default_grid) throw InvalidConfig("--config is required");
    configs = parse_config(kNonContextualGrid);
  } else {
    if (!fs::exists(opts.config)) throw IoError("config file '" + opts.config + "' does not exist");
    configs = load_config(opts.config);
  }
  const auto seed = effective_seed(opts);
  for (ExperimentConfig& c : configs) {
    if (seed) c.seed = *seed;
    if (opts.reps > 0) c.repetitions = opts.reps;
  }
  return configs;
}

void print_summary(const ExperimentResult& result) {
  std::cout << result.config.name << " (" << result.config.repetitions << " reps, T=" << result.config.horizon
            << ", final mean accumulated " << (result.regret ? "regret" : "reward") << ")\n";
  for (const AggregateSeries& s : result.series) {
    std::cout << "  " << std::left << std::setw(18) << s.label << std::right << std::setw(12) << std::fixed
              << std::setprecision(2) << s.mean.back() << "  [" << s.lo.back() << ", " << s.hi.back() << "]\n";
  }
}

int cmd_run(const CommonOptions& opts) {
  const auto configs = configs_for(opts, false);
  if (configs.size() != 1) throw InvalidConfig("config describes a grid of " + std::to_string(configs.size()) +
                                               " experiments; use `sweep`");
  const ExperimentResult result = run_experiment(configs.front(), opts.parallel);
  export_result(result, opts.out);
  print_summary(result);
  return 0;
}

int cmd_sweep(const CommonOptions& opts) {
  auto configs = configs_for(opts, true);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentResult result = run_experiment(configs[i], opts.parallel);
    export_result(result, opts.out);
    std::cout << '[' << (i + 1) << '/' << configs.size() << "] ";
    print_summary(result);
  }
  return 0;
}

int cmd_illustrate(const CommonOptions& opts) {
  const Illustration ill = illustrate(effective_seed(opts).value_or(0));
  export_illustration(ill, opts.out);
  std::cout << "expected reward per inference policy\n";
  for (const auto& [name, value] : ill.expected_reward) {
    std::cout << "  " << std::left << std::setw(12) << name << std::right << std::fixed << std::setprecision(4) << value
              << '\n';
  }
  std::cout << "  optimized lambda = " << ill.lambda << '\n';
  return 0;
}

int cmd_selftest(const CommonOptions& opts) {
  bool ok = true;
  for (const CheckResult& r : run_selftest(effective_seed(opts).value_or(0))) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward-conditioned bandit simulator with generalized marginalization"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", opts.config, "Experiment config file");
    sub->add_option("--seed", opts.seed, "Base seed (BANDIT_GM_SEED overrides)");
    sub->add_option("--reps", opts.reps, "Repetitions per policy (overrides the config)");
    sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
    sub->add_option("--parallel", opts.parallel, "Worker threads across repetitions")->capture_default_str();
  };
  CLI::App* run = app.add_subcommand("run", "Run a single experiment config");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "Run every cell of a config grid (default: the 27-cell grid)");
  add_common(sweep, true);
  CLI::App* ill = app.add_subcommand("illustrate", "Build inference policies from uniformly logged data");
  add_common(ill, false);
  CLI::App* self = app.add_subcommand("selftest", "Run the invariant suite");
  add_common(self, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(opts);
    if (*sweep) return cmd_sweep(opts);
    if (*ill) return cmd_illustrate(opts);
    if (*self) return cmd_selftest(opts);
  } catch (const gmb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
