#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/neural/data.hpp"
#include "gmb/neural/layers.hpp"

namespace gmb::harness {

enum class EnvFamily { kBernoulli, kContextual, kCombinatorial };

struct EnvSpec {
  EnvFamily family = EnvFamily::kBernoulli;
  std::size_t arms = 10;
  double alpha = 1.0;
  double beta = 9.0;
  std::size_t context_dim = 20;
  double shift = 0.0;
  std::vector<std::size_t> slots = {2, 4, 6, 16, 32};
  std::size_t buffer = 100;
};

/// A policy entry such as "egreedy(0.1)", "ts(env)" or "rcp-submax".
struct PolicySpec {
  std::string label;
  std::string kind;
  std::string argument;
};

/// Settings for reward-conditioned policies and the neural baselines.
struct ModelSettings {
  double smoothing = 1.0;
  std::size_t latent_samples = 5;
  double q0 = 10.0;
  double q1 = 90.0;
  std::size_t hidden_width = 64;
  std::size_t latent_dim = 8;
  neural::InjectionMode injection = neural::InjectionMode::kMultiplicative;
  neural::TrainConfig train;
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvSpec env;
  std::vector<PolicySpec> policies;
  long horizon = 5000;
  std::size_t repetitions = 20;
  std::uint64_t seed = 0;
  ModelSettings model;

  void validate() const;
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InvalidConfig("key '" + key + "': expected a number, got '" + value + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidConfig("key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

inline PolicySpec parse_policy(const std::string& text) {
  PolicySpec spec;
  spec.label = trim(text);
  const auto open = spec.label.find('(');
  if (open == std::string::npos) {
    spec.kind = spec.label;
  } else {
    if (spec.label.back() != ')') throw InvalidConfig("malformed policy '" + spec.label + "'");
    spec.kind = trim(std::string_view(spec.label).substr(0, open));
    spec.argument = trim(std::string_view(spec.label).substr(open + 1, spec.label.size() - open - 2));
  }
  static const std::set<std::string> kKinds = {"random", "egreedy", "ucb1", "ts", "neural-ts",
                                               "rcp-optimized", "rcp-optimistic", "rcp-submax", "rcp-negative"};
  if (!kKinds.count(spec.kind)) throw InvalidConfig("unknown policy '" + spec.kind + "'");
  return spec;
}

/// Parses "a/b" into (a, b).
inline std::pair<double, double> parse_pair(const std::string& key, const std::string& value) {
  const auto slash = value.find('/');
  if (slash == std::string::npos) throw InvalidConfig("key '" + key + "': expected 'alpha/beta', got '" + value + "'");
  return {parse_double(key, trim(value.substr(0, slash))), parse_double(key, trim(value.substr(slash + 1)))};
}

/// Applies one key/value assignment.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto size = [&](const std::string& v) { return static_cast<std::size_t>(parse_u64(key, v)); };
  if (key == "name") {
    c.name = value;
  } else if (key == "env") {
    if (value == "bernoulli") c.env.family = EnvFamily::kBernoulli;
    else if (value == "contextual") c.env.family = EnvFamily::kContextual;
    else if (value == "combinatorial") c.env.family = EnvFamily::kCombinatorial;
    else throw InvalidConfig("unknown env family '" + value + "'");
  } else if (key == "arms") {
    c.env.arms = size(value);
  } else if (key == "prior") {
    std::tie(c.env.alpha, c.env.beta) = parse_pair(key, value);
  } else if (key == "alpha") {
    c.env.alpha = parse_double(key, value);
  } else if (key == "beta") {
    c.env.beta = parse_double(key, value);
  } else if (key == "context_dim") {
    c.env.context_dim = size(value);
  } else if (key == "shift") {
    c.env.shift = parse_double(key, value);
  } else if (key == "slots") {
    c.env.slots.clear();
    for (const std::string& s : split(value, 'x')) c.env.slots.push_back(size(s));
  } else if (key == "buffer") {
    c.env.buffer = size(value);
  } else if (key == "policies") {
    c.policies.clear();
    for (const std::string& p : split(value, ',')) c.policies.push_back(parse_policy(p));
  } else if (key == "horizon") {
    c.horizon = static_cast<long>(parse_u64(key, value));
  } else if (key == "reps") {
    c.repetitions = size(value);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "smoothing") {
    c.model.smoothing = parse_double(key, value);
  } else if (key == "latent_samples") {
    c.model.latent_samples = size(value);
  } else if (key == "q0") {
    c.model.q0 = parse_double(key, value);
  } else if (key == "q1") {
    c.model.q1 = parse_double(key, value);
  } else if (key == "hidden") {
    c.model.hidden_width = size(value);
  } else if (key == "latent_dim") {
    c.model.latent_dim = size(value);
  } else if (key == "injection") {
    if (value == "multiplicative") c.model.injection = neural::InjectionMode::kMultiplicative;
    else if (value == "additive") c.model.injection = neural::InjectionMode::kAdditive;
    else throw InvalidConfig("unknown injection mode '" + value + "'");
  } else if (key == "train_steps") {
    c.model.train.steps = static_cast<long>(parse_u64(key, value));
  } else if (key == "batch_size") {
    c.model.train.batch_size = size(value);
  } else if (key == "learning_rate") {
    c.model.train.learning_rate = parse_double(key, value);
  } else if (key == "kl_weight") {
    c.model.train.kl_weight = parse_double(key, value);
  } else if (key == "dropout") {
    c.model.train.dropout = parse_double(key, value);
  } else if (key == "holdout") {
    c.model.train.holdout_fraction = parse_double(key, value);
  } else {
    throw InvalidConfig("unknown key '" + key + "'");
  }
}

inline void ExperimentConfig::validate() const {
  if (horizon < 1) throw InvalidConfig("horizon must be >= 1");
  if (repetitions < 1) throw InvalidConfig("reps must be >= 1");
  if (policies.empty()) throw InvalidConfig("no policies configured");
  if (env.buffer < 1) throw InvalidConfig("buffer must be >= 1");
  if (env.family == EnvFamily::kBernoulli) {
    if (env.arms < 1) throw InvalidConfig("arms must be >= 1");
    if (!(env.alpha > 0.0 && env.beta > 0.0)) throw InvalidConfig("prior parameters must be positive");
  } else {
    if (env.context_dim < 1) throw InvalidConfig("context_dim must be >= 1");
    if (env.family == EnvFamily::kContextual && env.arms < 1) throw InvalidConfig("arms must be >= 1");
    if (env.family == EnvFamily::kCombinatorial && env.slots.empty()) throw InvalidConfig("slots must be nonempty");
  }
  if (!(model.smoothing >= 0.0)) throw InvalidConfig("smoothing must be >= 0");
  if (model.latent_samples < 1) throw InvalidConfig("latent_samples must be >= 1");
  if (!(model.q0 > 0.0 && model.q0 < model.q1 && model.q1 < 100.0)) throw InvalidConfig("need 0 < q0 < q1 < 100");
  model.train.validate();
  for (const PolicySpec& p : policies) {
    const bool flat_only = p.kind == "ucb1" || p.kind == "ts";
    if (flat_only && env.family != EnvFamily::kBernoulli) {
      throw InvalidConfig("policy '" + p.label + "' needs a non-contextual environment");
    }
    if ((p.kind == "neural-ts") && env.family != EnvFamily::kContextual) {
      throw InvalidConfig("policy '" + p.label + "' needs a contextual environment");
    }
    if (p.kind == "egreedy" && env.family == EnvFamily::kCombinatorial) {
      throw InvalidConfig("policy '" + p.label + "' does not support combinatorial actions");
    }
  }
}

/// Parses a config document into the grid of experiments it describes.
///
/// One `key = value` per line; `#` starts a comment. A value with
/// `|`-separated alternatives is a sweep axis: the result holds one config
/// per combination, axes varying in file order with the last fastest.
inline std::vector<ExperimentConfig> parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw InvalidConfig("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty() || value.empty()) throw InvalidConfig("line " + std::to_string(line_no) + ": empty key or value");
    entries.emplace_back(key, split(value, '|'));
  }

  std::vector<ExperimentConfig> grid(1);
  for (const auto& [key, alternatives] : entries) {
    std::vector<ExperimentConfig> next;
    next.reserve(grid.size() * alternatives.size());
    for (const ExperimentConfig& base : grid) {
      for (const std::string& alt : alternatives) {
        ExperimentConfig c = base;
        apply_setting(c, key, alt);
        if (alternatives.size() > 1) c.name += "_" + key + "-" + alt;
        next.push_back(std::move(c));
      }
    }
    grid = std::move(next);
  }
  for (ExperimentConfig& c : grid) {
    std::replace(c.name.begin(), c.name.end(), '/', '-');
    c.validate();
  }
  return grid;
}

inline std::vector<ExperimentConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
}

}  // namespace gmb::harness
