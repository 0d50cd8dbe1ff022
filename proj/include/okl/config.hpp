#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "okl/learner.hpp"
#include "okl/model.hpp"

namespace okl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Experiment description parsed from a flat sectioned key=value file.
// Schema (see README for the full reference):
//
//   [model]     decay, b|q, n, scale|kappa_sq, r, u_rule, noise
//   [schedule]  variant, eta1, theta (number or "auto"), a
//   [run]       algorithm, T, checkpoints, seeds, base_seed, record_iterate_norms
//   [capacity]  beta (number or "auto" = b + 0.05)
//   [output]    dir
//   [sweep]     r, beta, theta (comma lists; used by the sweep subcommand)
struct ExperimentConfig {
  enum class URule { InverseIndex, Ones, UnitFirst };
  enum class ScheduleVariant { Poly, Constant, Regularized };

  DecayKind decay = DecayKind::Power;
  double decay_param = 0.25;
  std::size_t n = 64;
  std::optional<double> scale;
  std::optional<double> kappa_sq_target;
  double r = 1.0;
  URule u_rule = URule::InverseIndex;
  double noise = 0.0;

  ScheduleVariant variant = ScheduleVariant::Poly;
  double eta1 = 0.5;
  std::optional<double> theta;  // nullopt = auto (theta*(r, beta))
  double reg_a = 1.25;

  Algorithm algorithm = Algorithm::Last;
  std::uint64_t total_steps = 1024;
  std::vector<std::uint64_t> explicit_checkpoints;  // empty = dyadic from 2^6
  std::uint64_t seeds = 50;
  std::uint64_t base_seed = 1;
  bool record_iterate_norms = false;

  std::optional<double> beta;  // nullopt = auto (b + 0.05 for power decay)

  std::string out_dir = "out";

  std::vector<double> sweep_r;
  std::vector<double> sweep_beta;
  std::vector<double> sweep_theta;

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_file(const std::filesystem::path& path);

  std::vector<std::uint64_t> checkpoints() const {
    if (!explicit_checkpoints.empty()) return explicit_checkpoints;
    std::vector<std::uint64_t> cps;
    for (std::uint64_t c = 64; c <= total_steps; c *= 2) cps.push_back(c);
    if (cps.empty() || cps.back() != total_steps) cps.push_back(total_steps);
    return cps;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + value);
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument("");
    return static_cast<std::uint64_t>(v);
  } catch (...) {
    throw ConfigError("config: bad integer value for '" + key + "': " + value);
  }
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
  return out;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config: malformed section header at line " + std::to_string(lineno));
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::string qualified = section + "." + key;

    if (qualified == "model.decay") {
      if (value == "power") cfg.decay = DecayKind::Power;
      else if (value == "exponential") cfg.decay = DecayKind::Exponential;
      else throw ConfigError("config: decay must be power or exponential");
    } else if (qualified == "model.b" || qualified == "model.q") {
      cfg.decay_param = detail::parse_double(key, value);
    } else if (qualified == "model.n") {
      cfg.n = static_cast<std::size_t>(detail::parse_uint(key, value));
    } else if (qualified == "model.scale") {
      cfg.scale = detail::parse_double(key, value);
    } else if (qualified == "model.kappa_sq") {
      cfg.kappa_sq_target = detail::parse_double(key, value);
    } else if (qualified == "model.r") {
      cfg.r = detail::parse_double(key, value);
    } else if (qualified == "model.u_rule") {
      if (value == "inverse_index") cfg.u_rule = URule::InverseIndex;
      else if (value == "ones") cfg.u_rule = URule::Ones;
      else if (value == "unit_first") cfg.u_rule = URule::UnitFirst;
      else throw ConfigError("config: u_rule must be inverse_index, ones, or unit_first");
    } else if (qualified == "model.noise") {
      cfg.noise = detail::parse_double(key, value);
    } else if (qualified == "schedule.variant") {
      if (value == "poly") cfg.variant = ScheduleVariant::Poly;
      else if (value == "constant") cfg.variant = ScheduleVariant::Constant;
      else if (value == "regularized") cfg.variant = ScheduleVariant::Regularized;
      else throw ConfigError("config: variant must be poly, constant, or regularized");
    } else if (qualified == "schedule.eta1") {
      cfg.eta1 = detail::parse_double(key, value);
    } else if (qualified == "schedule.theta") {
      if (value == "auto") cfg.theta.reset();
      else cfg.theta = detail::parse_double(key, value);
    } else if (qualified == "schedule.a") {
      cfg.reg_a = detail::parse_double(key, value);
    } else if (qualified == "run.algorithm") {
      if (value == "last") cfg.algorithm = Algorithm::Last;
      else if (value == "averaged") cfg.algorithm = Algorithm::Averaged;
      else if (value == "regularized") cfg.algorithm = Algorithm::Regularized;
      else throw ConfigError("config: algorithm must be last, averaged, or regularized");
    } else if (qualified == "run.T") {
      cfg.total_steps = detail::parse_uint(key, value);
    } else if (qualified == "run.checkpoints") {
      if (value == "dyadic") {
        cfg.explicit_checkpoints.clear();
      } else {
        cfg.explicit_checkpoints.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = detail::trim(item);
          if (!item.empty()) cfg.explicit_checkpoints.push_back(detail::parse_uint(key, item));
        }
        if (cfg.explicit_checkpoints.empty()) {
          throw ConfigError("config: checkpoints must be 'dyadic' or a comma list");
        }
      }
    } else if (qualified == "run.seeds") {
      cfg.seeds = detail::parse_uint(key, value);
    } else if (qualified == "run.base_seed") {
      cfg.base_seed = detail::parse_uint(key, value);
    } else if (qualified == "run.record_iterate_norms") {
      if (value == "true") cfg.record_iterate_norms = true;
      else if (value == "false") cfg.record_iterate_norms = false;
      else throw ConfigError("config: record_iterate_norms must be true or false");
    } else if (qualified == "capacity.beta") {
      if (value == "auto") cfg.beta.reset();
      else cfg.beta = detail::parse_double(key, value);
    } else if (qualified == "output.dir") {
      cfg.out_dir = value;
    } else if (qualified == "sweep.r") {
      cfg.sweep_r = detail::parse_double_list(key, value);
    } else if (qualified == "sweep.beta") {
      cfg.sweep_beta = detail::parse_double_list(key, value);
    } else if (qualified == "sweep.theta") {
      cfg.sweep_theta = detail::parse_double_list(key, value);
    } else {
      throw ConfigError("config: unknown key '" + qualified + "' at line " +
                        std::to_string(lineno));
    }
  }

  if (cfg.n < 1) throw ConfigError("config: model.n must be >= 1");
  if (cfg.seeds < 1) throw ConfigError("config: run.seeds must be >= 1");
  if (cfg.scale && cfg.kappa_sq_target) {
    throw ConfigError("config: set model.scale or model.kappa_sq, not both");
  }
  if (cfg.noise < 0.0) throw ConfigError("config: model.noise must be >= 0");
  if (cfg.algorithm == Algorithm::Averaged && cfg.variant == ScheduleVariant::Regularized) {
    throw ConfigError("config: averaging applies to the unregularized recursion only");
  }
  if (cfg.algorithm == Algorithm::Regularized && cfg.variant != ScheduleVariant::Regularized) {
    throw ConfigError("config: the regularized algorithm needs schedule.variant = regularized");
  }
  for (std::uint64_t c : cfg.explicit_checkpoints) {
    if (c > cfg.total_steps) throw ConfigError("config: checkpoint beyond run.T");
  }
  return cfg;
}

inline ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse(in);
}

}  // namespace okl
