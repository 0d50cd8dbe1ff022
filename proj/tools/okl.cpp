#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "okl/checks.hpp"
#include "okl/config.hpp"
#include "okl/harness.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

struct RunOutcome {
  std::vector<okl::NormSeries> series;
  bool bounds_evaluated = false;
  bool bounds_passed = true;
};

bool rho_bound_applies(const okl::ExperimentConfig& cfg, const okl::Problem& problem) {
  if (cfg.variant != okl::ExperimentConfig::ScheduleVariant::Poly) return false;
  if (cfg.algorithm != okl::Algorithm::Last) return false;
  if (!(problem.beta < 1.0)) return false;
  const double theta_star = okl::rate_selector(problem.profile.r, problem.beta).theta_star;
  return std::abs(problem.profile.theta - theta_star) <= 1e-9;
}

bool k_bound_applies(const okl::ExperimentConfig& cfg, const okl::Problem& problem) {
  if (cfg.variant != okl::ExperimentConfig::ScheduleVariant::Poly) return false;
  if (cfg.algorithm != okl::Algorithm::Last) return false;
  if (!(problem.beta < 1.0)) return false;
  return std::abs(problem.profile.theta - 0.5) <= 1e-12;
}

RunOutcome execute_run(const okl::ExperimentConfig& cfg, const okl::Problem& problem,
                       bool verbose) {
  const auto settings = okl::settings_from(cfg);
  const auto trials = okl::run_trials(problem, settings);

  RunOutcome outcome;
  for (okl::Norm norm : {okl::Norm::Rho, okl::Norm::K}) {
    okl::NormSeries series;
    series.norm = norm;
    series.aggregates = okl::aggregate(trials.records, norm);
    if (series.aggregates.empty()) continue;

    const bool bound_applies = norm == okl::Norm::Rho ? rho_bound_applies(cfg, problem)
                                                      : k_bound_applies(cfg, problem);
    for (const auto& a : series.aggregates) {
      series.bounds.push_back(bound_applies && a.t >= 3
                                  ? okl::theorem_bound(problem.profile, a.t, norm)
                                  : std::nan(""));
    }
    if (problem.beta < 1.0) {
      const auto sel = okl::rate_selector(problem.profile.r, problem.beta);
      series.theory_exponent = norm == okl::Norm::Rho ? sel.rho_exponent : sel.k_exponent;
    }
    try {
      series.fit = okl::fit_rate(series.aggregates, 1.0);
    } catch (const std::exception&) {
      // too few checkpoints or a zero mean: no fit row
    }

    if (bound_applies) {
      outcome.bounds_evaluated = true;
      const auto report =
          okl::compare_bounds(problem, norm, series.aggregates, trials.mean_iterate_k_norms);
      if (!report.all_pass) outcome.bounds_passed = false;
      if (verbose) {
        std::printf("%s envelope: constants %.6g / %.6g / %.6g\n", okl::norm_name(norm),
                    report.c_first, report.c_second, report.c_full);
        for (const auto& row : report.checkpoints) {
          std::printf("  t=%-8llu mean=%.6g se=%.6g bound=%.6g %s",
                      static_cast<unsigned long long>(row.t), row.mean, row.se, row.bound,
                      row.pass ? "ok" : "VIOLATED");
          if (row.sandwich_pass) {
            std::printf("  chain %s", *row.sandwich_pass ? "ok" : "VIOLATED");
          }
          std::printf("\n");
        }
      }
    }
    if (verbose && series.fit) {
      std::printf("%s fitted slope %.4f (theory exponent %.4f), r^2 %.4f\n",
                  okl::norm_name(norm), series.fit->slope, series.theory_exponent,
                  series.fit->r_squared);
    }
    outcome.series.push_back(std::move(series));
  }
  return outcome;
}

int command_run(const std::string& config_path, const std::string& out_override) {
  auto cfg = okl::ExperimentConfig::parse_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  const auto problem = okl::build_problem(cfg);
  const auto outcome = execute_run(cfg, problem, true);
  okl::write_outputs(cfg.out_dir, outcome.series, cfg.seeds, cfg.algorithm);
  std::printf("wrote %s/{errors.csv,fit.csv,errors.svg}\n", cfg.out_dir.c_str());
  if (outcome.bounds_evaluated && !outcome.bounds_passed) {
    std::fprintf(stderr, "bound comparison failed\n");
    return kExitCheckFailure;
  }
  return kExitPass;
}

int command_verify_bounds(const std::string& config_path) {
  const auto cfg = okl::ExperimentConfig::parse_file(config_path);
  const auto problem = okl::build_problem(cfg);
  const auto results = okl::verify_bounds_grid(problem);
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %-32s checked=%zu failures=%zu\n", r.passed() ? "PASS" : "FAIL",
                r.name.c_str(), r.checked, r.failures);
    if (!r.passed()) {
      all = false;
      std::printf("       first failure: %s\n", r.first_failure.c_str());
    }
  }
  return all ? kExitPass : kExitCheckFailure;
}

int command_oracle_check(std::uint64_t seed, const okl::EquivalenceSettings& eq) {
  bool all = true;
  auto results = okl::operator_checks(seed);
  results.insert(results.begin(), okl::representation_equivalence_check(eq, seed));
  for (const auto& r : results) {
    std::printf("[%s] %-32s checked=%zu failures=%zu\n", r.passed() ? "PASS" : "FAIL",
                r.name.c_str(), r.checked, r.failures);
    if (!r.passed()) {
      all = false;
      std::printf("       first failure: %s\n", r.first_failure.c_str());
    }
  }
  return all ? kExitPass : kExitCheckFailure;
}

int command_sweep(const std::string& config_path, const std::string& out_override) {
  auto base = okl::ExperimentConfig::parse_file(config_path);
  if (!out_override.empty()) base.out_dir = out_override;
  const std::vector<double> rs = base.sweep_r.empty() ? std::vector<double>{base.r}
                                                      : base.sweep_r;
  const std::vector<double> betas =
      base.sweep_beta.empty() ? std::vector<double>{base.beta.value_or(0.3)} : base.sweep_beta;

  std::filesystem::create_directories(base.out_dir);
  std::ofstream summary(std::filesystem::path(base.out_dir) / "sweep.csv");
  summary << "r,beta,theta,norm,slope,theory_exponent,final_mean,bound_pass\n";

  bool all_pass = true;
  for (double r : rs) {
    for (double beta : betas) {
      const std::vector<double> thetas =
          base.sweep_theta.empty()
              ? std::vector<double>{okl::rate_selector(r, beta).theta_star}
              : base.sweep_theta;
      for (double theta : thetas) {
        auto cfg = base;
        cfg.r = r;
        cfg.beta = beta;
        cfg.theta = theta;
        char tag[96];
        std::snprintf(tag, sizeof(tag), "r%g_beta%g_theta%g", r, beta, theta);
        cfg.out_dir = (std::filesystem::path(base.out_dir) / tag).string();
        std::printf("sweep %s\n", tag);
        const auto problem = okl::build_problem(cfg);
        const auto outcome = execute_run(cfg, problem, false);
        okl::write_outputs(cfg.out_dir, outcome.series, cfg.seeds, cfg.algorithm);
        if (outcome.bounds_evaluated && !outcome.bounds_passed) all_pass = false;
        for (const auto& s : outcome.series) {
          summary << okl::detail::fmt12(r) << ',' << okl::detail::fmt12(beta) << ','
                  << okl::detail::fmt12(theta) << ',' << okl::norm_name(s.norm) << ',';
          if (s.fit) summary << okl::detail::fmt12(s.fit->slope);
          summary << ',' << okl::detail::fmt12(s.theory_exponent) << ','
                  << okl::detail::fmt12(s.aggregates.back().mean) << ','
                  << (outcome.bounds_evaluated ? (outcome.bounds_passed ? "1" : "0") : "")
                  << '\n';
        }
      }
    }
  }
  std::printf("wrote %s/sweep.csv\n", base.out_dir.c_str());
  return all_pass ? kExitPass : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"okl: online kernel learning laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed = 1;
  okl::EquivalenceSettings eq;

  auto* run = app.add_subcommand("run", "run multi-seed trials and write csv/svg outputs");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_override, "output directory override");

  auto* verify =
      app.add_subcommand("verify-bounds", "check the closed-form envelopes on the fixed grid");
  verify->add_option("--config", config_path, "experiment config file")->required();

  auto* oracle = app.add_subcommand(
      "oracle-check", "representation equivalence and operator-order checks");
  oracle->add_option("--seed", seed, "base seed");
  oracle->add_option("--steps", eq.total_steps, "steps for the equivalence run");
  oracle->add_option("--rank", eq.rank, "spectrum rank for the equivalence run");
  oracle->add_option("--trials", eq.seeds, "number of equivalence seeds");
  oracle->add_option("--probes", eq.probe_points, "probe points per checkpoint");

  auto* sweep = app.add_subcommand("sweep", "cartesian grid over r, beta, theta");
  sweep->add_option("--config", config_path, "experiment config file")->required();
  sweep->add_option("--out", out_override, "output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (run->parsed()) return command_run(config_path, out_override);
    if (verify->parsed()) return command_verify_bounds(config_path);
    if (oracle->parsed()) return command_oracle_check(seed, eq);
    if (sweep->parsed()) return command_sweep(config_path, out_override);
  } catch (const okl::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailure;
  }
  return kExitUsage;
}
