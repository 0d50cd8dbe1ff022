// Acceptance suite: drives the full laboratory against every stated
// criterion and prints one pass/fail line per criterion. Exits nonzero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "okl/checks.hpp"
#include "okl/config.hpp"
#include "okl/harness.hpp"

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(const std::string& id, bool pass, double seconds, const std::string& detail) {
  std::printf("[%s] %-5s (%6.2fs) %s\n", pass ? "PASS" : "FAIL", id.c_str(), seconds,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

okl::ExperimentConfig base_config() {
  okl::ExperimentConfig cfg;
  cfg.decay = okl::DecayKind::Power;
  cfg.decay_param = 0.25;
  cfg.n = 256;
  cfg.kappa_sq_target = 0.9;
  cfg.r = 1.0;
  cfg.u_rule = okl::ExperimentConfig::URule::InverseIndex;
  cfg.noise = 0.3;
  cfg.eta1 = 0.5;
  cfg.beta = 0.3;
  cfg.seeds = 50;
  cfg.base_seed = 1;
  cfg.total_steps = 1 << 14;
  cfg.record_iterate_norms = true;
  return cfg;
}

struct RunResult {
  okl::Problem problem;
  okl::TrialSet trials;
  std::vector<okl::Aggregate> rho;
  std::vector<okl::Aggregate> k;
};

RunResult run_experiment(const okl::ExperimentConfig& cfg) {
  okl::Problem problem = okl::build_problem(cfg);
  okl::TrialSet trials = okl::run_trials(problem, okl::settings_from(cfg));
  auto rho = okl::aggregate(trials.records, okl::Norm::Rho);
  auto k = okl::aggregate(trials.records, okl::Norm::K);
  return RunResult{std::move(problem), std::move(trials), std::move(rho), std::move(k)};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// AC-1: primal vs dual pointwise agreement.
void ac1() {
  Timer timer;
  okl::EquivalenceSettings eq;  // T = 2000, n = 64, 5 seeds, 100 probes, 1e-8
  const auto result = okl::representation_equivalence_check(eq, 1);
  const double secs = timer.seconds();
  const bool pass = result.passed() && secs < 10.0;
  report("AC-1", pass, secs,
         "primal/dual agreement: " + std::to_string(result.checked) + " comparisons, " +
             std::to_string(result.failures) + " failures" +
             (result.failures ? " (" + result.first_failure + ")" : ""));
}

// AC-2: closed-form envelope grid, zero failures.
void ac2(const okl::Problem& problem) {
  Timer timer;
  const auto results = okl::verify_bounds_grid(problem);
  const double secs = timer.seconds();
  std::size_t checked = 0, failures = 0;
  std::string first;
  for (const auto& r : results) {
    checked += r.checked;
    failures += r.failures;
    if (first.empty() && !r.first_failure.empty()) first = r.name + ": " + r.first_failure;
  }
  const bool pass = failures == 0 && secs < 30.0;
  report("AC-2", pass, secs,
         "envelope grid: " + std::to_string(checked) + " checks, " +
             std::to_string(failures) + " failures" + (failures ? " (" + first + ")" : ""));
}

// AC-3: rho envelope with the four-level chain at theta*.
// AC-4: fitted slope of the same run.
void ac3_ac4(const RunResult& run) {
  Timer timer;
  const auto report_rho = okl::compare_bounds(run.problem, okl::Norm::Rho, run.rho,
                                              run.trials.mean_iterate_k_norms);
  bool envelope = true, chain = true;
  for (const auto& row : report_rho.checkpoints) {
    envelope = envelope && row.pass;
    chain = chain && row.sandwich_pass.value_or(false);
  }
  const double secs = timer.seconds();
  report("AC-3", envelope && chain && !report_rho.checkpoints.empty(), secs,
         "rho envelope (C=" + fmt(report_rho.c_full) + ") " +
             std::string(envelope ? "holds" : "VIOLATED") + ", decomposition chain " +
             (chain ? "holds" : "VIOLATED") + " at " +
             std::to_string(report_rho.checkpoints.size()) + " checkpoints");

  Timer t4;
  const auto fit = okl::fit_rate(run.rho, 256.0);
  const double threshold = -(0.629630 - 0.15);
  report("AC-4", fit.slope <= threshold, t4.seconds(),
         "rho slope " + fmt(fit.slope) + " <= " + fmt(threshold) + " (r^2 " +
             fmt(fit.r_squared) + ")");
}

// AC-5: kernel-norm envelope and slope at theta = 1/2.
void ac5(const RunResult& run) {
  Timer timer;
  const auto report_k = okl::compare_bounds(run.problem, okl::Norm::K, run.k);
  bool envelope = !report_k.checkpoints.empty();
  for (const auto& row : report_k.checkpoints) envelope = envelope && row.pass;
  const auto fit = okl::fit_rate(run.k, 256.0);
  const double threshold = -(0.35 - 0.15);
  const bool slope_ok = fit.slope <= threshold;
  report("AC-5", envelope && slope_ok, timer.seconds(),
         "k envelope (C=" + fmt(report_k.c_full) + ") " +
             std::string(envelope ? "holds" : "VIOLATED") + ", slope " + fmt(fit.slope) +
             " <= " + fmt(threshold));
}

// AC-6: uniform iterate-norm envelope, the risk drive bound, and the exact
// decomposition with empirical iterate norms dominating the measured error.
void ac6(const RunResult& half, const RunResult& threequarters) {
  Timer timer;
  bool norms_ok = true, drive_ok = true, decomp_ok = true;
  std::string detail;
  for (const RunResult* run : {&half, &threequarters}) {
    const auto& p = run->problem.profile;
    const double drive_bound = 20.0 * p.rho_norm_sq + 3.0 * p.noise_risk;
    for (const auto& a : run->rho) {
      if (a.t < 3) continue;
      const double norm_mean = run->trials.mean_iterate_k_norms[a.t];  // ||f_{t+1}||_K^2
      const double norm_bound = okl::iterate_norm_bound(p, a.t);
      if (norm_mean > norm_bound) {
        norms_ok = false;
        detail = "norm " + fmt(norm_mean) + " > " + fmt(norm_bound) + " at t=" +
                 std::to_string(a.t) + " theta=" + fmt(p.theta);
      }
      const double risk = a.mean + p.noise_risk;  // E(f_{t+1}) exactly
      if (risk > drive_bound) {
        drive_ok = false;
        detail = "risk " + fmt(risk) + " > " + fmt(drive_bound) + " at t=" +
                 std::to_string(a.t);
      }
      const double rhs = okl::decomposition_rhs(
          run->problem.spectrum(), run->problem.target, run->problem.schedule, p.kappa_sq,
          p.M, a.t, okl::Norm::Rho, run->trials.mean_iterate_k_norms);
      if (a.mean + 2.0 * a.se.value_or(0.0) > rhs) {
        decomp_ok = false;
        detail = "decomposition " + fmt(rhs) + " below measured at t=" + std::to_string(a.t);
      }
    }
  }
  report("AC-6", norms_ok && drive_ok && decomp_ok, timer.seconds(),
         std::string("iterate norms within the uniform bound: ") +
             (norms_ok ? "yes" : "no") + ", risk within the drive bound: " +
             (drive_ok ? "yes" : "no") + ", empirical decomposition dominates: " +
             (decomp_ok ? "yes" : "no") + (detail.empty() ? "" : " (" + detail + ")"));
}

// AC-7: constant-step schedules across horizons.
void ac7() {
  Timer timer;
  std::vector<okl::Aggregate> finals;
  for (std::uint64_t T : {1ull << 8, 1ull << 10, 1ull << 12, 1ull << 14}) {
    auto cfg = base_config();
    cfg.variant = okl::ExperimentConfig::ScheduleVariant::Constant;
    cfg.theta = 0.0;  // unused by the constant schedule
    cfg.total_steps = T;
    cfg.explicit_checkpoints = {T};
    cfg.record_iterate_norms = false;
    const auto run = run_experiment(cfg);
    finals.push_back(run.rho.back());
  }
  const auto fit = okl::fit_rate(finals, 1.0);
  const double threshold = -(2.0 / 3.0 - 0.15);
  report("AC-7", fit.slope <= threshold, timer.seconds(),
         "constant-step final-error slope " + fmt(fit.slope) + " <= " + fmt(threshold));
}

// AC-8: averaged and regularized variants behave, and the zero-shrinkage
// path reproduces the unregularized trajectory bit for bit.
void ac8() {
  Timer timer;
  bool monotone = true;
  std::string detail;
  for (const char* variant : {"averaged", "regularized"}) {
    auto cfg = base_config();
    cfg.total_steps = 1 << 12;
    cfg.record_iterate_norms = false;
    if (std::string(variant) == "averaged") {
      cfg.algorithm = okl::Algorithm::Averaged;
    } else {
      cfg.algorithm = okl::Algorithm::Regularized;
      cfg.variant = okl::ExperimentConfig::ScheduleVariant::Regularized;
      cfg.reg_a = 1.25;
    }
    const auto run = run_experiment(cfg);
    for (std::size_t i = 1; i < run.rho.size(); ++i) {
      if (run.rho[i].mean > 1.1 * run.rho[i - 1].mean) {
        monotone = false;
        detail = std::string(variant) + " mean rose at t=" + std::to_string(run.rho[i].t);
      }
    }
  }

  // zero-shrinkage equivalence
  auto cfg = base_config();
  cfg.total_steps = 1 << 10;
  const auto problem = okl::build_problem(cfg);
  const std::vector<std::uint64_t> cps = {cfg.total_steps};
  const auto last = okl::run_stream(problem.data, problem.kernel, problem.schedule,
                                    okl::Algorithm::Last, cfg.total_steps, cps, 5);
  const auto reg = okl::run_stream(problem.data, problem.kernel, problem.schedule,
                                   okl::Algorithm::Regularized, cfg.total_steps, cps, 5);
  bool bitwise = true;
  for (std::size_t k = 0; k < cfg.n; ++k) {
    if (last[0].state.coefficients()[k] != reg[0].state.coefficients()[k]) bitwise = false;
  }
  report("AC-8", monotone && bitwise, timer.seconds(),
         std::string("variant means trend down: ") + (monotone ? "yes" : "no") +
             (detail.empty() ? "" : " (" + detail + ")") +
             ", zero-shrinkage trajectory bitwise equal: " + (bitwise ? "yes" : "no"));
}

// AC-9: operator-order and residual-domination checks.
void ac9() {
  Timer timer;
  const auto results = okl::operator_checks(1);
  bool pass = true;
  std::string detail;
  for (const auto& r : results) {
    pass = pass && r.passed();
    if (!detail.empty()) detail += ", ";
    detail += r.name + (r.passed() ? " ok" : " FAILED");
  }
  const double secs = timer.seconds();
  report("AC-9", pass && secs < 5.0, secs, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  Timer total;

  ac1();

  auto cfg_theta_star = base_config();
  const auto problem_star = okl::build_problem(cfg_theta_star);
  ac2(problem_star);

  {
    Timer t;
    const auto run_star = run_experiment(cfg_theta_star);
    std::printf("  (theta* run: %.2fs for %llu seeds x %llu steps)\n", t.seconds(),
                static_cast<unsigned long long>(cfg_theta_star.seeds),
                static_cast<unsigned long long>(cfg_theta_star.total_steps));
    ac3_ac4(run_star);
  }

  {
    auto cfg_half = base_config();
    cfg_half.theta = 0.5;
    const auto run_half = run_experiment(cfg_half);

    auto cfg_tq = base_config();
    cfg_tq.theta = 0.75;
    const auto run_tq = run_experiment(cfg_tq);

    ac5(run_half);
    ac6(run_half, run_tq);
  }

  ac7();
  ac8();
  ac9();

  std::printf("%d criterion(s) failed, total %.1fs\n", g_failures, total.seconds());
  return g_failures == 0 ? 0 : 1;
}
