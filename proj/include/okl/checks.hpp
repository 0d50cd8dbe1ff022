#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "okl/harness.hpp"
#include "okl/learner.hpp"
#include "okl/oracle.hpp"

namespace okl {

struct CheckResult {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string first_failure;

  CheckResult() = default;
  explicit CheckResult(std::string check_name) : name(std::move(check_name)) {}

  bool passed() const { return checked > 0 && failures == 0; }

  void record(bool ok, const std::string& detail) {
    ++checked;
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = detail;
    }
  }
};

namespace detail {

struct GridPoint {
  double theta;
  double eta1;
};

inline std::string grid_tag(double theta, double eta1, std::uint64_t t) {
  std::ostringstream os;
  os << "theta=" << theta << " eta1=" << eta1 << " t=" << t;
  return os.str();
}

inline std::vector<std::uint64_t> tail_indices(std::uint64_t t) {
  std::vector<std::uint64_t> is;
  for (std::uint64_t i : {std::uint64_t{1}, t / 4, t / 2, 3 * t / 4, t - 1, t}) {
    if (i >= 1 && i <= t && (is.empty() || i > is.back())) is.push_back(i);
  }
  return is;
}

}  // namespace detail

// Fixed verification grid: closed-form step-sum envelopes, bias envelopes
// dominating the exact bias, the trace-domination step, and the variance
// envelope dominating the exact decomposition with uniform iterate norms.
//
// theta in {0.5, 0.55, 2/3, 0.75, 0.9}, eta1 in {0.1, 0.5, 0.9/kappa^2},
// r in {0.6, 1, 2}, beta in {0.3, 0.5, 0.8}, t in {3, 10, 1e2, 1e3, 1e5}.
inline std::vector<CheckResult> verify_bounds_grid(const Problem& problem) {
  const Spectrum& spectrum = problem.spectrum();
  const std::size_t n = spectrum.rank();
  const double kap_sq = kappa_sq(spectrum);
  const double M = problem.data.output_bound();

  const std::vector<double> thetas = {0.5, 0.55, 2.0 / 3.0, 0.75, 0.9};
  const std::vector<double> etas = {0.1, 0.5, 0.9 / kap_sq};
  const std::vector<double> rs = {0.6, 1.0, 2.0};
  const std::vector<double> betas = {0.3, 0.5, 0.8};
  const std::vector<std::uint64_t> ts = {3, 10, 100, 1000, 100000};
  const std::uint64_t t_max = ts.back();

  CheckResult sum_env{"stepsum-envelope"};
  CheckResult sumsq_env{"stepsum-square-envelope"};
  CheckResult tail_env{"stepsum-tail-envelope"};
  CheckResult bias_rho{"bias-envelope-rho"};
  CheckResult bias_k{"bias-envelope-k"};
  CheckResult trace_dom{"trace-domination"};
  CheckResult var_dom{"variance-envelope-domination"};

  const std::vector<double> u(problem.target.source_coefficients().begin(),
                              problem.target.source_coefficients().end());

  for (double theta : thetas) {
    for (double eta1 : etas) {
      // one forward sweep per (theta, eta1): prefix step sums and
      // per-eigenvalue contraction products captured at each grid t
      std::vector<double> prefix_eta(t_max + 1, 0.0);
      std::vector<double> prod(n, 1.0);
      std::vector<std::vector<double>> prod_at;  // aligned with ts
      std::size_t next_t = 0;
      for (std::uint64_t i = 1; i <= t_max; ++i) {
        const double eta = eta1 * std::pow(static_cast<double>(i), -theta);
        prefix_eta[i] = prefix_eta[i - 1] + eta;
        for (std::size_t k = 0; k < n; ++k) prod[k] *= 1.0 - eta * spectrum.sigma(k);
        if (next_t < ts.size() && ts[next_t] == i) {
          prod_at.push_back(prod);
          ++next_t;
        }
      }

      for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        const std::uint64_t t = ts[ti];
        const std::string tag = detail::grid_tag(theta, eta1, t);
        const StepSums sums = stepsum_bounds(eta1, theta, t);
        sum_env.record(sums.lower_a <= sums.sum && sums.sum <= sums.upper_a, tag);
        sumsq_env.record(sums.sumsq <= sums.sumsq_bound, tag);
        for (std::uint64_t i : detail::tail_indices(t)) {
          const double exact_tail = prefix_eta[t] - prefix_eta[i];
          const double lower = stepsum_tail_lower(eta1, theta, i, t);
          tail_env.record(exact_tail >= lower - 1e-12 * std::abs(lower),
                          tag + " i=" + std::to_string(i));
        }

        // bias envelopes: exact per-eigenvalue bias against the closed form
        for (double r : rs) {
          double exact_rho = 0.0;
          double exact_k = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            const double c = std::pow(spectrum.sigma(k), r) * u[k];
            const double term = c * prod_at[ti][k];
            exact_rho += term * term;
            exact_k += term * term / spectrum.sigma(k);
          }
          ProblemProfile p = problem.profile;
          p.r = r;
          p.theta = theta;
          p.eta1 = eta1;
          const std::string rtag = tag + " r=" + std::to_string(r);
          bias_rho.record(exact_rho <= bias_bound_rho(p, t) * (1.0 + 1e-12), rtag);
          if (theta == 0.5) {
            bias_k.record(exact_k <= bias_bound_K(p, t) * (1.0 + 1e-12), rtag);
          }
        }

        // trace domination: suffix sweep over i for this (theta, eta1, t)
        const auto is = detail::tail_indices(t);
        std::vector<double> suffix(n, 1.0);
        std::size_t icursor = is.size();
        std::vector<double> trace_at(is.size(), 0.0);
        for (std::uint64_t i = t;; --i) {
          while (icursor > 0 && is[icursor - 1] == i) {
            double tr = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
              const double s = spectrum.sigma(k);
              tr += s * s * suffix[k] * suffix[k];
            }
            trace_at[--icursor] = tr;
          }
          if (i == 1) break;
          const double eta = eta1 * std::pow(static_cast<double>(i), -theta);
          for (std::size_t k = 0; k < n; ++k) suffix[k] *= 1.0 - eta * spectrum.sigma(k);
        }
        for (std::size_t ii = 0; ii < is.size(); ++ii) {
          const std::uint64_t i = is[ii];
          for (double beta : betas) {
            const double tb = capacity_trace(spectrum, beta);
            double rhs;
            if (i == t) {
              rhs = tb * std::pow(kap_sq, 2.0 - beta);
            } else {
              const double tail = prefix_eta[t] - prefix_eta[i];
              rhs = tb * std::pow((2.0 - beta) / (2.0 * kEulerE), 2.0 - beta) /
                    std::pow(tail, 2.0 - beta);
            }
            trace_dom.record(trace_at[ii] <= rhs * (1.0 + 1e-12),
                             tag + " i=" + std::to_string(i) + " beta=" + std::to_string(beta));
          }
        }
      }
    }
  }

  // variance envelope vs the exact decomposition at the balanced exponent
  for (double r : rs) {
    for (double beta : betas) {
      const double theta = rate_selector(r, beta).theta_star;
      for (double eta1 : etas) {
        ProblemProfile p = problem.profile;
        p.r = r;
        p.beta = beta;
        p.theta = theta;
        p.eta1 = eta1;
        p.trace_beta = capacity_trace(spectrum, beta);
        const StepSchedule schedule = StepSchedule::poly_decay(eta1, theta, kap_sq);
        for (std::uint64_t t : ts) {
          const auto norms = iterate_norm_bound_sequence(p, t);
          const double exact =
              decomposition_variance(spectrum, schedule, kap_sq, M, t, Norm::Rho, norms);
          const double envelope = variance_bound_rho(p, t).value;
          var_dom.record(exact <= envelope * (1.0 + 1e-12),
                         detail::grid_tag(theta, eta1, t) + " r=" + std::to_string(r) +
                             " beta=" + std::to_string(beta));
        }
      }
    }
  }

  return {sum_env, sumsq_env, tail_env, bias_rho, bias_k, trace_dom, var_dom};
}

struct EquivalenceSettings {
  std::uint64_t total_steps = 2000;
  std::size_t rank = 64;
  std::uint64_t seeds = 5;
  std::size_t probe_points = 100;
  double rel_tol = 1e-8;
};

// Primal (coefficient) vs dual (support expansion) trajectories of the same
// stream must agree pointwise: |p - d| <= tol * max(1, |p|, |d|).
inline CheckResult representation_equivalence_check(const EquivalenceSettings& s,
                                                    std::uint64_t base_seed = 1) {
  ExperimentConfig cfg;
  cfg.n = s.rank;
  cfg.r = 1.0;
  cfg.beta = 0.3;
  cfg.noise = 0.3;
  cfg.base_seed = base_seed;
  const Problem problem = build_problem(cfg);

  std::vector<std::uint64_t> cps;
  for (std::uint64_t c = 1; c <= s.total_steps; c *= 2) cps.push_back(c);
  if (cps.back() != s.total_steps) cps.push_back(s.total_steps);

  CheckResult result{"representation-equivalence"};
  for (std::uint64_t seed = base_seed; seed < base_seed + s.seeds; ++seed) {
    const auto primal = run_stream(problem.data, problem.kernel, problem.schedule,
                                   Algorithm::Last, s.total_steps, cps, seed,
                                   Representation::Primal);
    const auto dual = run_stream(problem.data, problem.kernel, problem.schedule,
                                 Algorithm::Last, s.total_steps, cps, seed,
                                 Representation::Dual);
    for (std::size_t c = 0; c < cps.size(); ++c) {
      for (std::size_t j = 0; j < s.probe_points; ++j) {
        const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(s.probe_points);
        const double vp = primal[c].state.predict(problem.kernel, x);
        const double vd = dual[c].state.predict(problem.kernel, x);
        const double tol = s.rel_tol * std::max({1.0, std::abs(vp), std::abs(vd)});
        std::ostringstream tag;
        tag << "seed=" << seed << " t=" << cps[c] << " x=" << x << " |p-d|="
            << std::abs(vp - vd);
        result.record(std::abs(vp - vd) <= tol, tag.str());
      }
    }
  }
  return result;
}

// Operator-order checks on random instances plus the residual second-moment
// domination on a rank-3 model.
inline std::vector<CheckResult> operator_checks(std::uint64_t seed = 1) {
  CheckResult psd{"psd-transform"};
  psd.record(psd_transform_check(8, 1000, seed), "dim=8 trials=1000");

  CheckResult dom{"residual-domination"};
  const Spectrum spectrum = Spectrum::custom({1.0, 0.25, 0.0625});
  const TargetFunction target = make_target(spectrum, 1.0, {0.5, 0.4, 0.3});
  const DataModel data(target, 0.3, seed);
  dom.record(residual_domination_check(spectrum, data, 50, seed), "rank=3 pairs=50");

  return {psd, dom};
}

inline std::vector<CheckResult> oracle_checks(std::uint64_t seed = 1) {
  std::vector<CheckResult> out;
  out.push_back(representation_equivalence_check(EquivalenceSettings{}, seed));
  for (auto& c : operator_checks(seed)) out.push_back(std::move(c));
  return out;
}

}  // namespace okl
