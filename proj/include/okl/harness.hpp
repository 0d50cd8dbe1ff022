#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "okl/bounds.hpp"
#include "okl/config.hpp"
#include "okl/learner.hpp"
#include "okl/metrics.hpp"
#include "okl/model.hpp"
#include "okl/oracle.hpp"
#include "okl/schedule.hpp"

namespace okl {

// A fully constructed experiment: model, target, sampling law, schedule, and
// the profile feeding the bound evaluations.
struct Problem {
  KernelModel kernel;
  TargetFunction target;
  DataModel data;
  StepSchedule schedule;
  double beta = 0.0;
  ProblemProfile profile;

  const Spectrum& spectrum() const { return kernel.spectrum(); }
};

namespace detail {

inline std::vector<double> source_coefficients(ExperimentConfig::URule rule, std::size_t n) {
  std::vector<double> u(n, 0.0);
  switch (rule) {
    case ExperimentConfig::URule::InverseIndex:
      for (std::size_t k = 0; k < n; ++k) u[k] = 1.0 / static_cast<double>(k + 1);
      break;
    case ExperimentConfig::URule::Ones:
      for (std::size_t k = 0; k < n; ++k) u[k] = 1.0;
      break;
    case ExperimentConfig::URule::UnitFirst:
      u[0] = 1.0;
      break;
  }
  return u;
}

}  // namespace detail

inline Problem build_problem(const ExperimentConfig& cfg) {
  const DecayLabel label{cfg.decay, cfg.decay_param};
  double scale = 1.0;
  if (cfg.scale) {
    scale = *cfg.scale;
  } else {
    // Solve the scale against a kappa^2 target; the printed constants are
    // only safe in the kappa^2 <= 1 regime, so that is the default.
    const double target_kappa = cfg.kappa_sq_target.value_or(0.9);
    const Spectrum unit = build_spectrum(label, cfg.n, 1.0);
    scale = target_kappa / kappa_sq(unit);
  }
  Spectrum spectrum = build_spectrum(label, cfg.n, scale);
  const double kap_sq = kappa_sq(spectrum);

  TargetFunction target =
      make_target(spectrum, cfg.r, detail::source_coefficients(cfg.u_rule, cfg.n));
  DataModel data(target, cfg.noise, cfg.base_seed);

  const double beta =
      cfg.beta.value_or(cfg.decay == DecayKind::Power ? cfg.decay_param + 0.05 : 0.1);
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("config: beta must lie in (0, 1]");

  double theta = 0.0;
  if (cfg.theta) {
    theta = *cfg.theta;
  } else if (beta < 1.0) {
    theta = rate_selector(cfg.r, beta).theta_star;
  } else {
    theta = 2.0 * cfg.r / (2.0 * cfg.r + 1.0);
  }

  StepSchedule schedule = [&] {
    switch (cfg.variant) {
      case ExperimentConfig::ScheduleVariant::Poly:
        return StepSchedule::poly_decay(cfg.eta1, theta, kap_sq);
      case ExperimentConfig::ScheduleVariant::Constant:
        return StepSchedule::constant_horizon(cfg.eta1, cfg.total_steps, cfg.r, kap_sq);
      default:
        return StepSchedule::regularized(cfg.reg_a, cfg.r);
    }
  }();

  ProblemProfile profile;
  profile.r = cfg.r;
  profile.beta = beta;
  profile.eta1 = cfg.eta1;
  profile.theta = theta;
  profile.kappa_sq = kap_sq;
  profile.M = data.output_bound();
  profile.rho_norm_sq = target.rho_norm_sq();
  profile.k_norm_sq = target.k_norm_sq();
  profile.u_norm_sq = target.u_norm_sq();
  profile.noise_risk = data.noise_risk();
  profile.trace_beta = capacity_trace(spectrum, beta);

  return Problem{KernelModel(std::move(spectrum)), std::move(target), std::move(data),
                 schedule, beta, profile};
}

struct RunSettings {
  Algorithm algorithm = Algorithm::Last;
  std::uint64_t total_steps = 1024;
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t seeds = 50;
  std::uint64_t base_seed = 1;
  bool record_iterate_norms = false;
  unsigned parallelism = 0;  // 0 = OKL_PARALLELISM env or hardware concurrency
};

inline RunSettings settings_from(const ExperimentConfig& cfg) {
  RunSettings s;
  s.algorithm = cfg.algorithm;
  s.total_steps = cfg.total_steps;
  s.checkpoints = cfg.checkpoints();
  s.seeds = cfg.seeds;
  s.base_seed = cfg.base_seed;
  s.record_iterate_norms = cfg.record_iterate_norms;
  return s;
}

struct TrialSet {
  std::vector<ErrorRecord> records;  // seed-major, checkpoint order within a seed
  std::vector<std::uint64_t> checkpoints;
  // mean over seeds of ||f_i||^2_K, index i-1, i = 1..T+1; empty unless recorded
  std::vector<double> mean_iterate_k_norms;
};

namespace detail {

inline unsigned resolve_parallelism(unsigned requested, std::uint64_t tasks) {
  unsigned p = requested;
  if (p == 0) {
    if (const char* env = std::getenv("OKL_PARALLELISM")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v < 1) throw std::runtime_error("OKL_PARALLELISM must be a positive integer");
      p = static_cast<unsigned>(v);
    } else {
      p = std::max(1u, std::thread::hardware_concurrency());
    }
  }
  return static_cast<unsigned>(std::min<std::uint64_t>(p, std::max<std::uint64_t>(tasks, 1)));
}

}  // namespace detail

// Runs `seeds` independent trials (seeds base, base+1, ...) and records the
// exact errors at every checkpoint. Trials execute concurrently; results are
// assembled in seed order, so the output is independent of scheduling.
inline TrialSet run_trials(const Problem& problem, const RunSettings& settings) {
  TrialSet out;
  out.checkpoints = settings.checkpoints;
  const std::uint64_t seeds = settings.seeds;
  std::vector<std::vector<ErrorRecord>> per_seed(seeds);
  std::vector<std::vector<double>> per_seed_norms(settings.record_iterate_norms ? seeds : 0);
  std::vector<std::string> failures(seeds);

  std::atomic<std::uint64_t> next{0};
  const auto worker = [&] {
    for (std::uint64_t idx = next.fetch_add(1); idx < seeds; idx = next.fetch_add(1)) {
      const std::uint64_t seed = settings.base_seed + idx;
      try {
        std::vector<double>* norms =
            settings.record_iterate_norms ? &per_seed_norms[idx] : nullptr;
        const auto snapshots =
            run_stream(problem.data, problem.kernel, problem.schedule, settings.algorithm,
                       settings.total_steps, settings.checkpoints, seed,
                       Representation::Primal, norms);
        auto& recs = per_seed[idx];
        recs.reserve(snapshots.size());
        for (const auto& snap : snapshots) {
          ErrorRecord rec;
          rec.t = snap.steps;
          rec.seed = seed;
          rec.algorithm = settings.algorithm;
          rec.rho_sq = rho_error_sq(snap.state, problem.target);
          rec.k_sq = k_error_sq(snap.state, problem.target, problem.spectrum());
          recs.push_back(rec);
        }
      } catch (const std::exception& e) {
        failures[idx] = "trial seed " + std::to_string(seed) + ": " + e.what();
      }
    }
  };

  const unsigned workers = detail::resolve_parallelism(settings.parallelism, seeds);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& f : failures) {
    if (!f.empty()) throw std::runtime_error(f);
  }
  for (auto& recs : per_seed) {
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  if (settings.record_iterate_norms) {
    out.mean_iterate_k_norms.assign(settings.total_steps + 1, 0.0);
    for (const auto& norms : per_seed_norms) {
      for (std::size_t i = 0; i < norms.size(); ++i) out.mean_iterate_k_norms[i] += norms[i];
    }
    for (double& v : out.mean_iterate_k_norms) v /= static_cast<double>(seeds);
  }
  return out;
}

struct Aggregate {
  std::uint64_t t = 0;
  double mean = 0.0;
  std::optional<double> se;  // absent with a single seed
  std::size_t count = 0;
};

// Per-checkpoint sample mean and standard error (stddev / sqrt(seeds)).
inline std::vector<Aggregate> aggregate(std::span<const ErrorRecord> records, Norm norm) {
  std::map<std::uint64_t, std::vector<double>> buckets;
  for (const auto& rec : records) {
    if (norm == Norm::Rho) {
      buckets[rec.t].push_back(rec.rho_sq);
    } else if (rec.k_sq) {
      buckets[rec.t].push_back(*rec.k_sq);
    }
  }
  std::vector<Aggregate> out;
  out.reserve(buckets.size());
  for (const auto& [t, vals] : buckets) {
    Aggregate a;
    a.t = t;
    a.count = vals.size();
    for (double v : vals) a.mean += v;
    a.mean /= static_cast<double>(vals.size());
    if (vals.size() >= 2) {
      double ss = 0.0;
      for (double v : vals) ss += (v - a.mean) * (v - a.mean);
      const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
      a.se = sd / std::sqrt(static_cast<double>(vals.size()));
    }
    out.push_back(a);
  }
  return out;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares on (ln t, ln mean) over checkpoints with t >= t_min.
inline RateFit fit_rate(std::span<const Aggregate> aggregates, double t_min) {
  std::vector<double> xs, ys;
  for (const auto& a : aggregates) {
    if (static_cast<double>(a.t) < t_min || a.t == 0) continue;
    if (!(a.mean > 0.0)) {
      throw std::runtime_error("fit_rate: non-positive mean at t = " + std::to_string(a.t));
    }
    xs.push_back(std::log(static_cast<double>(a.t)));
    ys.push_back(std::log(a.mean));
  }
  if (xs.size() < 3) {
    throw std::runtime_error("fit_rate: need at least 3 checkpoints at or above t_min");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += resid * resid;
  }
  if (syy <= 1e-30) {
    fit.r_squared = ss_res <= 1e-30 ? 1.0 : 0.0;
  } else {
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

struct BoundCheckpoint {
  std::uint64_t t = 0;
  double mean = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::optional<double> decomp_empirical;   // exact decomposition, measured iterate norms
  std::optional<double> decomp_uniform;     // exact decomposition, uniform norm bound
  std::optional<bool> sandwich_pass;
};

struct BoundReport {
  Norm norm = Norm::Rho;
  double c_first = 0.0;   // C_theta or C_kappa
  double c_second = 0.0;  // C_{beta,theta} or C-tilde_beta
  double c_full = 0.0;    // full envelope constant
  std::vector<BoundCheckpoint> checkpoints;
  bool all_pass = true;
};

// Pass criterion per checkpoint: mean + 2 SE <= envelope. When mean iterate
// norms were recorded (rho norm, theta > 1/2) the four-level chain
//   measured <= decomposition(empirical) <= decomposition(uniform) <= envelope
// is evaluated as well.
inline BoundReport compare_bounds(const Problem& problem, Norm norm,
                                  std::span<const Aggregate> aggregates,
                                  std::span<const double> mean_iterate_k_norms = {}) {
  const ProblemProfile& p = problem.profile;
  BoundReport report;
  report.norm = norm;
  if (norm == Norm::Rho) {
    const VarianceBound vb = variance_bound_rho(p, 3);
    report.c_first = vb.c_first;
    report.c_second = vb.c_second;
    report.c_full = theorem_bound(p, 1, Norm::Rho);
  } else {
    const VarianceBound vb = variance_bound_K(p, 3);
    report.c_first = vb.c_first;
    report.c_second = vb.c_second;
    report.c_full =
        p.u_norm_sq * std::pow(p.r / (kEulerE * p.eta1 * (2.0 - std::sqrt(2.0))),
                               2.0 * p.r - 1.0) +
        vb.c_second;
  }
  const bool sandwich =
      norm == Norm::Rho && !mean_iterate_k_norms.empty() && p.theta > 0.5;
  for (const auto& a : aggregates) {
    if (a.t < 3) continue;  // envelopes are stated for t >= 3
    BoundCheckpoint row;
    row.t = a.t;
    row.mean = a.mean;
    row.se = a.se.value_or(0.0);
    row.bound = theorem_bound(p, a.t, norm);
    row.pass = a.mean + 2.0 * row.se <= row.bound;
    if (sandwich) {
      if (mean_iterate_k_norms.size() < a.t) {
        throw std::invalid_argument("compare_bounds: iterate norms shorter than checkpoint");
      }
      row.decomp_empirical =
          decomposition_rhs(problem.spectrum(), problem.target, problem.schedule, p.kappa_sq,
                            p.M, a.t, norm, mean_iterate_k_norms);
      const auto uniform_norms = iterate_norm_bound_sequence(p, a.t);
      row.decomp_uniform =
          decomposition_rhs(problem.spectrum(), problem.target, problem.schedule, p.kappa_sq,
                            p.M, a.t, norm, uniform_norms);
      row.sandwich_pass = a.mean + 2.0 * row.se <= *row.decomp_empirical &&
                          *row.decomp_empirical <= *row.decomp_uniform &&
                          *row.decomp_uniform <= row.bound;
      if (!*row.sandwich_pass) report.all_pass = false;
    }
    if (!row.pass) report.all_pass = false;
    report.checkpoints.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

struct NormSeries {
  Norm norm = Norm::Rho;
  std::vector<Aggregate> aggregates;
  std::vector<double> bounds;  // aligned with aggregates; NaN where no envelope applies
  std::optional<RateFit> fit;
  double theory_exponent = 0.0;
};

// errors.csv columns: t,norm,mean,se,bound,seeds,algorithm. Decimal values are
// written with 12 significant digits; absent fields stay empty.
inline void write_errors_csv(const std::filesystem::path& path,
                             std::span<const NormSeries> series, std::uint64_t seeds,
                             Algorithm algorithm) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t,norm,mean,se,bound,seeds,algorithm\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.aggregates.size(); ++i) {
      const auto& a = s.aggregates[i];
      out << a.t << ',' << norm_name(s.norm) << ',' << detail::fmt12(a.mean) << ',';
      if (a.se) out << detail::fmt12(*a.se);
      out << ',';
      const double b = i < s.bounds.size() ? s.bounds[i] : std::nan("");
      if (std::isfinite(b)) out << detail::fmt12(b);
      out << ',' << seeds << ',' << algorithm_name(algorithm) << '\n';
    }
  }
}

inline void write_fit_csv(const std::filesystem::path& path,
                          std::span<const NormSeries> series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "norm,slope,intercept,r_squared,theory_exponent\n";
  for (const auto& s : series) {
    if (!s.fit) continue;
    out << norm_name(s.norm) << ',' << detail::fmt12(s.fit->slope) << ','
        << detail::fmt12(s.fit->intercept) << ',' << detail::fmt12(s.fit->r_squared) << ','
        << detail::fmt12(s.theory_exponent) << '\n';
  }
}

namespace detail {

struct SvgSeries {
  std::string label;
  std::string color;
  std::string dash;  // empty = solid
  std::vector<std::pair<double, double>> points;  // (t, value), both positive
};

inline void write_svg(const std::filesystem::path& path,
                      const std::vector<SvgSeries>& series) {
  constexpr double kW = 760.0, kH = 520.0;
  constexpr double kL = 70.0, kR = 20.0, kT = 24.0, kB = 48.0;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [t, v] : s.points) {
      xmin = std::min(xmin, std::log10(t));
      xmax = std::max(xmax, std::log10(t));
      ymin = std::min(ymin, std::log10(v));
      ymax = std::max(ymax, std::log10(v));
    }
  }
  if (!(xmin <= xmax)) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
  const auto px = [&](double lx) { return kL + (lx - xmin) / (xmax - xmin) * (kW - kL - kR); };
  const auto py = [&](double ly) {
    return kH - kB - (ly - ymin) / (ymax - ymin) * (kH - kT - kB);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
      << kH - kB << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax));
       ++e) {
    const double x = px(e);
    out << "<line x1=\"" << x << "\" y1=\"" << kH - kB << "\" x2=\"" << x << "\" y2=\""
        << kH - kB + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << kH - kB + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax));
       ++e) {
    const double y = py(e);
    out << "<line x1=\"" << kL - 5 << "\" y1=\"" << y << "\" x2=\"" << kL << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kL - 8 << "\" y=\"" << y + 4
        << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">t (steps)</text>\n";
  out << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kT + kH - kB) / 2 << ")\">squared error</text>\n";
  double legend_y = kT + 12;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\"";
    if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << "\"";
    out << " points=\"";
    for (const auto& [t, v] : s.points) {
      out << px(std::log10(t)) << ',' << py(std::log10(v)) << ' ';
    }
    out << "\"/>\n";
    out << "<line x1=\"" << kW - kR - 150 << "\" y1=\"" << legend_y - 4 << "\" x2=\""
        << kW - kR - 126 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << s.color << "\"";
    if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << "\"";
    out << "/>\n";
    out << "<text x=\"" << kW - kR - 120 << "\" y=\"" << legend_y << "\" font-size=\"11\">"
        << s.label << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
}

}  // namespace detail

inline void write_plot_svg(const std::filesystem::path& path,
                           std::span<const NormSeries> series) {
  static const char* kColors[] = {"#1f6fb2", "#c23b22"};
  std::vector<detail::SvgSeries> svg;
  for (const auto& s : series) {
    const char* color = s.norm == Norm::Rho ? kColors[0] : kColors[1];
    detail::SvgSeries mean_line{std::string(norm_name(s.norm)) + " mean", color, "", {}};
    detail::SvgSeries band_line{std::string(norm_name(s.norm)) + " mean+2se", color, "4 3", {}};
    detail::SvgSeries bound_line{std::string(norm_name(s.norm)) + " bound", color, "1 4", {}};
    for (std::size_t i = 0; i < s.aggregates.size(); ++i) {
      const auto& a = s.aggregates[i];
      if (a.t == 0) continue;
      const double t = static_cast<double>(a.t);
      if (a.mean > 0.0) mean_line.points.emplace_back(t, a.mean);
      const double up = a.mean + 2.0 * a.se.value_or(0.0);
      if (up > 0.0) band_line.points.emplace_back(t, up);
      if (i < s.bounds.size() && std::isfinite(s.bounds[i]) && s.bounds[i] > 0.0) {
        bound_line.points.emplace_back(t, s.bounds[i]);
      }
    }
    for (auto& line : {mean_line, band_line, bound_line}) {
      if (line.points.size() >= 2) svg.push_back(line);
    }
  }
  detail::write_svg(path, svg);
}

inline void write_outputs(const std::filesystem::path& out_dir,
                          std::span<const NormSeries> series, std::uint64_t seeds,
                          Algorithm algorithm) {
  std::filesystem::create_directories(out_dir);
  write_errors_csv(out_dir / "errors.csv", series, seeds, algorithm);
  write_fit_csv(out_dir / "fit.csv", series);
  write_plot_svg(out_dir / "errors.svg", series);
}

// Reads errors.csv back into per-norm aggregates (round-trip checks, tools).
inline std::vector<NormSeries> read_errors_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "t,norm,mean,se,bound,seeds,algorithm") {
    throw std::runtime_error("errors.csv: unexpected header");
  }
  NormSeries rho{Norm::Rho, {}, {}, std::nullopt, 0.0};
  NormSeries kn{Norm::K, {}, {}, std::nullopt, 0.0};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[7];
    for (int i = 0; i < 7; ++i) std::getline(ss, f[i], ',');
    Aggregate a;
    a.t = std::stoull(f[0]);
    a.mean = std::stod(f[2]);
    if (!f[3].empty()) a.se = std::stod(f[3]);
    a.count = std::stoull(f[5]);
    const double bound = f[4].empty() ? std::nan("") : std::stod(f[4]);
    if (f[1] == "rho") {
      rho.aggregates.push_back(a);
      rho.bounds.push_back(bound);
    } else {
      kn.aggregates.push_back(a);
      kn.bounds.push_back(bound);
    }
  }
  std::vector<NormSeries> out;
  if (!rho.aggregates.empty()) out.push_back(std::move(rho));
  if (!kn.aggregates.empty()) out.push_back(std::move(kn));
  return out;
}

}  // namespace okl
