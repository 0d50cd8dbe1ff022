#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "okl/bounds.hpp"
#include "okl/model.hpp"
#include "okl/rng.hpp"
#include "okl/schedule.hpp"

namespace okl {

// Exact finite-dimensional operator calculus on the diagonal spectral model.
// Every quantity here is a per-eigenvalue scalar product, so "brute force"
// means exact, not approximate.

namespace detail {

// Order-stable compensated accumulation.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// prod_{j=lo..hi} (1 - eta_j s). Factors are non-decreasing in j for the
// decaying schedules, so the smallest factor sits at j = lo; when it drops
// below 1e-8 the whole product is accumulated in log space.
inline double contraction_product(const StepSchedule& schedule, std::uint64_t lo,
                                  std::uint64_t hi, double s) {
  if (lo > hi) return 1.0;
  const double first = 1.0 - schedule.eta(lo) * s;
  if (first < 0.0) {
    throw std::domain_error("contraction_product: factor below zero, eta * sigma >= 1");
  }
  if (first < 1e-8) {
    double logsum = 0.0;
    for (std::uint64_t j = lo; j <= hi; ++j) {
      const double f = 1.0 - schedule.eta(j) * s;
      if (f <= 0.0) return 0.0;
      logsum += std::log(f);
    }
    return std::exp(logsum);
  }
  double prod = 1.0;
  for (std::uint64_t j = lo; j <= hi; ++j) {
    prod *= 1.0 - schedule.eta(j) * s;
  }
  return prod;
}

}  // namespace detail

// Deterministic part of the error decomposition:
//   rho: sum_k c_k^2 prod_{i<=t} (1 - eta_i sigma_k)^2
//   K:   sum_k (c_k^2 / sigma_k) prod_{i<=t} (1 - eta_i sigma_k)^2.
inline double bias_exact(const Spectrum& spectrum, const TargetFunction& target,
                         const StepSchedule& schedule, std::uint64_t t, Norm norm) {
  const auto c = target.coefficients();
  if (c.size() != spectrum.rank()) throw std::invalid_argument("bias_exact: rank mismatch");
  detail::KahanSum sum;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double p = detail::contraction_product(schedule, 1, t, spectrum.sigma(k));
    double term = c[k] * p;
    term *= term;
    if (norm == Norm::K) term /= spectrum.sigma(k);
    sum.add(term);
  }
  return sum.value();
}

// sum_k sigma_k^p prod_{j=i+1..t} (1 - eta_j sigma_k)^2 with p in {1, 2}.
inline double trace_term_exact(const Spectrum& spectrum, const StepSchedule& schedule,
                               std::uint64_t i, std::uint64_t t, int power) {
  if (power != 1 && power != 2) throw std::invalid_argument("trace_term_exact: power in {1,2}");
  if (i < 1 || i > t) throw std::out_of_range("trace_term_exact: need 1 <= i <= t");
  detail::KahanSum sum;
  for (std::size_t k = 0; k < spectrum.rank(); ++k) {
    const double s = spectrum.sigma(k);
    const double p = detail::contraction_product(schedule, i + 1, t, s);
    sum.add((power == 2 ? s * s : s) * p * p);
  }
  return sum.value();
}

// Stochastic part of the error decomposition:
//   sum_{i<=t} eta_i^2 2(kappa^2 N_i + M^2) sum_k sigma_k^p prod_{j>i} (1-eta_j sigma_k)^2
// with p = 2 for the rho norm and p = 1 for the kernel norm. N_i supplies
// E||f_i||^2_K (empirical averages or the uniform bound sequence below).
// Computed with one reverse sweep of per-eigenvalue suffix products.
inline double decomposition_variance(const Spectrum& spectrum, const StepSchedule& schedule,
                                     double kappa_sq, double M, std::uint64_t t, Norm norm,
                                     std::span<const double> iterate_k_norms) {
  if (iterate_k_norms.size() < t) {
    throw std::invalid_argument("decomposition_variance: need an iterate norm for each step");
  }
  const int p = norm == Norm::Rho ? 2 : 1;
  const std::size_t n = spectrum.rank();
  std::vector<double> suffix(n, 1.0);
  detail::KahanSum total;
  for (std::uint64_t i = t; i >= 1; --i) {
    detail::KahanSum trace;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = spectrum.sigma(k);
      trace.add((p == 2 ? s * s : s) * suffix[k] * suffix[k]);
    }
    const double eta = schedule.eta(i);
    total.add(eta * eta * 2.0 * (kappa_sq * iterate_k_norms[i - 1] + M * M) * trace.value());
    for (std::size_t k = 0; k < n; ++k) {
      suffix[k] *= 1.0 - eta * spectrum.sigma(k);
    }
  }
  return total.value();
}

inline double decomposition_rhs(const Spectrum& spectrum, const TargetFunction& target,
                                const StepSchedule& schedule, double kappa_sq, double M,
                                std::uint64_t t, Norm norm,
                                std::span<const double> iterate_k_norms) {
  return bias_exact(spectrum, target, schedule, t, norm) +
         decomposition_variance(spectrum, schedule, kappa_sq, M, t, norm, iterate_k_norms);
}

// N_i sequence from the uniform iterate-norm bound, valid for theta > 1/2
// where the bound is a single t-independent constant. The theta = 1/2 branch
// carries a ln t normalization that is vacuous for small t, so the sequence
// form is not offered there.
inline std::vector<double> iterate_norm_bound_sequence(const ProblemProfile& p,
                                                       std::uint64_t t) {
  if (!(p.theta > 0.5)) {
    throw std::invalid_argument(
        "iterate_norm_bound_sequence: uniform sequence requires theta > 1/2");
  }
  return std::vector<double>(t, iterate_norm_bound(p, 1));
}

// Conjugation preserves the operator order: A >= B implies C^T A C >= C^T B C.
// Random trials with a constructed PSD gap; passes when the smallest
// eigenvalue of C^T (A - B) C never dips below -1e-10 * scale.
inline bool psd_transform_check(int dim, int n_trials, std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("psd_transform_check: dim must be >= 2");
  Rng rng(seed);
  const auto fill = [&](Eigen::MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    }
  };
  Eigen::MatrixXd g(dim, dim), h(dim, dim), cmat(dim, dim);
  for (int trial = 0; trial < n_trials; ++trial) {
    fill(g);
    fill(h);
    fill(cmat);
    const Eigen::MatrixXd gap = h.transpose() * h;  // A - B
    Eigen::MatrixXd d = cmat.transpose() * gap * cmat;
    d = 0.5 * (d + d.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lo < -1e-10 * std::max(1.0, hi)) return false;
  }
  return true;
}

struct QuadratureOptions {
  int initial_panels = 4;
  int max_doublings = 16;
  double rel_tol = 1e-6;
  double abs_tol = 0.0;  // floor for integrals that vanish
};

struct QuadraturePrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Composite Gauss-Legendre over [0,1] with panel doubling until two
// successive refinements agree to rel_tol.
template <typename F>
double integrate_unit(const F& f, const QuadratureOptions& opt) {
  const auto composite = [&](int panels) {
    KahanSum sum;
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
      sum.add(boost::math::quadrature::gauss<double, 10>::integrate(f, p * h, (p + 1) * h));
    }
    return sum.value();
  };
  int panels = opt.initial_panels;
  double prev = composite(panels);
  for (int d = 0; d < opt.max_doublings; ++d) {
    panels *= 2;
    const double cur = composite(panels);
    if (std::abs(cur - prev) <= std::max(opt.rel_tol * std::abs(cur), opt.abs_tol)) {
      return cur;
    }
    prev = cur;
  }
  throw QuadraturePrecisionError("quadrature: panel doubling did not converge");
}

}  // namespace detail

// One instance of the residual second-moment domination: for a fixed
// function f (in place of the running iterate) and a probe h given by its
// coordinates in the K-orthonormal basis {sqrt(sigma_k) phi_k},
//   E[(f(x) - y)^2 h(x)^2] <= 2 (kappa^2 ||f||^2_K + M^2) sum_k sigma_k g_k^2.
// The x-average is evaluated by quadrature, the bounded noise exactly.
inline bool residual_domination_single(const Spectrum& spectrum, const DataModel& data,
                                       std::span<const double> f_coeffs,
                                       std::span<const double> probe,
                                       QuadratureOptions opt = {}) {
  const std::size_t n = spectrum.rank();
  if (f_coeffs.size() != n || probe.size() != n) {
    throw std::invalid_argument("residual_domination: coefficient count mismatch");
  }
  std::vector<double> h_coeffs(n);
  double f_k_norm_sq = 0.0;
  double probe_weight = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    h_coeffs[k] = probe[k] * std::sqrt(spectrum.sigma(k));
    f_k_norm_sq += f_coeffs[k] * f_coeffs[k] / spectrum.sigma(k);
    probe_weight += spectrum.sigma(k) * probe[k] * probe[k];
  }
  const auto c = data.target().coefficients();
  const double noise_sq = data.noise_risk();
  std::vector<double> basis(n);
  const auto integrand = [&](double x) {
    eigenbasis(x, basis);
    double gap = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      gap += (f_coeffs[k] - c[k]) * basis[k];
      h += h_coeffs[k] * basis[k];
    }
    return (gap * gap + noise_sq) * h * h;
  };
  const double lhs = detail::integrate_unit(integrand, opt);
  const double kap = kappa_sq(spectrum);
  const double M = data.output_bound();
  const double rhs = 2.0 * (kap * f_k_norm_sq + M * M) * probe_weight;
  return lhs <= rhs * (1.0 + 1e-8);
}

// Driver over random (f, probe) pairs drawn from a seeded stream.
inline bool residual_domination_check(const Spectrum& spectrum, const DataModel& data,
                                      int n_pairs, std::uint64_t seed,
                                      QuadratureOptions opt = {}) {
  Rng rng(seed);
  const std::size_t n = spectrum.rank();
  std::vector<double> f(n), probe(n);
  for (int pair = 0; pair < n_pairs; ++pair) {
    for (std::size_t k = 0; k < n; ++k) {
      f[k] = spectrum.sigma(k) * rng.uniform(-1.0, 1.0);
      probe[k] = rng.uniform(-1.0, 1.0);
    }
    if (!residual_domination_single(spectrum, data, f, probe, opt)) return false;
  }
  return true;
}

}  // namespace okl
