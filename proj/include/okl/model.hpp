#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "okl/rng.hpp"

namespace okl {

// Orthonormal cosine basis of L^2([0,1], dx):
//   phi_0(x) = 1,  phi_k(x) = sqrt(2) cos(k pi x)  for k >= 1.
// Fills out[0..n). cos(k pi x) is generated by the Chebyshev three-term
// recurrence, which keeps the per-step cost at two flops per coordinate.
inline void eigenbasis(double x, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0) return;
  out[0] = 1.0;
  if (n == 1) return;
  constexpr double kSqrt2 = 1.4142135623730951;
  const double c1 = std::cos(3.141592653589793238462643383279502884 * x);
  double prev2 = 1.0;
  double prev1 = c1;
  out[1] = kSqrt2 * c1;
  for (std::size_t k = 2; k < n; ++k) {
    const double ck = 2.0 * c1 * prev1 - prev2;
    out[k] = kSqrt2 * ck;
    prev2 = prev1;
    prev1 = ck;
  }
}

enum class DecayKind { Power, Exponential, Custom };

struct DecayLabel {
  DecayKind kind = DecayKind::Custom;
  double param = 0.0;  // b for Power (sigma_k = scale (k+1)^{-1/b}), q for Exponential
};

// Finite-rank eigenvalue sequence sigma_0 >= sigma_1 >= ... > 0 of the
// kernel integral operator in the cosine basis.
class Spectrum {
 public:
  static Spectrum power(std::size_t n, double b, double scale) {
    if (n < 1) throw std::invalid_argument("spectrum: rank must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("spectrum: scale must be positive");
    if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("spectrum: power decay needs b in (0,1)");
    std::vector<double> ev(n);
    for (std::size_t k = 0; k < n; ++k) {
      ev[k] = scale * std::pow(static_cast<double>(k + 1), -1.0 / b);
    }
    return Spectrum(std::move(ev), {DecayKind::Power, b});
  }

  static Spectrum exponential(std::size_t n, double q, double scale) {
    if (n < 1) throw std::invalid_argument("spectrum: rank must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("spectrum: scale must be positive");
    if (!(q > 0.0)) throw std::invalid_argument("spectrum: exponential decay needs q > 0");
    std::vector<double> ev(n);
    for (std::size_t k = 0; k < n; ++k) {
      ev[k] = scale * std::exp(-q * static_cast<double>(k));
    }
    return Spectrum(std::move(ev), {DecayKind::Exponential, q});
  }

  static Spectrum custom(std::vector<double> eigenvalues) {
    return Spectrum(std::move(eigenvalues), {DecayKind::Custom, 0.0});
  }

  std::size_t rank() const { return eigenvalues_.size(); }
  double sigma(std::size_t k) const { return eigenvalues_[k]; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  const DecayLabel& label() const { return label_; }

  double trace() const {
    return std::accumulate(eigenvalues_.begin(), eigenvalues_.end(), 0.0);
  }

 private:
  Spectrum(std::vector<double> ev, DecayLabel label)
      : eigenvalues_(std::move(ev)), label_(label) {
    if (eigenvalues_.empty()) throw std::invalid_argument("spectrum: rank must be >= 1");
    for (std::size_t k = 0; k < eigenvalues_.size(); ++k) {
      if (!(eigenvalues_[k] > 0.0)) {
        throw std::invalid_argument("spectrum: eigenvalues must be strictly positive");
      }
      if (k > 0 && eigenvalues_[k] > eigenvalues_[k - 1]) {
        throw std::invalid_argument("spectrum: eigenvalues must be non-increasing");
      }
    }
  }

  std::vector<double> eigenvalues_;
  DecayLabel label_;
};

inline Spectrum build_spectrum(const DecayLabel& label, std::size_t n, double scale) {
  switch (label.kind) {
    case DecayKind::Power:
      return Spectrum::power(n, label.param, scale);
    case DecayKind::Exponential:
      return Spectrum::exponential(n, label.param, scale);
    default:
      throw std::invalid_argument("build_spectrum: custom spectra carry their own eigenvalues");
  }
}

// Tr(L_K^beta) = sum_k sigma_k^beta; beta = 0 is the rank count.
inline double capacity_trace(const Spectrum& spectrum, double beta) {
  if (beta < 0.0) throw std::invalid_argument("capacity_trace: beta must be >= 0");
  if (beta == 0.0) return static_cast<double>(spectrum.rank());
  double sum = 0.0;
  for (double s : spectrum.eigenvalues()) sum += std::pow(s, beta);
  return sum;
}

namespace detail {

// sigma_k <= k^{-1/beta} (sum_j sigma_j^beta)^{1/beta} for k = 1..n (1-indexed).
// Exposed on a raw list so the check can also be exercised on sequences that
// break the non-increasing ordering a Spectrum enforces.
inline bool eigen_decay_holds(std::span<const double> eigenvalues, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("eigen_decay_bound: beta must lie in (0,1)");
  }
  double trace_beta = 0.0;
  for (double s : eigenvalues) trace_beta += std::pow(s, beta);
  const double rhs_scale = std::pow(trace_beta, 1.0 / beta);
  for (std::size_t k = 1; k <= eigenvalues.size(); ++k) {
    const double rhs = std::pow(static_cast<double>(k), -1.0 / beta) * rhs_scale;
    if (eigenvalues[k - 1] > rhs * (1.0 + 1e-12)) return false;
  }
  return true;
}

}  // namespace detail

inline bool eigen_decay_bound(const Spectrum& spectrum, double beta) {
  return detail::eigen_decay_holds(spectrum.eigenvalues(), beta);
}

// K(x,x') = exp(-(x-x')^2 / (2 width^2)) on [0,1].
struct GaussianKernel {
  double width = 1.0;
};

// K(x,x') = (x x' + offset)^degree on [0,1].
struct PolynomialKernel {
  int degree = 1;
  double offset = 0.0;
};

// Mercer kernel on [0,1]. The spectral variant is
//   K(x,x') = sum_k sigma_k phi_k(x) phi_k(x'),
// diagonal in the cosine basis; the closed-form variants support prediction
// and Monte Carlo risk only.
class KernelModel {
 public:
  explicit KernelModel(Spectrum spectrum) : variant_(std::move(spectrum)) {}
  explicit KernelModel(GaussianKernel g) : variant_(g) {
    if (!(g.width > 0.0)) throw std::invalid_argument("kernel: gaussian width must be positive");
  }
  explicit KernelModel(PolynomialKernel p) : variant_(p) {
    if (p.degree < 1) throw std::invalid_argument("kernel: polynomial degree must be >= 1");
    if (p.offset < 0.0) throw std::invalid_argument("kernel: polynomial offset must be >= 0");
  }

  bool is_spectral() const { return std::holds_alternative<Spectrum>(variant_); }

  const Spectrum& spectrum() const {
    if (!is_spectral()) throw std::logic_error("kernel: no spectrum for closed-form variants");
    return std::get<Spectrum>(variant_);
  }

  static bool in_domain(double x) { return x >= 0.0 && x <= 1.0; }

  double eval(double x, double xp) const {
    if (!in_domain(x) || !in_domain(xp)) {
      throw std::domain_error("kernel: point outside [0,1]");
    }
    if (const auto* sp = std::get_if<Spectrum>(&variant_)) {
      const std::size_t n = sp->rank();
      std::vector<double> bx(n), by(n);
      eigenbasis(x, bx);
      eigenbasis(xp, by);
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) sum += sp->sigma(k) * bx[k] * by[k];
      return sum;
    }
    if (const auto* g = std::get_if<GaussianKernel>(&variant_)) {
      const double d = x - xp;
      return std::exp(-d * d / (2.0 * g->width * g->width));
    }
    const auto& p = std::get<PolynomialKernel>(variant_);
    return std::pow(x * xp + p.offset, p.degree);
  }

  // kappa^2 = sup_x K(x,x). For the spectral variant the supremum is attained
  // at x = 0 where every cos^2(k pi x) equals 1: kappa^2 = sigma_0 + 2 sum_{k>=1} sigma_k.
  double kappa_sq() const {
    if (const auto* sp = std::get_if<Spectrum>(&variant_)) {
      double sum = sp->sigma(0);
      for (std::size_t k = 1; k < sp->rank(); ++k) sum += 2.0 * sp->sigma(k);
      return sum;
    }
    if (std::holds_alternative<GaussianKernel>(variant_)) return 1.0;
    const auto& p = std::get<PolynomialKernel>(variant_);
    return std::pow(1.0 + p.offset, p.degree);
  }

 private:
  std::variant<Spectrum, GaussianKernel, PolynomialKernel> variant_;
};

inline double kernel_eval(const KernelModel& kernel, double x, double xp) {
  return kernel.eval(x, xp);
}

inline double kappa_sq(const KernelModel& kernel) { return kernel.kappa_sq(); }

inline double kappa_sq(const Spectrum& spectrum) {
  double sum = spectrum.sigma(0);
  for (std::size_t k = 1; k < spectrum.rank(); ++k) sum += 2.0 * spectrum.sigma(k);
  return sum;
}

// Regression target f = sum_k c_k phi_k with c_k = sigma_k^r u_k, which makes
// the expansion coefficients decay like the r-th operator power applied to u.
// r > 1/2 guarantees finite K-norm.
class TargetFunction {
 public:
  std::span<const double> coefficients() const { return coefficients_; }
  std::span<const double> source_coefficients() const { return source_; }
  double regularity() const { return regularity_; }

  double rho_norm_sq() const { return rho_norm_sq_; }
  double k_norm_sq() const { return k_norm_sq_; }
  double u_norm_sq() const { return u_norm_sq_; }

  double eval(double x) const {
    if (!KernelModel::in_domain(x)) throw std::domain_error("target: point outside [0,1]");
    std::vector<double> basis(coefficients_.size());
    eigenbasis(x, basis);
    double sum = 0.0;
    for (std::size_t k = 0; k < coefficients_.size(); ++k) sum += coefficients_[k] * basis[k];
    return sum;
  }

  friend TargetFunction make_target(const Spectrum&, double, std::vector<double>);

 private:
  TargetFunction() = default;

  std::vector<double> coefficients_;
  std::vector<double> source_;
  double regularity_ = 0.0;
  double rho_norm_sq_ = 0.0;
  double k_norm_sq_ = 0.0;
  double u_norm_sq_ = 0.0;
};

inline TargetFunction make_target(const Spectrum& spectrum, double r, std::vector<double> u) {
  if (!(r > 0.5)) {
    throw std::invalid_argument("make_target: regularity r must exceed 1/2");
  }
  if (u.size() != spectrum.rank()) {
    throw std::invalid_argument("make_target: source coefficient count must match rank");
  }
  TargetFunction t;
  t.regularity_ = r;
  t.source_ = std::move(u);
  t.coefficients_.resize(t.source_.size());
  for (std::size_t k = 0; k < t.source_.size(); ++k) {
    const double c = std::pow(spectrum.sigma(k), r) * t.source_[k];
    t.coefficients_[k] = c;
    t.rho_norm_sq_ += c * c;
    t.k_norm_sq_ += c * c / spectrum.sigma(k);
    t.u_norm_sq_ += t.source_[k] * t.source_[k];
  }
  return t;
}

inline double target_eval(const TargetFunction& target, double x) { return target.eval(x); }

// Sampling law: x uniform on [0,1], y = f(x) + eps with eps uniform on
// [-s, s]. The noise is bounded, mean zero, with E[eps^2] = s^2/3, so
// |y| <= M holds almost surely for M = sup|f| + s.
class DataModel {
 public:
  DataModel(TargetFunction target, double noise_halfwidth, std::uint64_t seed)
      : target_(std::move(target)), noise_halfwidth_(noise_halfwidth), seed_(seed) {
    if (noise_halfwidth_ < 0.0) {
      throw std::invalid_argument("data model: noise halfwidth must be >= 0");
    }
    output_bound_ = target_sup_bound() + noise_halfwidth_;
  }

  const TargetFunction& target() const { return target_; }
  double noise_halfwidth() const { return noise_halfwidth_; }
  std::uint64_t seed() const { return seed_; }

  // M: almost-sure bound on |y|.
  double output_bound() const { return output_bound_; }

  // E(f_rho) = E[eps^2] = s^2/3.
  double noise_risk() const { return noise_halfwidth_ * noise_halfwidth_ / 3.0; }

  std::pair<double, double> sample(Rng& rng) const {
    const double x = rng.uniform01();
    double y = target_.eval(x);
    if (noise_halfwidth_ > 0.0) y += rng.symmetric(noise_halfwidth_);
    return {x, y};
  }

 private:
  // Certified upper bound on sup_x |f(x)|: dense grid maximum plus the
  // Lipschitz slack L h / 2 with L = sqrt(2) pi sum_k k |c_k|. The result
  // never underestimates the true supremum.
  double target_sup_bound() const {
    const auto c = target_.coefficients();
    const std::size_t n = c.size();
    double lipschitz = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      lipschitz += 1.4142135623730951 * 3.14159265358979324 * static_cast<double>(k) * std::abs(c[k]);
    }
    const std::size_t m = 4096 + 16 * n;
    std::vector<double> basis(n);
    double grid_max = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(m);
      eigenbasis(x, basis);
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += c[k] * basis[k];
      grid_max = std::max(grid_max, std::abs(v));
    }
    return grid_max + lipschitz / (2.0 * static_cast<double>(m));
  }

  TargetFunction target_;
  double noise_halfwidth_;
  std::uint64_t seed_;
  double output_bound_;
};

inline std::pair<double, double> sample_pair(const DataModel& model, Rng& rng) {
  return model.sample(rng);
}

}  // namespace okl
