#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace okl {

enum class Norm { Rho, K };

inline const char* norm_name(Norm n) { return n == Norm::Rho ? "rho" : "k"; }

// Everything the printed constants depend on. Norm fields are squared.
struct ProblemProfile {
  double r = 1.0;         // source regularity
  double beta = 1.0;      // capacity index
  double eta1 = 0.5;      // step scale
  double theta = 0.5;     // decay exponent
  double kappa_sq = 1.0;  // sup_x K(x,x)
  double M = 0.0;         // almost-sure output bound
  double rho_norm_sq = 0.0;  // ||f_rho||^2_rho
  double k_norm_sq = 0.0;    // ||f_rho||^2_K
  double u_norm_sq = 0.0;    // ||u_rho||^2_rho
  double noise_risk = 0.0;   // E(f_rho)
  double trace_beta = 0.0;   // Tr(L_K^beta)
};

struct BranchMismatchError : std::domain_error {
  using std::domain_error::domain_error;
};

constexpr double kEulerE = 2.718281828459045235;

// Exact partial sums of eta_i = eta1 i^{-theta} together with their
// closed-form envelopes:
//   lower_a <= sum_{i<=t} eta_i <= upper_a,   sum_{i<=t} eta_i^2 <= sumsq_bound.
// The envelopes are proved for t >= 3; below that the sums are still exact
// but `envelopes_valid` is cleared.
struct StepSums {
  double sum = 0.0;
  double lower_a = 0.0;
  double upper_a = 0.0;
  double sumsq = 0.0;
  double sumsq_bound = 0.0;
  bool envelopes_valid = true;
};

inline StepSums stepsum_bounds(double eta1, double theta, std::uint64_t t) {
  if (!(eta1 > 0.0)) throw std::invalid_argument("stepsum_bounds: eta1 must be positive");
  if (!(theta >= 0.5 && theta < 1.0)) {
    throw std::invalid_argument("stepsum_bounds: theta must lie in [1/2, 1)");
  }
  if (t < 1) throw std::invalid_argument("stepsum_bounds: t must be >= 1");
  StepSums out;
  for (std::uint64_t i = 1; i <= t; ++i) {
    const double eta = eta1 * std::pow(static_cast<double>(i), -theta);
    out.sum += eta;
    out.sumsq += eta * eta;
  }
  const double td = static_cast<double>(t);
  out.lower_a = eta1 * (1.0 - std::pow(2.0, theta - 1.0)) / (1.0 - theta) *
                std::pow(td, 1.0 - theta);
  out.upper_a = eta1 / (1.0 - theta) * std::pow(td, 1.0 - theta);
  out.sumsq_bound = theta > 0.5 ? 2.0 * eta1 * eta1 * theta / (2.0 * theta - 1.0)
                                : 2.0 * eta1 * eta1 * std::log(td);
  out.envelopes_valid = t >= 3;
  return out;
}

// Lower envelope of the tail sum: sum_{j=i+1..t} eta_j >=
//   (eta1/(1-theta)) ((t+1)^{1-theta} - (i+1)^{1-theta}).
inline double stepsum_tail_lower(double eta1, double theta, std::uint64_t i, std::uint64_t t) {
  if (i > t) throw std::out_of_range("stepsum_tail_lower: i must not exceed t");
  return eta1 / (1.0 - theta) *
         (std::pow(static_cast<double>(t + 1), 1.0 - theta) -
          std::pow(static_cast<double>(i + 1), 1.0 - theta));
}

// Uniform bound on E||f_{t+1}||^2_K along the unregularized recursion.
inline double iterate_norm_bound(const ProblemProfile& p, std::uint64_t t) {
  if (!(p.theta >= 0.5 && p.theta < 1.0)) {
    throw std::invalid_argument("iterate_norm_bound: theta must lie in [1/2, 1)");
  }
  const double drive = 20.0 * p.rho_norm_sq + 3.0 * p.noise_risk;
  if (p.theta > 0.5) {
    return 4.0 * p.k_norm_sq +
           (4.0 * p.theta * p.eta1 * p.eta1 * p.kappa_sq / (2.0 * p.theta - 1.0)) * drive;
  }
  return (4.0 * p.k_norm_sq + 4.0 * p.eta1 * p.eta1 * p.kappa_sq * drive) *
         std::log(static_cast<double>(t));
}

// Bias envelope in the rho norm:
//   ||u||^2 (r(1-theta) / (e eta1 (1-2^{theta-1})))^{2r} t^{-2r(1-theta)}.
inline double bias_bound_rho(const ProblemProfile& p, std::uint64_t t) {
  if (!(p.r > 0.5)) throw std::invalid_argument("bias_bound_rho: r must exceed 1/2");
  const double base =
      p.r * (1.0 - p.theta) / (kEulerE * p.eta1 * (1.0 - std::pow(2.0, p.theta - 1.0)));
  return p.u_norm_sq * std::pow(base, 2.0 * p.r) *
         std::pow(static_cast<double>(t), -2.0 * p.r * (1.0 - p.theta));
}

// Bias envelope in the kernel norm (theta = 1/2 schedule):
//   ||u||^2 (r / (e eta1 (2-sqrt 2)))^{2r-1} t^{-(2r-1)/2}.
inline double bias_bound_K(const ProblemProfile& p, std::uint64_t t) {
  if (!(p.r > 0.5)) throw std::invalid_argument("bias_bound_K: r must exceed 1/2");
  if (std::abs(p.theta - 0.5) > 1e-12) {
    throw std::invalid_argument("bias_bound_K: requires theta = 1/2");
  }
  const double base = p.r / (kEulerE * p.eta1 * (2.0 - std::sqrt(2.0)));
  return p.u_norm_sq * std::pow(base, 2.0 * p.r - 1.0) *
         std::pow(static_cast<double>(t), -0.5 * (2.0 * p.r - 1.0));
}

struct VarianceBound {
  double c_first = 0.0;   // C_theta (rho) or C_kappa (K)
  double c_second = 0.0;  // C_{beta,theta} (rho) or C-tilde_beta (K)
  double value = 0.0;
};

// Variance envelope in the rho norm: C_{beta,theta} t^{-min{(2-beta)(1-theta), theta}}.
inline VarianceBound variance_bound_rho(const ProblemProfile& p, std::uint64_t t) {
  if (!(p.theta > 0.5 && p.theta < 1.0)) {
    throw std::invalid_argument("variance_bound_rho: theta must lie in (1/2, 1)");
  }
  if (p.beta < 0.0 || p.beta >= 1.0) {
    throw std::invalid_argument(
        "variance_bound_rho: beta must lie in [0,1); the beta = 1 constant degenerates, "
        "use the capacity-independent comparison instead");
  }
  const double drive = 20.0 * p.rho_norm_sq + 3.0 * p.noise_risk;
  VarianceBound out;
  out.c_first = 8.0 * p.kappa_sq * p.k_norm_sq +
                (8.0 * p.theta * p.eta1 * p.eta1 * p.kappa_sq / (2.0 * p.theta - 1.0)) * drive +
                2.0 * p.M * p.M;
  const double two_minus_beta = 2.0 - p.beta;
  const double sup_term = std::pow(two_minus_beta / (2.0 * kEulerE), two_minus_beta) +
                          std::pow(p.kappa_sq, two_minus_beta);  // kappa^{4-2beta}
  const double head = std::pow((1.0 - p.theta) / (1.0 - std::pow(2.0, p.theta - 1.0)),
                               two_minus_beta) *
                      (2.0 * p.eta1 * p.eta1 * p.theta / (2.0 * p.theta - 1.0));
  const double tail = 3.0 * p.eta1 * std::pow(4.0, p.theta) * two_minus_beta / (1.0 - p.beta);
  out.c_second =
      out.c_first * (p.eta1 * p.eta1 * p.kappa_sq * p.kappa_sq +
                     2.0 * p.trace_beta * sup_term * (head + tail));
  const double expo = std::min(two_minus_beta * (1.0 - p.theta), p.theta);
  out.value = out.c_second * std::pow(static_cast<double>(t), -expo);
  return out;
}

// Variance envelope in the kernel norm (theta = 1/2 schedule):
//   C-tilde_beta t^{-(1-beta)/2} (ln t)^2.
inline VarianceBound variance_bound_K(const ProblemProfile& p, std::uint64_t t) {
  if (std::abs(p.theta - 0.5) > 1e-12) {
    throw std::invalid_argument("variance_bound_K: requires theta = 1/2");
  }
  if (!(p.beta < 1.0)) {
    throw std::invalid_argument("variance_bound_K: beta must be < 1");
  }
  if (p.beta < 1e-3) {
    throw std::invalid_argument(
        "variance_bound_K: constant diverges as beta -> 0; beta below 1e-3 rejected");
  }
  const double drive = 20.0 * p.rho_norm_sq + 3.0 * p.noise_risk;
  VarianceBound out;
  out.c_first = 8.0 * p.kappa_sq * p.k_norm_sq +
                8.0 * p.eta1 * p.eta1 * p.kappa_sq * p.kappa_sq * drive + 2.0 * p.M * p.M;
  const double one_minus_beta = 1.0 - p.beta;
  const double eta_pow = std::pow(p.eta1, 1.0 + p.beta);
  const double bracket =
      std::pow(1.0 / (2.0 - std::sqrt(2.0)), one_minus_beta) * 2.0 * eta_pow +
      6.0 * eta_pow / p.beta;
  out.c_second = p.eta1 * p.eta1 * p.kappa_sq * out.c_first +
                 2.0 * out.c_first * p.trace_beta *
                     std::pow(one_minus_beta / (2.0 * kEulerE), one_minus_beta) * bracket;
  const double lt = std::log(static_cast<double>(t));
  out.value = out.c_second * std::pow(static_cast<double>(t), -0.5 * one_minus_beta) * lt * lt;
  return out;
}

struct RateSelection {
  double theta_star = 0.0;
  double rho_exponent = 0.0;
  double k_exponent = 0.0;  // achieved at theta = 1/2
};

// Step-decay exponent balancing bias against variance, and the resulting
// convergence exponents. Saturation sets in at r = 1 - beta/2.
inline RateSelection rate_selector(double r, double beta) {
  if (!(r > 0.5)) throw std::invalid_argument("rate_selector: r must exceed 1/2");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("rate_selector: beta must lie in (0,1)");
  }
  RateSelection out;
  if (2.0 * r + beta <= 2.0) {
    out.theta_star = 2.0 * r / (2.0 * r + 1.0);
  } else {
    out.theta_star = (2.0 - beta) / (3.0 - beta);
  }
  out.rho_exponent = out.theta_star;
  out.k_exponent = std::min(2.0 * r - 1.0, 1.0 - beta) / 2.0;
  return out;
}

// Full convergence envelope:
//   rho: (||u||^2 (r(1-theta)/(e eta1 (1-2^{theta-1})))^{2r} + C_{beta,theta})
//          t^{-min{2r(1-theta), (2-beta)(1-theta), theta}}   at theta = theta*;
//   K:   (||u||^2 (r/(e eta1 (2-sqrt2)))^{2r-1} + C-tilde_beta)
//          t^{-min{2r-1, 1-beta}/2} (ln t)^2                 at theta = 1/2.
inline double theorem_bound(const ProblemProfile& p, std::uint64_t t, Norm norm) {
  const RateSelection sel = rate_selector(p.r, p.beta);
  if (norm == Norm::Rho) {
    if (std::abs(p.theta - sel.theta_star) > 1e-9) {
      throw BranchMismatchError("theorem_bound: schedule theta does not match theta*(r, beta)");
    }
    const double bias_const =
        p.u_norm_sq *
        std::pow(p.r * (1.0 - p.theta) /
                     (kEulerE * p.eta1 * (1.0 - std::pow(2.0, p.theta - 1.0))),
                 2.0 * p.r);
    const VarianceBound vb = variance_bound_rho(p, t);
    const double expo = std::min(std::min(2.0 * p.r * (1.0 - p.theta),
                                          (2.0 - p.beta) * (1.0 - p.theta)),
                                 p.theta);
    return (bias_const + vb.c_second) * std::pow(static_cast<double>(t), -expo);
  }
  if (std::abs(p.theta - 0.5) > 1e-12) {
    throw BranchMismatchError("theorem_bound: kernel-norm bound requires theta = 1/2");
  }
  const double bias_const =
      p.u_norm_sq *
      std::pow(p.r / (kEulerE * p.eta1 * (2.0 - std::sqrt(2.0))), 2.0 * p.r - 1.0);
  const VarianceBound vb = variance_bound_K(p, t);
  const double lt = std::log(static_cast<double>(t));
  return (bias_const + vb.c_second) *
         std::pow(static_cast<double>(t), -sel.k_exponent) * lt * lt;
}

}  // namespace okl
