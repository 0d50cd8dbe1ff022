#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "okl/learner.hpp"
#include "okl/model.hpp"

namespace okl {

// Squared errors of one snapshot, exact in eigenbasis coordinates.
struct ErrorRecord {
  std::uint64_t t = 0;  // completed steps
  double rho_sq = 0.0;
  std::optional<double> k_sq;  // absent for closed-form kernels
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Last;
};

// ||f - f_rho||^2 in L^2: sum_k (a_k - c_k)^2, exact by orthonormality.
inline double rho_error_sq(std::span<const double> coeffs, const TargetFunction& target) {
  const auto c = target.coefficients();
  if (coeffs.size() != c.size()) {
    throw std::invalid_argument("rho_error_sq: coefficient count mismatch");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double d = coeffs[k] - c[k];
    sum += d * d;
  }
  return sum;
}

inline double rho_error_sq(const LearnerState& state, const TargetFunction& target) {
  if (state.representation() != Representation::Primal) {
    throw std::logic_error("rho_error_sq: dual state needs primal_projection first");
  }
  return rho_error_sq(state.output_coefficients(), target);
}

// ||f - f_rho||^2 in the kernel norm: sum_k (a_k - c_k)^2 / sigma_k.
inline double k_error_sq(std::span<const double> coeffs, const TargetFunction& target,
                         const Spectrum& spectrum) {
  const auto c = target.coefficients();
  if (coeffs.size() != c.size() || c.size() != spectrum.rank()) {
    throw std::invalid_argument("k_error_sq: coefficient count mismatch");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double d = coeffs[k] - c[k];
    sum += d * d / spectrum.sigma(k);
  }
  return sum;
}

inline double k_error_sq(const LearnerState& state, const TargetFunction& target,
                         const Spectrum& spectrum) {
  if (state.representation() != Representation::Primal) {
    throw std::logic_error("k_error_sq: dual state needs primal_projection first");
  }
  return k_error_sq(state.output_coefficients(), target, spectrum);
}

struct MonteCarloRisk {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Excess risk (1/n) sum_j (f(x_j) - f_rho(x_j))^2 on fresh test inputs, with
// the normal-approximation standard error of the mean.
inline MonteCarloRisk mc_excess_risk(const LearnerState& state, const DataModel& data,
                                     const KernelModel& kernel, std::size_t n_test,
                                     std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("mc_excess_risk: n_test must be >= 1");
  Rng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t j = 0; j < n_test; ++j) {
    const double x = rng.uniform01();
    const double gap = state.predict_output(kernel, x) - data.target().eval(x);
    const double v = gap * gap;
    const double delta = v - mean;
    mean += delta / static_cast<double>(j + 1);
    m2 += delta * (v - mean);
  }
  MonteCarloRisk out;
  out.estimate = mean;
  if (n_test > 1) {
    const double var = m2 / static_cast<double>(n_test - 1);
    out.std_error = std::sqrt(var / static_cast<double>(n_test));
  }
  return out;
}

}  // namespace okl
