#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "okl/model.hpp"
#include "okl/schedule.hpp"

namespace okl {

enum class Algorithm { Last, Averaged, Regularized };

enum class Representation { Primal, Dual };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Last: return "last";
    case Algorithm::Averaged: return "averaged";
    case Algorithm::Regularized: return "regularized";
  }
  return "?";
}

// A non-finite prediction or weight aborts the trial; the usual cause is a
// step size violating eta * kappa^2 < 1.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(std::uint64_t step_index)
      : std::runtime_error("learner: non-finite value at step " + std::to_string(step_index)),
        step(step_index) {}
  std::uint64_t step;
};

// State of the online recursion, starting from the zero function.
//
// Primal holds the expansion coefficients a_k of f = sum a_k phi_k (spectral
// kernels only). Dual holds the support expansion f = scale * sum_i g_i K(x_i, .)
// with one atom appended per step; the shrinkage of the regularized recursion
// is applied lazily through the global scale. For spectral kernels the dual
// state caches the basis values at each atom so kernel sections are not
// re-evaluated from scratch on every prediction.
class LearnerState {
 public:
  static LearnerState primal(std::size_t dim, Algorithm algo = Algorithm::Last) {
    if (dim == 0) throw std::invalid_argument("learner: primal dimension must be >= 1");
    LearnerState s;
    s.repr_ = Representation::Primal;
    s.algo_ = algo;
    s.coeffs_.assign(dim, 0.0);
    if (algo == Algorithm::Averaged) s.avg_coeffs_.assign(dim, 0.0);
    return s;
  }

  static LearnerState dual(Algorithm algo = Algorithm::Last) {
    LearnerState s;
    s.repr_ = Representation::Dual;
    s.algo_ = algo;
    return s;
  }

  Representation representation() const { return repr_; }
  Algorithm algorithm() const { return algo_; }
  std::uint64_t step_index() const { return step_; }

  std::span<const double> coefficients() const {
    require_primal();
    return coeffs_;
  }

  std::span<const double> average_coefficients() const {
    require_primal();
    if (algo_ != Algorithm::Averaged) throw std::logic_error("learner: averaging not enabled");
    return avg_coeffs_;
  }

  // The estimator the algorithm reports: the running average for Averaged,
  // the current iterate otherwise.
  std::span<const double> output_coefficients() const {
    require_primal();
    return algo_ == Algorithm::Averaged ? std::span<const double>(avg_coeffs_)
                                        : std::span<const double>(coeffs_);
  }

  std::size_t atom_count() const { return atom_x_.size(); }
  double dual_scale() const { return scale_; }
  std::span<const double> atom_points() const { return atom_x_; }
  std::span<const double> atom_weights() const { return atom_w_; }

  double k_norm_sq(const Spectrum& spectrum) const {
    require_primal();
    double sum = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      sum += coeffs_[k] * coeffs_[k] / spectrum.sigma(k);
    }
    return sum;
  }

  double predict(const KernelModel& kernel, double x) const {
    if (repr_ == Representation::Primal) return predict_primal(coeffs_, x);
    return predict_dual(kernel, x, scale_, atom_w_);
  }

  double predict_output(const KernelModel& kernel, double x) const {
    if (algo_ != Algorithm::Averaged) return predict(kernel, x);
    if (repr_ == Representation::Primal) return predict_primal(avg_coeffs_, x);
    return predict_dual(kernel, x, 1.0, avg_eff_w_);
  }

  void step_sgd(const StepSchedule& schedule, double x, double y, const KernelModel& kernel) {
    const std::uint64_t t = step_;
    const double eta = schedule.eta(t);
    apply_update(1.0, eta, x, y, kernel, t);
  }

  void step_regularized(const StepSchedule& schedule, double x, double y,
                        const KernelModel& kernel) {
    const std::uint64_t t = step_;
    const double eta = schedule.eta(t);
    const double lam = schedule.lambda(t);
    const double shrink = 1.0 - eta * lam;
    if (shrink < 0.0) {
      throw std::domain_error("learner: shrinkage eta_t * lambda_t exceeds 1 at step " +
                              std::to_string(t));
    }
    apply_update(shrink, eta, x, y, kernel, t);
  }

  // Fold the current iterate into the running mean; the mean starts at the
  // zero initial function with count 1, so after T steps it equals the
  // arithmetic mean of all T+1 materialized iterates.
  void fold_average() {
    if (algo_ != Algorithm::Averaged) throw std::logic_error("learner: averaging not enabled");
    ++avg_count_;
    const double inv = 1.0 / static_cast<double>(avg_count_);
    if (repr_ == Representation::Primal) {
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        avg_coeffs_[k] += (coeffs_[k] - avg_coeffs_[k]) * inv;
      }
    } else {
      avg_eff_w_.resize(atom_w_.size(), 0.0);
      for (std::size_t i = 0; i < atom_w_.size(); ++i) {
        avg_eff_w_[i] += (scale_ * atom_w_[i] - avg_eff_w_[i]) * inv;
      }
    }
  }

 private:
  LearnerState() = default;

  void require_primal() const {
    if (repr_ != Representation::Primal) {
      throw std::logic_error("learner: coefficients require the primal representation");
    }
  }

  static double predict_primal(const std::vector<double>& coeffs, double x) {
    std::vector<double> basis(coeffs.size());
    eigenbasis(x, basis);
    double sum = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) sum += coeffs[k] * basis[k];
    return sum;
  }

  double predict_dual(const KernelModel& kernel, double x, double scale,
                      const std::vector<double>& weights) const {
    if (!KernelModel::in_domain(x)) throw std::domain_error("learner: point outside [0,1]");
    if (weights.empty()) return 0.0;
    double sum = 0.0;
    if (kernel.is_spectral() && !atom_basis_.empty()) {
      const std::size_t n = kernel.spectrum().rank();
      std::vector<double> bx(n);
      eigenbasis(x, bx);
      for (std::size_t k = 0; k < n; ++k) bx[k] *= kernel.spectrum().sigma(k);
      for (std::size_t i = 0; i < weights.size(); ++i) {
        const double* row = atom_basis_.data() + i * n;
        double kv = 0.0;
        for (std::size_t k = 0; k < n; ++k) kv += row[k] * bx[k];
        sum += weights[i] * kv;
      }
    } else {
      for (std::size_t i = 0; i < weights.size(); ++i) {
        sum += weights[i] * kernel.eval(atom_x_[i], x);
      }
    }
    return scale * sum;
  }

  void apply_update(double shrink, double eta, double x, double y, const KernelModel& kernel,
                    std::uint64_t t) {
    if (!KernelModel::in_domain(x)) throw std::domain_error("learner: sample outside [0,1]");
    if (repr_ == Representation::Primal) {
      const Spectrum& spectrum = kernel.spectrum();
      const std::size_t n = spectrum.rank();
      if (coeffs_.size() != n) {
        throw std::invalid_argument("learner: state dimension does not match kernel rank");
      }
      std::vector<double> basis(n);
      eigenbasis(x, basis);
      double fx = 0.0;
      for (std::size_t k = 0; k < n; ++k) fx += coeffs_[k] * basis[k];
      if (!std::isfinite(fx)) throw DivergenceError(t);
      const double g = eta * (fx - y);
      if (!std::isfinite(g)) throw DivergenceError(t);
      if (shrink != 1.0) {
        for (double& a : coeffs_) a *= shrink;
      }
      for (std::size_t k = 0; k < n; ++k) coeffs_[k] -= g * spectrum.sigma(k) * basis[k];
    } else {
      const double fx = predict_dual(kernel, x, scale_, atom_w_);
      if (!std::isfinite(fx)) throw DivergenceError(t);
      const double g = eta * (fx - y);
      if (!std::isfinite(g)) throw DivergenceError(t);
      scale_ *= shrink;
      if (scale_ == 0.0) {
        // total shrinkage: the previous function is exactly zero
        atom_x_.clear();
        atom_w_.clear();
        atom_basis_.clear();
        scale_ = 1.0;
      } else if (std::abs(scale_) < 1e-300) {
        for (double& w : atom_w_) w *= scale_;
        scale_ = 1.0;
      }
      atom_x_.push_back(x);
      atom_w_.push_back(-g / scale_);
      if (kernel.is_spectral()) {
        const std::size_t n = kernel.spectrum().rank();
        const std::size_t off = atom_basis_.size();
        atom_basis_.resize(off + n);
        eigenbasis(x, std::span<double>(atom_basis_.data() + off, n));
      }
    }
    step_ = t + 1;
  }

  Representation repr_ = Representation::Primal;
  Algorithm algo_ = Algorithm::Last;
  std::uint64_t step_ = 1;

  std::vector<double> coeffs_;
  std::vector<double> avg_coeffs_;

  std::vector<double> atom_x_;
  std::vector<double> atom_w_;
  std::vector<double> atom_basis_;  // rank-sized basis row per atom (spectral)
  std::vector<double> avg_eff_w_;
  double scale_ = 1.0;

  std::uint64_t avg_count_ = 1;
};

inline void sgd_step(LearnerState& state, const StepSchedule& schedule, double x, double y,
                     const KernelModel& kernel) {
  state.step_sgd(schedule, x, y, kernel);
}

inline void regularized_step(LearnerState& state, const StepSchedule& schedule, double x,
                             double y, const KernelModel& kernel) {
  state.step_regularized(schedule, x, y, kernel);
}

inline void average_update(LearnerState& state) { state.fold_average(); }

inline double predict(const LearnerState& state, const KernelModel& kernel, double x) {
  return state.predict(kernel, x);
}

// Expansion coefficients of a dual state in the eigenbasis:
// a_k = scale * sigma_k * sum_i g_i phi_k(x_i). Exact for spectral kernels.
inline std::vector<double> primal_projection(const LearnerState& state,
                                             const Spectrum& spectrum) {
  if (state.representation() == Representation::Primal) {
    auto c = state.coefficients();
    return {c.begin(), c.end()};
  }
  const std::size_t n = spectrum.rank();
  std::vector<double> acc(n, 0.0);
  std::vector<double> basis(n);
  const auto xs = state.atom_points();
  const auto ws = state.atom_weights();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    eigenbasis(xs[i], basis);
    for (std::size_t k = 0; k < n; ++k) acc[k] += ws[i] * basis[k];
  }
  for (std::size_t k = 0; k < n; ++k) acc[k] *= state.dual_scale() * spectrum.sigma(k);
  return acc;
}

struct Snapshot {
  std::uint64_t steps;  // completed steps; the state holds iterate f_{steps+1}
  LearnerState state;
};

// Runs `total_steps` sequential updates from the zero function and snapshots
// the state after each requested step count. Deterministic per seed.
inline std::vector<Snapshot> run_stream(const DataModel& data, const KernelModel& kernel,
                                        const StepSchedule& schedule, Algorithm algorithm,
                                        std::uint64_t total_steps,
                                        std::span<const std::uint64_t> checkpoints,
                                        std::uint64_t seed,
                                        Representation repr = Representation::Primal,
                                        std::vector<double>* iterate_k_norms = nullptr) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > total_steps) {
      throw std::invalid_argument("run_stream: checkpoint beyond the step budget");
    }
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw std::invalid_argument("run_stream: checkpoints must be strictly increasing");
    }
  }
  LearnerState state = repr == Representation::Primal
                           ? LearnerState::primal(kernel.spectrum().rank(), algorithm)
                           : LearnerState::dual(algorithm);
  if (iterate_k_norms != nullptr) {
    iterate_k_norms->clear();
    iterate_k_norms->reserve(total_steps + 1);
  }
  const bool track_norms = iterate_k_norms != nullptr && repr == Representation::Primal;

  std::vector<Snapshot> out;
  out.reserve(checkpoints.size());
  std::size_t next_cp = 0;
  while (next_cp < checkpoints.size() && checkpoints[next_cp] == 0) {
    out.push_back({0, state});
    ++next_cp;
  }

  Rng rng(seed);
  for (std::uint64_t step = 1; step <= total_steps; ++step) {
    if (track_norms) iterate_k_norms->push_back(state.k_norm_sq(kernel.spectrum()));
    const auto [x, y] = data.sample(rng);
    if (algorithm == Algorithm::Regularized) {
      state.step_regularized(schedule, x, y, kernel);
    } else {
      state.step_sgd(schedule, x, y, kernel);
    }
    if (algorithm == Algorithm::Averaged) state.fold_average();
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == step) {
      out.push_back({step, state});
      ++next_cp;
    }
  }
  if (track_norms) iterate_k_norms->push_back(state.k_norm_sq(kernel.spectrum()));
  return out;
}

}  // namespace okl
