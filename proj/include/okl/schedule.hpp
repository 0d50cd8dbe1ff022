#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace okl {

// Step-size (and shrinkage) schedules for the online recursions.
//
//   PolyDecay:        eta_t = eta1 t^{-theta},      theta in [1/2, 1)
//   ConstantHorizon:  eta_t = eta1 T^{-2r/(2r+1)}   for all t <= T
//   Regularized:      eta_t = a t^{-2r/(2r+1)},  lambda_t = (1/a) t^{-1/(2r+1)}
//
// Decaying schedules require eta1 * kappa^2 < 1 at construction so every
// operator factor I - eta_t L_K keeps its spectrum inside (0, 1].
class StepSchedule {
 public:
  enum class Kind { PolyDecay, ConstantHorizon, Regularized };

  static StepSchedule poly_decay(double eta1, double theta, double kappa_sq) {
    if (!(eta1 > 0.0)) throw std::invalid_argument("schedule: eta1 must be positive");
    if (!(theta >= 0.5 && theta < 1.0)) {
      throw std::invalid_argument("schedule: theta must lie in [1/2, 1)");
    }
    if (!(eta1 * kappa_sq < 1.0)) {
      throw std::invalid_argument("schedule: eta1 * kappa^2 must be < 1");
    }
    StepSchedule s;
    s.kind_ = Kind::PolyDecay;
    s.eta1_ = eta1;
    s.theta_ = theta;
    return s;
  }

  static StepSchedule constant_horizon(double eta1, std::uint64_t horizon, double r,
                                       double kappa_sq) {
    if (!(eta1 > 0.0)) throw std::invalid_argument("schedule: eta1 must be positive");
    if (horizon < 1) throw std::invalid_argument("schedule: horizon must be >= 1");
    if (!(r > 0.5)) throw std::invalid_argument("schedule: r must exceed 1/2");
    StepSchedule s;
    s.kind_ = Kind::ConstantHorizon;
    s.eta1_ = eta1;
    s.horizon_ = horizon;
    s.r_ = r;
    s.constant_eta_ =
        eta1 * std::pow(static_cast<double>(horizon), -2.0 * r / (2.0 * r + 1.0));
    if (!(s.constant_eta_ * kappa_sq < 1.0)) {
      throw std::invalid_argument("schedule: eta(T) * kappa^2 must be < 1");
    }
    return s;
  }

  static StepSchedule regularized(double a, double r) {
    if (!(a > 1.0)) throw std::invalid_argument("schedule: regularized needs a > 1");
    if (!(r > 0.5)) throw std::invalid_argument("schedule: r must exceed 1/2");
    StepSchedule s;
    s.kind_ = Kind::Regularized;
    s.eta1_ = a;
    s.r_ = r;
    return s;
  }

  Kind kind() const { return kind_; }
  double eta1() const { return eta1_; }

  double theta() const {
    switch (kind_) {
      case Kind::PolyDecay:
        return theta_;
      case Kind::Regularized:
        return 2.0 * r_ / (2.0 * r_ + 1.0);
      default:
        return 0.0;  // constant schedule has no decay exponent
    }
  }

  std::uint64_t horizon() const { return horizon_; }

  double eta(std::uint64_t t) const {
    if (t < 1) throw std::out_of_range("schedule: step index must be >= 1");
    switch (kind_) {
      case Kind::PolyDecay:
        return eta1_ * std::pow(static_cast<double>(t), -theta_);
      case Kind::ConstantHorizon:
        return constant_eta_;
      case Kind::Regularized:
        return eta1_ * std::pow(static_cast<double>(t), -2.0 * r_ / (2.0 * r_ + 1.0));
    }
    return 0.0;
  }

  // Shrinkage weight; zero for schedules without a regularization path.
  double lambda(std::uint64_t t) const {
    if (t < 1) throw std::out_of_range("schedule: step index must be >= 1");
    if (kind_ != Kind::Regularized) return 0.0;
    return (1.0 / eta1_) * std::pow(static_cast<double>(t), -1.0 / (2.0 * r_ + 1.0));
  }

 private:
  StepSchedule() = default;

  Kind kind_ = Kind::PolyDecay;
  double eta1_ = 0.0;
  double theta_ = 0.5;
  double r_ = 1.0;
  std::uint64_t horizon_ = 1;
  double constant_eta_ = 0.0;
};

}  // namespace okl
