#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "okl/learner.hpp"
#include "okl/metrics.hpp"
#include "okl/model.hpp"
#include "okl/schedule.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

okl::KernelModel flat_kernel() { return okl::KernelModel(okl::Spectrum::custom({1.0})); }

}  // namespace

TEST_CASE("schedule values", "[learner]") {
  const auto poly = okl::StepSchedule::poly_decay(0.5, 0.5, 1.0);
  CHECK_THAT(poly.eta(4), WithinRel(0.25, 1e-14));
  CHECK(poly.eta(1) == 0.5);
  CHECK(poly.lambda(7) == 0.0);

  const auto reg = okl::StepSchedule::regularized(2.0, 1.0);
  CHECK(reg.eta(1) == 2.0);
  CHECK_THAT(reg.eta(8), WithinRel(0.5, 1e-13));
  CHECK_THAT(reg.lambda(8), WithinRel(0.25, 1e-13));

  const auto ch = okl::StepSchedule::constant_horizon(0.5, 64, 1.0, 1.0);
  CHECK(ch.eta(1) == ch.eta(64));
  CHECK_THAT(ch.eta(10), WithinRel(0.5 * std::pow(64.0, -2.0 / 3.0), 1e-14));

  CHECK_THROWS_AS(poly.eta(0), std::out_of_range);
  CHECK_THROWS_AS(poly.lambda(0), std::out_of_range);
}

TEST_CASE("schedule construction enforces the contraction condition", "[learner]") {
  CHECK_THROWS_AS(okl::StepSchedule::poly_decay(1.0, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(okl::StepSchedule::poly_decay(0.5, 0.4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(okl::StepSchedule::poly_decay(0.5, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(okl::StepSchedule::regularized(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(okl::StepSchedule::regularized(2.0, 0.5), std::invalid_argument);
  CHECK_NOTHROW(okl::StepSchedule::poly_decay(0.9, 0.5, 1.0));
}

TEST_CASE("gradient steps on the constant kernel", "[learner]") {
  const auto kernel = flat_kernel();
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.5, 1.0);

  auto state = okl::LearnerState::primal(1);
  okl::sgd_step(state, schedule, 0.3, 1.0, kernel);
  CHECK_THAT(state.coefficients()[0], WithinRel(0.5, 1e-15));
  CHECK(state.step_index() == 2);

  SECTION("zero residual leaves the predictor unchanged") {
    auto copy = state;
    okl::sgd_step(copy, schedule, 0.8, 0.5, kernel);
    CHECK(copy.coefficients()[0] == state.coefficients()[0]);
    CHECK(copy.step_index() == 3);
  }

  SECTION("two-step hand recursion") {
    okl::sgd_step(state, schedule, 0.9, 1.0, kernel);
    CHECK_THAT(state.coefficients()[0], WithinRel(0.6767766952966369, 1e-14));
  }
}

TEST_CASE("regularized step", "[learner]") {
  const auto kernel = flat_kernel();

  SECTION("first step from zero matches the unregularized step") {
    const auto reg = okl::StepSchedule::regularized(2.0, 1.0);
    auto state = okl::LearnerState::dual(okl::Algorithm::Regularized);
    okl::regularized_step(state, reg, 0.4, 1.0, kernel);
    // eta_1 lambda_1 = 1 shrinks the zero function to itself
    CHECK_THAT(state.predict(kernel, 0.7), WithinRel(2.0, 1e-14));
  }

  SECTION("shrinkage factor applied to a standing function") {
    // drive a primal state to f == 0.5 at step index 10, then one
    // regularized step with eta lambda = 1/10 and zero residual
    const auto warm = okl::StepSchedule::poly_decay(0.5, 0.5, 1.0);
    auto state = okl::LearnerState::primal(1, okl::Algorithm::Regularized);
    okl::sgd_step(state, warm, 0.1, 1.0, kernel);  // f = 0.5
    for (int i = 0; i < 8; ++i) okl::sgd_step(state, warm, 0.2, 0.5, kernel);
    REQUIRE(state.step_index() == 10);
    REQUIRE_THAT(state.coefficients()[0], WithinRel(0.5, 1e-15));

    const auto reg = okl::StepSchedule::regularized(2.0, 1.0);
    okl::regularized_step(state, reg, 0.6, 0.5, kernel);
    CHECK_THAT(state.coefficients()[0], WithinRel(0.45, 1e-13));
  }

  SECTION("zero shrinkage path reproduces sgd_step bit for bit") {
    const auto sp = okl::Spectrum::power(8, 0.25, 0.9);
    const okl::KernelModel k(sp);
    const auto sched = okl::StepSchedule::poly_decay(0.5, 0.6, okl::kappa_sq(sp));
    const auto target = okl::make_target(sp, 1.0, {1, 0.5, 0.25, 0.2, 0.1, 0.1, 0.1, 0.1});
    const okl::DataModel data(target, 0.3, 9);

    auto a = okl::LearnerState::primal(8);
    auto b = okl::LearnerState::primal(8, okl::Algorithm::Regularized);
    okl::Rng ra(9), rb(9);
    for (int t = 0; t < 200; ++t) {
      const auto pa = data.sample(ra);
      const auto pb = data.sample(rb);
      okl::sgd_step(a, sched, pa.first, pa.second, k);
      okl::regularized_step(b, sched, pb.first, pb.second, k);
    }
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(a.coefficients()[i] == b.coefficients()[i]);
    }
  }
}

TEST_CASE("running average", "[learner]") {
  const auto kernel = flat_kernel();
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.5, 1.0);
  auto state = okl::LearnerState::primal(1, okl::Algorithm::Averaged);

  SECTION("two-point mean") {
    okl::sgd_step(state, schedule, 0.3, 1.0, kernel);  // f_2 = 0.5
    okl::average_update(state);
    CHECK_THAT(state.average_coefficients()[0], WithinRel(0.25, 1e-15));
  }

  SECTION("three-iterate mean") {
    okl::sgd_step(state, schedule, 0.3, 1.0, kernel);
    okl::average_update(state);
    okl::sgd_step(state, schedule, 0.9, 1.0, kernel);
    okl::average_update(state);
    CHECK_THAT(state.average_coefficients()[0], WithinRel(0.39225889843221234, 1e-14));
  }

  SECTION("mean of constant iterates is the constant") {
    okl::sgd_step(state, schedule, 0.3, 0.0, kernel);  // stays at 0
    okl::average_update(state);
    for (int i = 0; i < 5; ++i) {
      okl::sgd_step(state, schedule, 0.2, 0.0, kernel);
      okl::average_update(state);
    }
    CHECK(state.average_coefficients()[0] == 0.0);
  }

  SECTION("averaging requires the averaged algorithm") {
    auto plain = okl::LearnerState::primal(1);
    CHECK_THROWS_AS(okl::average_update(plain), std::logic_error);
  }
}

TEST_CASE("prediction", "[learner]") {
  const auto sp = okl::Spectrum::custom({1.0, 0.25});
  const okl::KernelModel kernel(sp);

  SECTION("empty state predicts zero") {
    CHECK(okl::LearnerState::primal(2).predict(kernel, 0.4) == 0.0);
    CHECK(okl::LearnerState::dual().predict(kernel, 0.4) == 0.0);
  }

  SECTION("single unit-kernel atom") {
    const auto flat = flat_kernel();
    auto state = okl::LearnerState::dual();
    const auto sched = okl::StepSchedule::poly_decay(0.5, 0.5, 1.0);
    okl::sgd_step(state, sched, 0.2, 1.0, flat);  // atom weight 0.5, K == 1
    CHECK_THAT(state.predict(flat, 0.2), WithinRel(0.5, 1e-14));
  }

  SECTION("primal expansion matches the target example") {
    const auto target = okl::make_target(sp, 1.0, {0.5, 0.4});
    auto state = okl::LearnerState::primal(2);
    // reach coefficients (0.5, 0.1) through one synthetic comparison
    std::vector<double> coeffs = {0.5, 0.1};
    double direct = 0.0;
    std::vector<double> basis(2);
    okl::eigenbasis(0.0, basis);
    for (int k = 0; k < 2; ++k) direct += coeffs[k] * basis[k];
    CHECK_THAT(direct, WithinRel(0.6414213562373096, 1e-13));
    CHECK_THAT(okl::target_eval(target, 0.0), WithinRel(direct, 1e-14));
  }
}

TEST_CASE("run_stream basics", "[learner]") {
  const auto sp = okl::Spectrum::power(8, 0.25, 0.9);
  const okl::KernelModel kernel(sp);
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.6, okl::kappa_sq(sp));
  const auto target = okl::make_target(sp, 1.0, {1, 0.5, 0.25, 0.2, 0.1, 0.1, 0.1, 0.1});
  const okl::DataModel data(target, 0.3, 1);

  SECTION("zero steps snapshots the zero function") {
    const std::vector<std::uint64_t> cps = {0};
    const auto snaps = okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 0, cps, 1);
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].steps == 0);
    for (double a : snaps[0].state.coefficients()) CHECK(a == 0.0);
  }

  SECTION("same seed gives identical trajectories") {
    const std::vector<std::uint64_t> cps = {16, 64};
    const auto a = okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 64, cps, 7);
    const auto b = okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 64, cps, 7);
    for (std::size_t c = 0; c < cps.size(); ++c) {
      for (std::size_t k = 0; k < 8; ++k) {
        CHECK(a[c].state.coefficients()[k] == b[c].state.coefficients()[k]);
      }
    }
  }

  SECTION("checkpoints must be increasing and within budget") {
    const std::vector<std::uint64_t> bad = {8, 4};
    CHECK_THROWS_AS(okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 16, bad, 1),
                    std::invalid_argument);
    const std::vector<std::uint64_t> beyond = {32};
    CHECK_THROWS_AS(
        okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 16, beyond, 1),
        std::invalid_argument);
  }
}

TEST_CASE("primal and dual trajectories agree pointwise", "[learner]") {
  const auto sp = okl::Spectrum::power(16, 0.25, 0.9);
  const okl::KernelModel kernel(sp);
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.6296296296296297, okl::kappa_sq(sp));
  std::vector<double> u(16);
  for (std::size_t k = 0; k < 16; ++k) u[k] = 1.0 / static_cast<double>(k + 1);
  const auto target = okl::make_target(sp, 1.0, u);
  const okl::DataModel data(target, 0.3, 1);

  const std::vector<std::uint64_t> cps = {1, 10, 100, 500};
  const auto primal =
      okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 500, cps, 3);
  const auto dual = okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 500, cps, 3,
                                    okl::Representation::Dual);
  for (std::size_t c = 0; c < cps.size(); ++c) {
    for (int j = 0; j < 100; ++j) {
      const double x = (j + 0.5) / 100.0;
      const double vp = primal[c].state.predict(kernel, x);
      const double vd = dual[c].state.predict(kernel, x);
      REQUIRE(std::abs(vp - vd) <= 1e-8 * std::max({1.0, std::abs(vp), std::abs(vd)}));
    }
  }

  SECTION("dual projection matches primal coefficients") {
    const auto proj = okl::primal_projection(dual.back().state, sp);
    for (std::size_t k = 0; k < 16; ++k) {
      CHECK_THAT(proj[k], WithinAbs(primal.back().state.coefficients()[k], 1e-10));
    }
  }

  SECTION("constant-step schedule agrees as well") {
    const auto ch = okl::StepSchedule::constant_horizon(0.5, 200, 1.0, okl::kappa_sq(sp));
    const std::vector<std::uint64_t> last = {200};
    const auto p = okl::run_stream(data, kernel, ch, okl::Algorithm::Last, 200, last, 5);
    const auto d = okl::run_stream(data, kernel, ch, okl::Algorithm::Last, 200, last, 5,
                                   okl::Representation::Dual);
    for (int j = 0; j < 50; ++j) {
      const double x = (j + 0.5) / 50.0;
      const double vp = p[0].state.predict(kernel, x);
      const double vd = d[0].state.predict(kernel, x);
      REQUIRE(std::abs(vp - vd) <= 1e-8 * std::max({1.0, std::abs(vp), std::abs(vd)}));
    }
  }
}

TEST_CASE("regularized primal and dual trajectories agree", "[learner]") {
  // exercises the lazy dual scale, including the total-shrinkage reset at
  // the first step where eta_1 lambda_1 = 1
  const auto sp = okl::Spectrum::power(12, 0.25, 0.9);
  const okl::KernelModel kernel(sp);
  const auto schedule = okl::StepSchedule::regularized(1.25, 1.0);
  std::vector<double> u(12);
  for (std::size_t k = 0; k < 12; ++k) u[k] = 1.0 / static_cast<double>(k + 1);
  const okl::DataModel data(okl::make_target(sp, 1.0, u), 0.3, 1);

  const std::vector<std::uint64_t> cps = {1, 2, 50, 300};
  const auto primal = okl::run_stream(data, kernel, schedule, okl::Algorithm::Regularized,
                                      300, cps, 11);
  const auto dual = okl::run_stream(data, kernel, schedule, okl::Algorithm::Regularized, 300,
                                    cps, 11, okl::Representation::Dual);
  CHECK(dual.back().state.dual_scale() > 0.0);
  for (std::size_t c = 0; c < cps.size(); ++c) {
    for (int j = 0; j < 50; ++j) {
      const double x = (j + 0.5) / 50.0;
      const double vp = primal[c].state.predict(kernel, x);
      const double vd = dual[c].state.predict(kernel, x);
      REQUIRE(std::abs(vp - vd) <= 1e-8 * std::max({1.0, std::abs(vp), std::abs(vd)}));
    }
  }
}

TEST_CASE("averaged output agrees between representations", "[learner]") {
  const auto sp = okl::Spectrum::power(8, 0.25, 0.9);
  const okl::KernelModel kernel(sp);
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.6, okl::kappa_sq(sp));
  const okl::DataModel data(okl::make_target(sp, 1.0, {1, 0.5, 0.25, 0.2, 0.1, 0.1, 0.1, 0.1}),
                            0.2, 1);
  const std::vector<std::uint64_t> cps = {100};
  const auto primal =
      okl::run_stream(data, kernel, schedule, okl::Algorithm::Averaged, 100, cps, 3);
  const auto dual = okl::run_stream(data, kernel, schedule, okl::Algorithm::Averaged, 100,
                                    cps, 3, okl::Representation::Dual);
  for (int j = 0; j < 50; ++j) {
    const double x = (j + 0.5) / 50.0;
    const double vp = primal[0].state.predict_output(kernel, x);
    const double vd = dual[0].state.predict_output(kernel, x);
    REQUIRE(std::abs(vp - vd) <= 1e-8 * std::max({1.0, std::abs(vp), std::abs(vd)}));
  }
}

TEST_CASE("closed-form kernels support prediction and monte carlo risk", "[learner]") {
  const auto sp = okl::Spectrum::custom({1.0, 0.25, 0.0625});
  const auto target = okl::make_target(sp, 1.0, {0.5, 0.4, 0.3});
  const okl::DataModel data(target, 0.2, 1);
  const okl::KernelModel gauss(okl::GaussianKernel{0.2});
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.5, gauss.kappa_sq());

  auto state = okl::LearnerState::dual();
  okl::Rng rng(21);
  const auto before = okl::mc_excess_risk(state, data, gauss, 20000, 91);
  for (int t = 0; t < 400; ++t) {
    const auto [x, y] = okl::sample_pair(data, rng);
    okl::sgd_step(state, schedule, x, y, gauss);
  }
  const auto after = okl::mc_excess_risk(state, data, gauss, 20000, 91);
  CHECK(after.estimate < 0.25 * before.estimate);
  CHECK(std::isfinite(state.predict(gauss, 0.5)));
}

TEST_CASE("the recursion is affine in the outputs", "[learner]") {
  const auto sp = okl::Spectrum::power(8, 0.25, 0.9);
  const okl::KernelModel kernel(sp);
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.6, okl::kappa_sq(sp));
  std::vector<double> u = {1, 0.5, 0.25, 0.2, 0.1, 0.1, 0.1, 0.1};
  std::vector<double> u2 = u;
  for (auto& v : u2) v *= 2.0;
  const okl::DataModel data(okl::make_target(sp, 1.0, u), 0.0, 1);
  const okl::DataModel data2(okl::make_target(sp, 1.0, u2), 0.0, 1);

  const std::vector<std::uint64_t> cps = {128};
  const auto a = okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 128, cps, 5);
  const auto b = okl::run_stream(data2, kernel, schedule, okl::Algorithm::Last, 128, cps, 5);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(b[0].state.coefficients()[k] == 2.0 * a[0].state.coefficients()[k]);
  }
}

TEST_CASE("running average equals the mean of materialized iterates", "[learner]") {
  const auto sp = okl::Spectrum::power(4, 0.25, 0.9);
  const okl::KernelModel kernel(sp);
  const auto schedule = okl::StepSchedule::poly_decay(0.5, 0.6, okl::kappa_sq(sp));
  const okl::DataModel data(okl::make_target(sp, 1.0, {1, 0.5, 0.25, 0.125}), 0.2, 1);

  const std::uint64_t T = 64;
  std::vector<std::uint64_t> cps(T);
  for (std::uint64_t t = 1; t <= T; ++t) cps[t - 1] = t;
  const auto snaps = okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, T, cps, 2);
  std::vector<double> mean(4, 0.0);  // f_1 = 0 contributes zero
  for (const auto& s : snaps) {
    for (std::size_t k = 0; k < 4; ++k) mean[k] += s.state.coefficients()[k];
  }
  for (auto& v : mean) v /= static_cast<double>(T + 1);

  const std::vector<std::uint64_t> last = {T};
  const auto avg =
      okl::run_stream(data, kernel, schedule, okl::Algorithm::Averaged, T, last, 2);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK_THAT(avg[0].state.average_coefficients()[k], WithinAbs(mean[k], 1e-12));
  }
}

TEST_CASE("divergence raises a structured error", "[learner]") {
  const auto kernel = flat_kernel();
  // schedule constructed against an understated kappa^2, so the actual
  // per-step multiplier |1 - eta K(x,x)| exceeds one
  const auto schedule = okl::StepSchedule::constant_horizon(397.0, 2000, 1.0, 0.3);
  const okl::DataModel data(okl::make_target(okl::Spectrum::custom({1.0}), 1.0, {0.0}), 0.3, 1);
  const std::vector<std::uint64_t> cps = {2000};
  try {
    okl::run_stream(data, kernel, schedule, okl::Algorithm::Last, 2000, cps, 1);
    FAIL("expected divergence");
  } catch (const okl::DivergenceError& e) {
    CHECK(e.step > 100);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}
