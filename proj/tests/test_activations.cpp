#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <stdexcept>

#include "doctest.h"

#include "actlab/activations.hpp"
#include "actlab/gradcheck.hpp"
#include "test_support.hpp"

using namespace actlab;

TEST_SUITE("activations") {

TEST_CASE("slope matches the arbitrary-precision closed form") {
  const SlopeSchedule s = SlopeSchedule::defaults();
  CHECK(std::abs(slope(s, TrainingProgress(0.0)) - testsup::kSlopeT000) < 1e-9);
  CHECK(std::abs(slope(s, TrainingProgress(0.25)) - testsup::kSlopeT025) < 1e-9);
  CHECK(std::abs(slope(s, TrainingProgress(0.5)) - testsup::kSlopeT050) < 1e-9);
  CHECK(std::abs(slope(s, TrainingProgress(0.75)) - testsup::kSlopeT075) < 1e-9);
  CHECK(std::abs(slope(s, TrainingProgress(1.0)) - testsup::kSlopeT100) < 1e-9);
  // logistic midpoint collapses to the average of the two slopes
  CHECK(slope(s, TrainingProgress(0.5)) ==
        doctest::Approx((s.initial_slope + s.final_slope) / 2.0)
            .epsilon(1e-15));
}

TEST_CASE("degree-based constructor reproduces the stored tangents") {
  const SlopeSchedule s = SlopeSchedule::from_degrees(85.0, 10.0, 5.0);
  CHECK(s.initial_slope == doctest::Approx(kDefaultInitialSlope).epsilon(1e-14));
  CHECK(s.final_slope == doctest::Approx(kDefaultFinalSlope).epsilon(1e-14));
}

TEST_CASE("schedule validation enforces the first quadrant and k > 0") {
  CHECK_THROWS_AS(SlopeSchedule({-1.0, 0.5, 5.0}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(SlopeSchedule({1.0, 0.0, 5.0}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(SlopeSchedule({1.0, 0.5, 0.0}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(ActivationKind::leaky_relu(0.0), std::invalid_argument);
}

TEST_CASE("training progress clamps to [0, 1]") {
  const SlopeSchedule s = SlopeSchedule::defaults();
  CHECK(slope(s, TrainingProgress(-0.3)) == slope(s, TrainingProgress(0.0)));
  CHECK(slope(s, TrainingProgress(1.7)) == slope(s, TrainingProgress(1.0)));
  CHECK_THROWS_AS(TrainingProgress(std::nan("")), std::invalid_argument);
}

TEST_CASE("dsrelu forward examples") {
  const SlopeSchedule s = SlopeSchedule::defaults();
  for (double t : {0.0, 0.3, 1.0}) {
    const Tensor out = dsrelu_forward(Tensor({1}, {-2.0}), s,
                                      TrainingProgress(t));
    CHECK(out[0] == -2.0);  // negative branch is the identity
    CHECK(dsrelu_forward(Tensor({1}, {0.0}), s, TrainingProgress(t))[0] == 0.0);
  }
  CHECK(std::abs(dsrelu_forward(Tensor({1}, {1.0}), s,
                                TrainingProgress(0.5))[0] -
                 testsup::kSlopeT050) < 1e-9);
}

TEST_CASE("dsrelu backward examples and the subgradient at zero") {
  const SlopeSchedule s = SlopeSchedule::defaults();
  CHECK(dsrelu_backward(Tensor({1}, {-3.0}), s, TrainingProgress(0.2))[0] ==
        1.0);
  CHECK(std::abs(dsrelu_backward(Tensor({1}, {1.0}), s,
                                 TrainingProgress(1.0))[0] -
                 testsup::kSlopeT100) < 1e-9);
  CHECK(dsrelu_backward(Tensor({1}, {0.0}), s, TrainingProgress(0.7))[0] ==
        1.0);
}

TEST_CASE("baseline forward examples") {
  CHECK(baseline_forward(ActivationKind::mish(), Tensor({1}, {0.0}))[0] == 0.0);
  CHECK(std::abs(baseline_forward(ActivationKind::mish(),
                                  Tensor({1}, {1.0}))[0] -
                 testsup::kMishAt1) < 1e-12);
  CHECK(baseline_forward(ActivationKind::leaky_relu(0.01),
                         Tensor({1}, {-1.0}))[0] == doctest::Approx(-0.01));
  CHECK(baseline_forward(ActivationKind::relu(), Tensor({1}, {-3.0}))[0] == 0.0);
  CHECK(baseline_forward(ActivationKind::sigmoid(), Tensor({1}, {0.0}))[0] ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(baseline_forward(ActivationKind::dsrelu(), Tensor({1}, {1.0})),
                  std::invalid_argument);
}

TEST_CASE("analytic derivative examples") {
  CHECK(activation_gradient(ActivationKind::sigmoid(), Tensor({1}, {0.0}))[0] ==
        doctest::Approx(0.25));
  CHECK(activation_gradient(ActivationKind::tanh_fn(), Tensor({1}, {0.0}))[0] ==
        doctest::Approx(1.0));
  CHECK(activation_gradient(ActivationKind::leaky_relu(0.01),
                            Tensor({1}, {-5.0}))[0] == doctest::Approx(0.01));
}

TEST_CASE("mish derivative matches central differences at 100 random points") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  constexpr double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double x = dist(rng);
    const double analytic =
        baseline_derivative(ActivationKind::Kind::Mish, x);
    const double fd = (baseline_value(ActivationKind::Kind::Mish, x + h) -
                       baseline_value(ActivationKind::Kind::Mish, x - h)) /
                      (2.0 * h);
    CHECK(std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)) < 1e-6);
  }
}

TEST_CASE("all six activation gradients pass the finite-difference suite") {
  const auto reports = activation_gradient_checks(2024);
  CHECK(reports.size() == 6);
  for (const auto& r : reports) {
    INFO(r.name, " max_rel_err=", r.max_rel_err);
    CHECK(r.pass);
  }
}

TEST_CASE("monotonicity holds for random pairs and progress values") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> xs(-10.0, 10.0);
  std::uniform_real_distribution<double> ts(0.0, 1.0);
  const SlopeSchedule s = SlopeSchedule::defaults();
  for (int i = 0; i < 1000; ++i) {
    double x1 = xs(rng), x2 = xs(rng);
    if (x1 > x2) std::swap(x1, x2);
    const double sv = slope(s, TrainingProgress(ts(rng)));
    CHECK(dsrelu_value(x1, sv) <= dsrelu_value(x2, sv));
  }
}

TEST_CASE("continuity at zero") {
  const SlopeSchedule s = SlopeSchedule::defaults();
  for (double t : {0.0, 0.4, 1.0}) {
    const double eps = 1e-9;
    const double gap =
        std::abs(dsrelu_value(eps, slope(s, TrainingProgress(t))) -
                 dsrelu_value(-eps, slope(s, TrainingProgress(t))));
    CHECK(gap < 1e-7);
  }
}

TEST_CASE("schedule stays strictly inside (b, a) and decreases") {
  const SlopeSchedule s = SlopeSchedule::defaults();
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i) {
    const double t = double(i) / 1000.0;
    const double v = slope(s, TrainingProgress(t));
    CHECK(v > s.final_slope);
    CHECK(v < s.initial_slope);
    CHECK(v < prev);  // strictly decreasing since b < a
    prev = v;
  }
}

TEST_CASE("gradient never vanishes: derivative >= min(1, s(t))") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> xs(-10.0, 10.0);
  std::uniform_real_distribution<double> ts(0.0, 1.0);
  const SlopeSchedule s = SlopeSchedule::defaults();
  for (int i = 0; i < 1000; ++i) {
    const double sv = slope(s, TrainingProgress(ts(rng)));
    const double d = dsrelu_derivative(xs(rng), sv);
    CHECK(d >= std::min(1.0, sv));
    CHECK(d > 0.0);
  }
}

TEST_CASE("a = b = 1 reduces to the identity exactly") {
  const SlopeSchedule id{1.0, 1.0, 5.0};
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> xs(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double x = xs(rng);
    for (double t : {0.0, 0.5, 1.0}) {
      CHECK(dsrelu_value(x, slope(id, TrainingProgress(t))) == x);
    }
  }
}

TEST_CASE("softplus stays stable for large inputs") {
  CHECK(std::isfinite(baseline_value(ActivationKind::Kind::Mish, 800.0)));
  CHECK(baseline_value(ActivationKind::Kind::Mish, 800.0) ==
        doctest::Approx(800.0));
  CHECK(baseline_value(ActivationKind::Kind::Sigmoid, -800.0) ==
        doctest::Approx(0.0));
  CHECK(stable_softplus(25.0) == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("activation names round-trip") {
  for (const char* name :
       {"dsrelu", "relu", "leaky_relu", "sigmoid", "tanh", "mish"}) {
    CHECK(ActivationKind::from_name(name, SlopeSchedule::defaults()).name() ==
          name);
  }
  CHECK_THROWS_AS(ActivationKind::from_name("swish", SlopeSchedule::defaults()),
                  std::invalid_argument);
}

}  // TEST_SUITE
