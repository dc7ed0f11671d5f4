#pragma once

#include <functional>
#include <random>
#include <vector>

#include "actlab/tensor.hpp"

namespace testsup {

// Frozen expected values, computed with an independent 50-digit
// arbitrary-precision evaluation of the closed forms (a = tan 85deg,
// b = tan 10deg, k = 5) and rounded to the nearest double.
inline constexpr double kSlopeT000 = 10.576365181371429;
inline constexpr double kSlopeT025 = 8.923846111238273;
inline constexpr double kSlopeT050 = 5.803189641734904;  // (a+b)/2
inline constexpr double kSlopeT075 = 2.6825331722315346;
inline constexpr double kSlopeT100 = 1.0300141020983793;
inline constexpr double kMishAt1 = 0.86509838826731034;  // tanh(ln(1+e))
inline constexpr double kLn4 = 1.3862943611198906;

inline actlab::Tensor random_tensor(actlab::Shape shape, std::mt19937_64& rng,
                                    double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  actlab::Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

// Central finite differences of a scalar function of `x` against `analytic`,
// over every coordinate; returns the worst relative error with a
// max(1, |analytic|) denominator.
inline double fd_all_coords(const std::function<double()>& loss,
                            std::vector<double>& x,
                            const std::vector<double>& analytic,
                            double h = 1e-6) {
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = loss();
    x[i] = saved - h;
    const double down = loss();
    x[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel =
        std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace testsup
