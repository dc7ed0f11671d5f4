#include "actlab/activations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "actlab/kernels.hpp"

namespace actlab {

TrainingProgress::TrainingProgress(double fraction)
    : t_(std::clamp(fraction, 0.0, 1.0)) {
  if (std::isnan(fraction)) {
    throw std::invalid_argument("training progress must not be NaN");
  }
}

SlopeSchedule SlopeSchedule::defaults() {
  return {kDefaultInitialSlope, kDefaultFinalSlope, kDefaultSteepness};
}

SlopeSchedule SlopeSchedule::from_degrees(double a_deg, double b_deg, double k) {
  constexpr double kPi = 3.141592653589793238462643383279502884;
  SlopeSchedule s{std::tan(a_deg * kPi / 180.0), std::tan(b_deg * kPi / 180.0),
                  k};
  s.validate();
  return s;
}

void SlopeSchedule::validate() const {
  if (!(initial_slope > 0.0) || !(final_slope > 0.0)) {
    throw std::invalid_argument(
        "slope schedule requires positive slopes (first quadrant)");
  }
  if (!(steepness > 0.0)) {
    throw std::invalid_argument("slope schedule requires steepness k > 0");
  }
}

double slope(const SlopeSchedule& sched, TrainingProgress t) {
  sched.validate();
  const double a = sched.initial_slope;
  const double b = sched.final_slope;
  return a + (b - a) / (1.0 + std::exp(-sched.steepness * (t.value() - 0.5)));
}

ActivationKind ActivationKind::dsrelu(SlopeSchedule sched) {
  ActivationKind k;
  k.kind = Kind::DSReLU;
  k.schedule = sched;
  k.validate();
  return k;
}
ActivationKind ActivationKind::relu() { return {Kind::ReLU, {}, 0.01}; }
ActivationKind ActivationKind::leaky_relu(double alpha) {
  ActivationKind k{Kind::LeakyReLU, {}, alpha};
  k.validate();
  return k;
}
ActivationKind ActivationKind::sigmoid() { return {Kind::Sigmoid, {}, 0.01}; }
ActivationKind ActivationKind::tanh_fn() { return {Kind::Tanh, {}, 0.01}; }
ActivationKind ActivationKind::mish() { return {Kind::Mish, {}, 0.01}; }

void ActivationKind::validate() const {
  if (kind == Kind::DSReLU) schedule.validate();
  if (kind == Kind::LeakyReLU && !(leak > 0.0)) {
    throw std::invalid_argument("leaky relu requires alpha > 0");
  }
}

std::string ActivationKind::name() const {
  switch (kind) {
    case Kind::DSReLU: return "dsrelu";
    case Kind::ReLU: return "relu";
    case Kind::LeakyReLU: return "leaky_relu";
    case Kind::Sigmoid: return "sigmoid";
    case Kind::Tanh: return "tanh";
    case Kind::Mish: return "mish";
  }
  return "unknown";
}

ActivationKind ActivationKind::from_name(const std::string& name,
                                         const SlopeSchedule& sched,
                                         double leak) {
  if (name == "dsrelu") return dsrelu(sched);
  if (name == "relu") return relu();
  if (name == "leaky_relu") return leaky_relu(leak);
  if (name == "sigmoid") return sigmoid();
  if (name == "tanh") return tanh_fn();
  if (name == "mish") return mish();
  throw std::invalid_argument("unknown activation '" + name + "'");
}

double dsrelu_value(double x, double s) { return x > 0.0 ? x * s : x; }

double dsrelu_derivative(double x, double s) { return x > 0.0 ? s : 1.0; }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 20.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double baseline_value(ActivationKind::Kind kind, double x, double leak) {
  switch (kind) {
    case ActivationKind::Kind::ReLU:
      return std::max(0.0, x);
    case ActivationKind::Kind::LeakyReLU:
      return x > 0.0 ? x : leak * x;
    case ActivationKind::Kind::Sigmoid:
      return stable_sigmoid(x);
    case ActivationKind::Kind::Tanh:
      return std::tanh(x);
    case ActivationKind::Kind::Mish:
      return x * std::tanh(stable_softplus(x));
    case ActivationKind::Kind::DSReLU:
      break;
  }
  throw std::invalid_argument("baseline_value does not handle dsrelu");
}

double baseline_derivative(ActivationKind::Kind kind, double x, double leak) {
  switch (kind) {
    case ActivationKind::Kind::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Kind::LeakyReLU:
      return x > 0.0 ? 1.0 : leak;
    case ActivationKind::Kind::Sigmoid: {
      const double s = stable_sigmoid(x);
      return s * (1.0 - s);
    }
    case ActivationKind::Kind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Kind::Mish: {
      const double t = std::tanh(stable_softplus(x));
      return t + x * (1.0 - t * t) * stable_sigmoid(x);
    }
    case ActivationKind::Kind::DSReLU:
      break;
  }
  throw std::invalid_argument("baseline_derivative does not handle dsrelu");
}

Tensor dsrelu_forward(const Tensor& x, const SlopeSchedule& sched,
                      TrainingProgress t) {
  const double s = slope(sched, t);
  Tensor out(x.shape());
  kernels::map(x.data().data(), out.data().data(), x.size(),
               [s](double v) { return dsrelu_value(v, s); });
  return out;
}

Tensor dsrelu_backward(const Tensor& x, const SlopeSchedule& sched,
                       TrainingProgress t) {
  const double s = slope(sched, t);
  Tensor out(x.shape());
  kernels::map(x.data().data(), out.data().data(), x.size(),
               [s](double v) { return dsrelu_derivative(v, s); });
  return out;
}

Tensor baseline_forward(const ActivationKind& kind, const Tensor& x) {
  if (kind.is_dsrelu()) {
    throw std::invalid_argument("baseline_forward does not handle dsrelu");
  }
  Tensor out(x.shape());
  const auto k = kind.kind;
  const double leak = kind.leak;
  kernels::map(x.data().data(), out.data().data(), x.size(),
               [k, leak](double v) { return baseline_value(k, v, leak); });
  return out;
}

Tensor activation_gradient(const ActivationKind& kind, const Tensor& x,
                           TrainingProgress t) {
  if (kind.is_dsrelu()) return dsrelu_backward(x, kind.schedule, t);
  Tensor out(x.shape());
  const auto k = kind.kind;
  const double leak = kind.leak;
  kernels::map(x.data().data(), out.data().data(), x.size(),
               [k, leak](double v) { return baseline_derivative(k, v, leak); });
  return out;
}

}  // namespace actlab
