#pragma once

#include <string>

#include "actlab/tensor.hpp"

namespace actlab {

// Fraction of planned training completed, clamped to [0, 1].
class TrainingProgress {
 public:
  TrainingProgress() = default;
  explicit TrainingProgress(double fraction);
  double value() const { return t_; }

 private:
  double t_ = 0.0;
};

// Parameters of the dynamic slope s(t) = a + (b - a) / (1 + e^{-k (t - 0.5)}).
// Both slopes must stay in the first quadrant (a > 0, b > 0); k > 0 controls
// how abruptly s moves from a to b.
struct SlopeSchedule {
  double initial_slope;  // a
  double final_slope;    // b
  double steepness;      // k

  // tan(85 deg), tan(10 deg), k = 5. Stored as computed tangents.
  static SlopeSchedule defaults();
  static SlopeSchedule from_degrees(double a_deg, double b_deg, double k);

  void validate() const;
};

inline constexpr double kDefaultInitialSlope = 11.430052302761343;  // tan 85°
inline constexpr double kDefaultFinalSlope = 0.17632698070846498;   // tan 10°
inline constexpr double kDefaultSteepness = 5.0;

// Evaluates s(t). Strictly decreasing in t when b < a; always strictly
// between min(a, b) and max(a, b) when a != b.
double slope(const SlopeSchedule& sched, TrainingProgress t);

struct ActivationKind {
  enum class Kind { DSReLU, ReLU, LeakyReLU, Sigmoid, Tanh, Mish };

  Kind kind = Kind::ReLU;
  SlopeSchedule schedule{kDefaultInitialSlope, kDefaultFinalSlope,
                         kDefaultSteepness};  // DSReLU only
  double leak = 0.01;                         // LeakyReLU only

  static ActivationKind dsrelu(SlopeSchedule sched = SlopeSchedule::defaults());
  static ActivationKind relu();
  static ActivationKind leaky_relu(double alpha = 0.01);
  static ActivationKind sigmoid();
  static ActivationKind tanh_fn();
  static ActivationKind mish();

  bool is_dsrelu() const { return kind == Kind::DSReLU; }
  std::string name() const;
  // Recognizes "dsrelu", "relu", "leaky_relu", "sigmoid", "tanh", "mish".
  static ActivationKind from_name(const std::string& name,
                                  const SlopeSchedule& sched,
                                  double leak = 0.01);

  void validate() const;
};

// Scalar rules. `s` is the current slope value for positive inputs.
double dsrelu_value(double x, double s);
// Derivative: s for x > 0, 1 for x <= 0 (the x<=0 branch's slope is the
// chosen subgradient at 0).
double dsrelu_derivative(double x, double s);

double baseline_value(ActivationKind::Kind kind, double x, double leak = 0.01);
double baseline_derivative(ActivationKind::Kind kind, double x,
                           double leak = 0.01);

// Numerically stable helpers shared by Mish and Sigmoid.
double stable_sigmoid(double x);
double stable_softplus(double x);  // x + log1p(e^{-x}) for x > 20

// Elementwise tensor forms. The slope is evaluated once per call, never per
// element.
Tensor dsrelu_forward(const Tensor& x, const SlopeSchedule& sched,
                      TrainingProgress t);
Tensor dsrelu_backward(const Tensor& x, const SlopeSchedule& sched,
                       TrainingProgress t);
// kind must not be DSReLU (it has the dedicated ops above).
Tensor baseline_forward(const ActivationKind& kind, const Tensor& x);
// Exact analytic derivative for any kind, DSReLU included.
Tensor activation_gradient(const ActivationKind& kind, const Tensor& x,
                           TrainingProgress t = TrainingProgress(0.0));

}  // namespace actlab
