#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace actlab {

struct GradCheckReport {
  std::string name;
  double max_rel_err = 0.0;
  int coords_checked = 0;
  double tolerance = 0.0;
  bool pass = false;
};

// Central finite differences against an analytic gradient at up to
// `max_coords` randomly chosen coordinates of x. `loss` re-evaluates the
// scalar objective from the current contents of x. Relative error uses a
// max(1, |analytic|) denominator.
double fd_max_rel_err(const std::function<double()>& loss,
                      std::vector<double>& x,
                      const std::vector<double>& analytic, std::mt19937_64& rng,
                      int max_coords, double h = 1e-6);

// Closed-form activation derivatives vs central differences, 100 random
// nonzero points per kind. Tolerance 1e-6.
std::vector<GradCheckReport> activation_gradient_checks(uint64_t seed);

// Tape gradients of each layer type (parameters and inputs) vs central
// differences. Tolerance 1e-4.
std::vector<GradCheckReport> layer_gradient_checks(uint64_t seed);

// End-to-end residual network (< 5k parameters) per activation kind vs
// central differences. Tolerance 1e-4.
std::vector<GradCheckReport> network_gradient_checks(uint64_t seed);

bool all_pass(const std::vector<GradCheckReport>& reports);

}  // namespace actlab
