#pragma once

#include <string>
#include <vector>

#include "actlab/tensor.hpp"

namespace actlab {

// Named trainable tensor. Gradients land in value.grad via Graph::backward.
struct Param {
  std::string name;
  Tensor value;
};

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  int64_t step = 0;
  std::vector<std::vector<double>> m;  // first moments, one slot per param
  std::vector<std::vector<double>> v;  // second moments

  static AdamState init(const std::vector<Param>& params);
};

// One Adam update over all parameters:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//   p <- p - alpha * m_hat / (sqrt(v_hat) + eps)
// A missing grad counts as zero. A non-finite gradient aborts the step and
// names the offending parameter; parameters are checked finite afterwards.
void adam_step(std::vector<Param>& params, AdamState& state,
               const AdamConfig& cfg);

// Mean over the batch of -log softmax(logits)[label], computed via
// log-sum-exp with max subtraction. Backward is (softmax - onehot)/N.
Tensor cross_entropy(Graph& g, const Tensor& logits,
                     const std::vector<int>& labels);

}  // namespace actlab
