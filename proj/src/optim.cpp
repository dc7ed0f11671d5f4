#include "actlab/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "actlab/kernels.hpp"

namespace actlab {

void AdamConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("adam: alpha must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    throw std::invalid_argument("adam: beta1 must be in [0,1)");
  }
  if (!(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam: beta2 must be in [0,1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam: epsilon must be > 0");
}

AdamState AdamState::init(const std::vector<Param>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Param& p : params) {
    s.m.emplace_back(size_t(p.value.size()), 0.0);
    s.v.emplace_back(size_t(p.value.size()), 0.0);
  }
  return s;
}

void adam_step(std::vector<Param>& params, AdamState& state,
               const AdamConfig& cfg) {
  cfg.validate();
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam: state does not match parameter list");
  }
  // Validate every gradient before touching any parameter, so a bad step
  // leaves the model untouched.
  for (const Param& p : params) {
    if (p.value.has_grad() &&
        !kernels::all_finite(p.value.grad().data(), p.value.size())) {
      throw std::runtime_error("adam: non-finite gradient for parameter '" +
                               p.name + "'");
    }
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, double(state.step));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& value = params[pi].value;
    const int64_t n = value.size();
    auto& m = state.m[pi];
    auto& v = state.v[pi];
    const double* grad =
        value.has_grad() ? value.grad().data() : nullptr;
#pragma omp parallel for schedule(static) if (n >= kernels::kParallelCutoff)
    for (int64_t i = 0; i < n; ++i) {
      const double g = grad ? grad[i] : 0.0;
      m[size_t(i)] = cfg.beta1 * m[size_t(i)] + (1.0 - cfg.beta1) * g;
      v[size_t(i)] = cfg.beta2 * v[size_t(i)] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[size_t(i)] / c1;
      const double v_hat = v[size_t(i)] / c2;
      value[i] -= cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
    if (!kernels::all_finite(value.data().data(), n)) {
      throw std::runtime_error("adam: parameter '" + params[pi].name +
                               "' became non-finite after update");
    }
  }
}

Tensor cross_entropy(Graph& g, const Tensor& logits,
                     const std::vector<int>& labels) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("cross_entropy: logits must be [N×C], got " +
                                shape_str(logits.shape()));
  }
  const int n = logits.shape()[0], c = logits.shape()[1];
  if (int(labels.size()) != n) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(n) +
                                " rows but " + std::to_string(labels.size()) +
                                " labels");
  }
  if (n == 0) throw std::invalid_argument("cross_entropy: empty batch");
  for (int i = 0; i < n; ++i) {
    if (labels[size_t(i)] < 0 || labels[size_t(i)] >= c) {
      throw std::invalid_argument(
          "cross_entropy: label " + std::to_string(labels[size_t(i)]) +
          " out of range [0," + std::to_string(c) + ") at row " +
          std::to_string(i));
    }
  }
  // Per-row log-sum-exp; keep softmax for the backward rule.
  std::vector<double> probs(size_t(n) * c);
  std::vector<double> row_loss(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) if (int64_t(n) * c >= kernels::kParallelCutoff)
  for (int i = 0; i < n; ++i) {
    const int64_t base = int64_t(i) * c;
    double mx = logits[base];
    for (int j = 1; j < c; ++j) mx = std::max(mx, logits[base + j]);
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      const double e = std::exp(logits[base + j] - mx);
      probs[size_t(base + j)] = e;
      z += e;
    }
    for (int j = 0; j < c; ++j) probs[size_t(base + j)] /= z;
    const double lse = mx + std::log(z);
    row_loss[size_t(i)] = lse - logits[base + labels[size_t(i)]];
  }
  Tensor out = Tensor::scalar(kernels::sum(row_loss.data(), n) / double(n));
  require_finite(out, "cross_entropy");
  if (g.recording() && logits.node >= 0) {
    const int ln = logits.node;
    auto lab = labels;
    out.node = g.record(
        1, [ln, lab, probs, n, c](Graph& gr, const std::vector<double>& gout) {
          auto& gl = gr.grad(ln);
          const double scale = gout[0] / double(n);
#pragma omp parallel for schedule(static) if (int64_t(n) * c >= kernels::kParallelCutoff)
          for (int i = 0; i < n; ++i) {
            const int64_t base = int64_t(i) * c;
            for (int j = 0; j < c; ++j) {
              const double onehot = (j == lab[size_t(i)]) ? 1.0 : 0.0;
              gl[size_t(base + j)] +=
                  scale * (probs[size_t(base + j)] - onehot);
            }
          }
        });
  }
  return out;
}

}  // namespace actlab
