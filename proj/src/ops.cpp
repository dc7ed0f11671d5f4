#include "actlab/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "actlab/kernels.hpp"

namespace actlab::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!same_shape(a.shape(), b.shape())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  }
}

void check_axis(const Tensor& t, int axis, const char* op) {
  if (axis < 0 || axis >= t.rank()) {
    throw std::invalid_argument(std::string(op) + ": axis " +
                                std::to_string(axis) + " out of range for " +
                                shape_str(t.shape()));
  }
}

// Splits a shape around `axis` into (outer, n, inner) extents so that flat
// index = (o * n + i) * inner + j.
struct AxisSplit {
  int64_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, int axis) {
  AxisSplit sp;
  for (int i = 0; i < int(s.size()); ++i) {
    if (i < axis) sp.outer *= s[i];
    else if (i == axis) sp.n = s[i];
    else sp.inner *= s[i];
  }
  return sp;
}

Shape drop_axis(const Shape& s, int axis) {
  Shape out;
  for (int i = 0; i < int(s.size()); ++i) {
    if (i != axis) out.push_back(s[i]);
  }
  return out;
}

// Elementwise binary op. da/db compute the contribution to each operand's
// gradient from (gout_i, other_operand_i).
template <class Fwd, class DA, class DB>
Tensor binary_elementwise(Graph& g, const Tensor& a, const Tensor& b,
                          const char* name, Fwd fwd, DA da, DB db) {
  require_same_shape(a, b, name);
  Tensor out(a.shape());
  kernels::zip(a.data().data(), b.data().data(), out.data().data(), a.size(),
               fwd);
  require_finite(out, name);
  if (g.recording() && (a.node >= 0 || b.node >= 0)) {
    const int an = a.node, bn = b.node;
    auto av = a.data();
    auto bv = b.data();
    out.node = g.record(
        out.size(), [an, bn, av, bv, da, db](Graph& gr,
                                             const std::vector<double>& gout) {
          const int64_t n = int64_t(gout.size());
          if (an >= 0) {
            kernels::zip_accum(gout.data(), bv.data(), gr.grad(an).data(), n,
                               da);
          }
          if (bn >= 0) {
            kernels::zip_accum(gout.data(), av.data(), gr.grad(bn).data(), n,
                               db);
          }
        });
  }
  return out;
}

}  // namespace

Tensor matmul(Graph& g, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw std::invalid_argument("matmul: operands must be rank-2, got " +
                                shape_str(a.shape()) + " and " +
                                shape_str(b.shape()));
  }
  const int m = a.shape()[0], k = a.shape()[1];
  const int k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2) {
    throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  }
  Tensor out({m, n});
  kernels::matmul_nn(a.data().data(), b.data().data(), out.data().data(), m, k,
                     n);
  require_finite(out, "matmul");
  if (g.recording() && (a.node >= 0 || b.node >= 0)) {
    const int an = a.node, bn = b.node;
    auto av = a.data();
    auto bv = b.data();
    out.node = g.record(
        out.size(),
        [an, bn, av, bv, m, k, n](Graph& gr, const std::vector<double>& gout) {
          if (an >= 0) {
            // dA = G · B^T : [m×n]·[n×k]
            std::vector<double> tmp(size_t(m) * k);
            kernels::matmul_nt(gout.data(), bv.data(), tmp.data(), m, n, k);
            kernels::axpy(1.0, tmp.data(), gr.grad(an).data(), int64_t(m) * k);
          }
          if (bn >= 0) {
            // dB = A^T · G : [k×m]·[m×n]
            std::vector<double> tmp(size_t(k) * n);
            kernels::matmul_tn(av.data(), gout.data(), tmp.data(), k, m, n);
            kernels::axpy(1.0, tmp.data(), gr.grad(bn).data(), int64_t(k) * n);
          }
        });
  }
  return out;
}

Tensor conv2d(Graph& g, const Tensor& input, const Tensor& kernel, int stride,
              int padding) {
  if (input.rank() != 4 || kernel.rank() != 4) {
    throw std::invalid_argument("conv2d: input and kernel must be rank-4");
  }
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (padding < 0) throw std::invalid_argument("conv2d: padding must be >= 0");
  kernels::Conv2dDims d;
  d.batch = input.shape()[0];
  d.in_ch = input.shape()[1];
  d.in_h = input.shape()[2];
  d.in_w = input.shape()[3];
  d.filters = kernel.shape()[0];
  d.k_h = kernel.shape()[2];
  d.k_w = kernel.shape()[3];
  d.stride = stride;
  d.pad = padding;
  if (kernel.shape()[1] != d.in_ch) {
    throw std::invalid_argument(
        "conv2d: kernel channel count " + std::to_string(kernel.shape()[1]) +
        " does not match input channels " + std::to_string(d.in_ch));
  }
  const int num_h = d.in_h + 2 * padding - d.k_h;
  const int num_w = d.in_w + 2 * padding - d.k_w;
  if (num_h < 0 || num_h % stride != 0 || num_w < 0 || num_w % stride != 0) {
    throw std::invalid_argument(
        "conv2d: non-integral output extent for input " +
        shape_str(input.shape()) + ", kernel " + shape_str(kernel.shape()) +
        ", stride " + std::to_string(stride) + ", pad " +
        std::to_string(padding));
  }
  d.out_h = num_h / stride + 1;
  d.out_w = num_w / stride + 1;

  Tensor out({d.batch, d.filters, d.out_h, d.out_w});
  kernels::conv2d_forward(input.data().data(), kernel.data().data(),
                          out.data().data(), d);
  require_finite(out, "conv2d");
  if (g.recording() && (input.node >= 0 || kernel.node >= 0)) {
    const int in_node = input.node, k_node = kernel.node;
    auto in_v = input.data();
    auto k_v = kernel.data();
    out.node = g.record(
        out.size(),
        [in_node, k_node, in_v, k_v, d](Graph& gr,
                                        const std::vector<double>& gout) {
          if (in_node >= 0) {
            kernels::conv2d_input_grad(gout.data(), k_v.data(),
                                       gr.grad(in_node).data(), d);
          }
          if (k_node >= 0) {
            kernels::conv2d_kernel_grad(gout.data(), in_v.data(),
                                        gr.grad(k_node).data(), d);
          }
        });
  }
  return out;
}

Tensor add(Graph& g, const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      g, a, b, "add", [](double x, double y) { return x + y; },
      [](double gv, double) { return gv; }, [](double gv, double) { return gv; });
}

Tensor sub(Graph& g, const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      g, a, b, "sub", [](double x, double y) { return x - y; },
      [](double gv, double) { return gv; },
      [](double gv, double) { return -gv; });
}

Tensor mul(Graph& g, const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      g, a, b, "mul", [](double x, double y) { return x * y; },
      [](double gv, double bv) { return gv * bv; },
      [](double gv, double av) { return gv * av; });
}

Tensor maximum(Graph& g, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "maximum");
  Tensor out(a.shape());
  kernels::zip(a.data().data(), b.data().data(), out.data().data(), a.size(),
               [](double x, double y) { return x >= y ? x : y; });
  require_finite(out, "maximum");
  if (g.recording() && (a.node >= 0 || b.node >= 0)) {
    const int an = a.node, bn = b.node;
    auto av = a.data();
    auto bv = b.data();
    out.node = g.record(
        out.size(),
        [an, bn, av, bv](Graph& gr, const std::vector<double>& gout) {
          const int64_t n = int64_t(gout.size());
          // Ties route the gradient to `a`.
          if (an >= 0) {
            auto& ga = gr.grad(an);
#pragma omp parallel for schedule(static) if (n >= kernels::kParallelCutoff)
            for (int64_t i = 0; i < n; ++i) {
              if (av[size_t(i)] >= bv[size_t(i)]) ga[size_t(i)] += gout[size_t(i)];
            }
          }
          if (bn >= 0) {
            auto& gb = gr.grad(bn);
#pragma omp parallel for schedule(static) if (n >= kernels::kParallelCutoff)
            for (int64_t i = 0; i < n; ++i) {
              if (av[size_t(i)] < bv[size_t(i)]) gb[size_t(i)] += gout[size_t(i)];
            }
          }
        });
  }
  return out;
}

Tensor scale(Graph& g, double c, const Tensor& t) {
  if (!std::isfinite(c)) {
    throw std::invalid_argument("scale: factor must be finite");
  }
  Tensor out(t.shape());
  kernels::map(t.data().data(), out.data().data(), t.size(),
               [c](double v) { return c * v; });
  require_finite(out, "scale");
  if (g.recording() && t.node >= 0) {
    const int tn = t.node;
    out.node =
        g.record(out.size(), [tn, c](Graph& gr,
                                     const std::vector<double>& gout) {
          kernels::axpy(c, gout.data(), gr.grad(tn).data(),
                        int64_t(gout.size()));
        });
  }
  return out;
}

namespace {

template <class Fwd, class Bwd>
Tensor unary_elementwise(Graph& g, const Tensor& t, const char* name, Fwd fwd,
                         Bwd dfd) {
  Tensor out(t.shape());
  kernels::map(t.data().data(), out.data().data(), t.size(), fwd);
  require_finite(out, name);
  if (g.recording() && t.node >= 0) {
    const int tn = t.node;
    auto tv = t.data();
    out.node = g.record(
        out.size(), [tn, tv, dfd](Graph& gr, const std::vector<double>& gout) {
          kernels::zip_accum(gout.data(), tv.data(), gr.grad(tn).data(),
                             int64_t(gout.size()),
                             [dfd](double gv, double xv) {
                               return gv * dfd(xv);
                             });
        });
  }
  return out;
}

}  // namespace

Tensor exp(Graph& g, const Tensor& t) {
  return unary_elementwise(
      g, t, "exp", [](double v) { return std::exp(v); },
      [](double v) { return std::exp(v); });
}

Tensor log(Graph& g, const Tensor& t) {
  for (double v : t.data()) {
    if (!(v > 0.0)) {
      throw std::invalid_argument("log: input must be positive, got " +
                                  std::to_string(v));
    }
  }
  return unary_elementwise(
      g, t, "log", [](double v) { return std::log(v); },
      [](double v) { return 1.0 / v; });
}

Tensor tanh_fn(Graph& g, const Tensor& t) {
  return unary_elementwise(
      g, t, "tanh", [](double v) { return std::tanh(v); },
      [](double v) {
        const double y = std::tanh(v);
        return 1.0 - y * y;
      });
}

Tensor sum(Graph& g, const Tensor& t) {
  Tensor out = Tensor::scalar(kernels::sum(t.data().data(), t.size()));
  require_finite(out, "sum");
  if (g.recording() && t.node >= 0) {
    const int tn = t.node;
    const int64_t n = t.size();
    out.node =
        g.record(1, [tn, n](Graph& gr, const std::vector<double>& gout) {
          auto& gt = gr.grad(tn);
          const double gv = gout[0];
#pragma omp parallel for schedule(static) if (n >= kernels::kParallelCutoff)
          for (int64_t i = 0; i < n; ++i) gt[size_t(i)] += gv;
        });
  }
  return out;
}

Tensor mean(Graph& g, const Tensor& t) {
  if (t.size() == 0) throw std::invalid_argument("mean of an empty tensor");
  Tensor s = sum(g, t);
  return scale(g, 1.0 / double(t.size()), s);
}

Tensor sum(Graph& g, const Tensor& t, int axis) {
  check_axis(t, axis, "sum");
  const AxisSplit sp = split_axis(t.shape(), axis);
  Tensor out(drop_axis(t.shape(), axis));
  for (int64_t o = 0; o < sp.outer; ++o) {
    for (int64_t j = 0; j < sp.inner; ++j) {
      double acc = 0.0;
      for (int64_t i = 0; i < sp.n; ++i) {
        acc += t[(o * sp.n + i) * sp.inner + j];
      }
      out[o * sp.inner + j] = acc;
    }
  }
  require_finite(out, "sum");
  if (g.recording() && t.node >= 0) {
    const int tn = t.node;
    out.node = g.record(
        out.size(), [tn, sp](Graph& gr, const std::vector<double>& gout) {
          auto& gt = gr.grad(tn);
          for (int64_t o = 0; o < sp.outer; ++o)
            for (int64_t i = 0; i < sp.n; ++i)
              for (int64_t j = 0; j < sp.inner; ++j)
                gt[size_t((o * sp.n + i) * sp.inner + j)] +=
                    gout[size_t(o * sp.inner + j)];
        });
  }
  return out;
}

Tensor mean(Graph& g, const Tensor& t, int axis) {
  check_axis(t, axis, "mean");
  Tensor s = sum(g, t, axis);
  return scale(g, 1.0 / double(t.shape()[axis]), s);
}

Tensor max_over_axis(Graph& g, const Tensor& t, int axis) {
  check_axis(t, axis, "max_over_axis");
  const AxisSplit sp = split_axis(t.shape(), axis);
  if (sp.n == 0) throw std::invalid_argument("max_over_axis: empty axis");
  Tensor out(drop_axis(t.shape(), axis));
  std::vector<int64_t> argmax(static_cast<size_t>(sp.outer * sp.inner));
  for (int64_t o = 0; o < sp.outer; ++o) {
    for (int64_t j = 0; j < sp.inner; ++j) {
      int64_t best = 0;
      double best_v = t[(o * sp.n) * sp.inner + j];
      for (int64_t i = 1; i < sp.n; ++i) {
        const double v = t[(o * sp.n + i) * sp.inner + j];
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      out[o * sp.inner + j] = best_v;
      argmax[size_t(o * sp.inner + j)] = best;
    }
  }
  require_finite(out, "max_over_axis");
  if (g.recording() && t.node >= 0) {
    const int tn = t.node;
    out.node = g.record(
        out.size(),
        [tn, sp, argmax](Graph& gr, const std::vector<double>& gout) {
          auto& gt = gr.grad(tn);
          for (int64_t o = 0; o < sp.outer; ++o)
            for (int64_t j = 0; j < sp.inner; ++j) {
              const int64_t i = argmax[size_t(o * sp.inner + j)];
              gt[size_t((o * sp.n + i) * sp.inner + j)] +=
                  gout[size_t(o * sp.inner + j)];
            }
        });
  }
  return out;
}

Tensor add_row_bias(Graph& g, const Tensor& x, const Tensor& b) {
  if (x.rank() != 2 || b.rank() != 1 || b.shape()[0] != x.shape()[1]) {
    throw std::invalid_argument("add_row_bias: need [N×D] and [D], got " +
                                shape_str(x.shape()) + " and " +
                                shape_str(b.shape()));
  }
  const int n = x.shape()[0], dim = x.shape()[1];
  Tensor out(x.shape());
#pragma omp parallel for schedule(static) if (x.size() >= kernels::kParallelCutoff)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      out[int64_t(i) * dim + j] = x[int64_t(i) * dim + j] + b[j];
    }
  }
  require_finite(out, "add_row_bias");
  if (g.recording() && (x.node >= 0 || b.node >= 0)) {
    const int xn = x.node, bn = b.node;
    out.node = g.record(
        out.size(),
        [xn, bn, n, dim](Graph& gr, const std::vector<double>& gout) {
          if (xn >= 0) {
            kernels::axpy(1.0, gout.data(), gr.grad(xn).data(),
                          int64_t(n) * dim);
          }
          if (bn >= 0) {
            auto& gb = gr.grad(bn);
            for (int j = 0; j < dim; ++j) {
              double acc = 0.0;
              for (int i = 0; i < n; ++i) acc += gout[size_t(i) * dim + j];
              gb[size_t(j)] += acc;
            }
          }
        });
  }
  return out;
}

Tensor add_channel_bias(Graph& g, const Tensor& x, const Tensor& b) {
  if (x.rank() != 4 || b.rank() != 1 || b.shape()[0] != x.shape()[1]) {
    throw std::invalid_argument(
        "add_channel_bias: need [N×C×H×W] and [C], got " +
        shape_str(x.shape()) + " and " + shape_str(b.shape()));
  }
  const int n = x.shape()[0], c = x.shape()[1];
  const int64_t hw = int64_t(x.shape()[2]) * x.shape()[3];
  Tensor out(x.shape());
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const int64_t base = (int64_t(i) * c + ch) * hw;
      for (int64_t k = 0; k < hw; ++k) out[base + k] = x[base + k] + b[ch];
    }
  }
  require_finite(out, "add_channel_bias");
  if (g.recording() && (x.node >= 0 || b.node >= 0)) {
    const int xn = x.node, bn = b.node;
    out.node = g.record(
        out.size(),
        [xn, bn, n, c, hw](Graph& gr, const std::vector<double>& gout) {
          if (xn >= 0) {
            kernels::axpy(1.0, gout.data(), gr.grad(xn).data(),
                          int64_t(n) * c * hw);
          }
          if (bn >= 0) {
            auto& gb = gr.grad(bn);
            for (int ch = 0; ch < c; ++ch) {
              double acc = 0.0;
              for (int i = 0; i < n; ++i) {
                const int64_t base = (int64_t(i) * c + ch) * hw;
                for (int64_t k = 0; k < hw; ++k) acc += gout[size_t(base + k)];
              }
              gb[size_t(ch)] += acc;
            }
          }
        });
  }
  return out;
}

Tensor linear(Graph& g, const Tensor& x, const Tensor& weight,
              const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || bias.rank() != 1) {
    throw std::invalid_argument("linear: need x [N×in], W [out×in], b [out]");
  }
  const int n = x.shape()[0], in = x.shape()[1];
  const int out_dim = weight.shape()[0];
  if (weight.shape()[1] != in || bias.shape()[0] != out_dim) {
    throw std::invalid_argument("linear: shape mismatch, x " +
                                shape_str(x.shape()) + ", W " +
                                shape_str(weight.shape()) + ", b " +
                                shape_str(bias.shape()));
  }
  Tensor out({n, out_dim});
  kernels::matmul_nt(x.data().data(), weight.data().data(), out.data().data(),
                     n, in, out_dim);
#pragma omp parallel for schedule(static) if (out.size() >= kernels::kParallelCutoff)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < out_dim; ++j) out[int64_t(i) * out_dim + j] += bias[j];
  }
  require_finite(out, "linear");
  if (g.recording() && (x.node >= 0 || weight.node >= 0 || bias.node >= 0)) {
    const int xn = x.node, wn = weight.node, bn = bias.node;
    auto xv = x.data();
    auto wv = weight.data();
    out.node = g.record(
        out.size(), [xn, wn, bn, xv, wv, n, in, out_dim](
                        Graph& gr, const std::vector<double>& gout) {
          if (xn >= 0) {
            // dX = G · W : [N×out]·[out×in]
            std::vector<double> tmp(size_t(n) * in);
            kernels::matmul_nn(gout.data(), wv.data(), tmp.data(), n, out_dim,
                               in);
            kernels::axpy(1.0, tmp.data(), gr.grad(xn).data(),
                          int64_t(n) * in);
          }
          if (wn >= 0) {
            // dW = G^T · X : [out×N]·[N×in]
            std::vector<double> tmp(size_t(out_dim) * in);
            kernels::matmul_tn(gout.data(), xv.data(), tmp.data(), out_dim, n,
                               in);
            kernels::axpy(1.0, tmp.data(), gr.grad(wn).data(),
                          int64_t(out_dim) * in);
          }
          if (bn >= 0) {
            auto& gb = gr.grad(bn);
            for (int j = 0; j < out_dim; ++j) {
              double acc = 0.0;
              for (int i = 0; i < n; ++i) acc += gout[size_t(i) * out_dim + j];
              gb[size_t(j)] += acc;
            }
          }
        });
  }
  return out;
}

Tensor reshape(Graph& g, const Tensor& t, Shape shape) {
  if (shape_size(shape) != t.size()) {
    throw std::invalid_argument("reshape: size mismatch, " +
                                shape_str(t.shape()) + " -> " +
                                shape_str(shape));
  }
  Tensor out(std::move(shape), t.data());
  if (g.recording() && t.node >= 0) {
    const int tn = t.node;
    out.node =
        g.record(out.size(), [tn](Graph& gr, const std::vector<double>& gout) {
          kernels::axpy(1.0, gout.data(), gr.grad(tn).data(),
                        int64_t(gout.size()));
        });
  }
  return out;
}

Tensor global_avg_pool(Graph& g, const Tensor& t) {
  if (t.rank() != 4) {
    throw std::invalid_argument("global_avg_pool: need [N×C×H×W], got " +
                                shape_str(t.shape()));
  }
  const int n = t.shape()[0], c = t.shape()[1];
  const int64_t hw = int64_t(t.shape()[2]) * t.shape()[3];
  if (hw == 0) throw std::invalid_argument("global_avg_pool: empty spatial dims");
  Tensor out({n, c});
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const int64_t base = (int64_t(i) * c + ch) * hw;
      double acc = 0.0;
      for (int64_t k = 0; k < hw; ++k) acc += t[base + k];
      out[int64_t(i) * c + ch] = acc / double(hw);
    }
  }
  require_finite(out, "global_avg_pool");
  if (g.recording() && t.node >= 0) {
    const int tn = t.node;
    out.node = g.record(
        out.size(), [tn, n, c, hw](Graph& gr, const std::vector<double>& gout) {
          auto& gt = gr.grad(tn);
          const double inv = 1.0 / double(hw);
          for (int i = 0; i < n; ++i)
            for (int ch = 0; ch < c; ++ch) {
              const int64_t base = (int64_t(i) * c + ch) * hw;
              const double gv = gout[size_t(i) * c + ch] * inv;
              for (int64_t k = 0; k < hw; ++k) gt[size_t(base + k)] += gv;
            }
        });
  }
  return out;
}

Tensor apply_activation(Graph& g, const Tensor& x, const ActivationKind& kind,
                        double dsrelu_slope) {
  Tensor out(x.shape());
  if (kind.is_dsrelu()) {
    const double s = dsrelu_slope;
    if (!(s > 0.0)) {
      throw std::invalid_argument("apply_activation: dsrelu slope must be > 0");
    }
    kernels::map(x.data().data(), out.data().data(), x.size(),
                 [s](double v) { return dsrelu_value(v, s); });
  } else {
    const auto k = kind.kind;
    const double leak = kind.leak;
    kernels::map(x.data().data(), out.data().data(), x.size(),
                 [k, leak](double v) { return baseline_value(k, v, leak); });
  }
  require_finite(out, "activation");
  if (g.recording() && x.node >= 0) {
    const int xn = x.node;
    auto xv = x.data();
    const auto k = kind.kind;
    const double leak = kind.leak;
    const double s = dsrelu_slope;
    out.node = g.record(
        out.size(),
        [xn, xv, k, leak, s](Graph& gr, const std::vector<double>& gout) {
          kernels::zip_accum(
              gout.data(), xv.data(), gr.grad(xn).data(), int64_t(gout.size()),
              [k, leak, s](double gv, double v) {
                const double d = (k == ActivationKind::Kind::DSReLU)
                                     ? dsrelu_derivative(v, s)
                                     : baseline_derivative(k, v, leak);
                return gv * d;
              });
        });
  }
  return out;
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("softmax_rows: need [N×C], got " +
                                shape_str(logits.shape()));
  }
  const int n = logits.shape()[0], c = logits.shape()[1];
  Tensor out(logits.shape());
#pragma omp parallel for schedule(static) if (logits.size() >= kernels::kParallelCutoff)
  for (int i = 0; i < n; ++i) {
    const int64_t base = int64_t(i) * c;
    double mx = logits[base];
    for (int j = 1; j < c; ++j) mx = std::max(mx, logits[base + j]);
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      const double e = std::exp(logits[base + j] - mx);
      out[base + j] = e;
      z += e;
    }
    for (int j = 0; j < c; ++j) out[base + j] /= z;
  }
  require_finite(out, "softmax_rows");
  return out;
}

}  // namespace actlab::ops
