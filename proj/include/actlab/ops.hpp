#pragma once

#include "actlab/activations.hpp"
#include "actlab/tensor.hpp"

// Differentiable tensor operations. Each op computes its forward value,
// checks the result is finite, and (on a training-mode graph) records a
// backward rule on the tape. Inputs with node == -1 are constants and
// receive no gradient. Operand shapes must match exactly; the scalar`scale`
// is the only mixed scalar/tensor form.

namespace actlab::ops {

// [m×k]·[k×n] -> [m×n]
Tensor matmul(Graph& g, const Tensor& a, const Tensor& b);

// Cross-correlation of input [N×C×H×W] with kernel [F×C×kh×kw].
// (H + 2p - kh) and (W + 2p - kw) must be divisible by the stride.
Tensor conv2d(Graph& g, const Tensor& input, const Tensor& kernel, int stride,
              int padding);

Tensor add(Graph& g, const Tensor& a, const Tensor& b);
Tensor sub(Graph& g, const Tensor& a, const Tensor& b);
Tensor mul(Graph& g, const Tensor& a, const Tensor& b);
Tensor scale(Graph& g, double c, const Tensor& t);
Tensor exp(Graph& g, const Tensor& t);
Tensor log(Graph& g, const Tensor& t);  // rejects non-positive inputs
Tensor tanh_fn(Graph& g, const Tensor& t);
// Elementwise max; ties route the gradient to `a`.
Tensor maximum(Graph& g, const Tensor& a, const Tensor& b);

Tensor sum(Graph& g, const Tensor& t);   // -> scalar
Tensor mean(Graph& g, const Tensor& t);  // -> scalar
Tensor sum(Graph& g, const Tensor& t, int axis);
Tensor mean(Graph& g, const Tensor& t, int axis);
// Gradient routes to the argmax position only (first max on ties).
Tensor max_over_axis(Graph& g, const Tensor& t, int axis);

// x [N×D] + b [D], broadcast over rows.
Tensor add_row_bias(Graph& g, const Tensor& x, const Tensor& b);
// x [N×C×H×W] + b [C], broadcast over batch and spatial dims.
Tensor add_channel_bias(Graph& g, const Tensor& x, const Tensor& b);

// x [N×in] · W^T + b with W [out×in], b [out] -> [N×out].
Tensor linear(Graph& g, const Tensor& x, const Tensor& weight,
              const Tensor& bias);

// Same data, new shape (sizes must agree); gradient passes through.
Tensor reshape(Graph& g, const Tensor& t, Shape shape);

// [N×C×H×W] -> [N×C], mean over the spatial dims.
Tensor global_avg_pool(Graph& g, const Tensor& t);

// Applies `kind` elementwise. For DSReLU the caller passes the slope value
// cached for the current epoch; other kinds ignore it.
Tensor apply_activation(Graph& g, const Tensor& x, const ActivationKind& kind,
                        double dsrelu_slope);

// Row-wise softmax of logits [N×C]; inference-only utility (no tape).
Tensor softmax_rows(const Tensor& logits);

}  // namespace actlab::ops
