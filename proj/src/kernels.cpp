#include "actlab/kernels.hpp"

#include <cmath>

namespace actlab::kernels {

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (int64_t(m) * n * k >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        acc += a[int64_t(i) * k + l] * b[int64_t(l) * n + j];
      }
      c[int64_t(i) * n + j] = acc;
    }
  }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (int64_t(m) * n * k >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        acc += a[int64_t(i) * k + l] * b[int64_t(j) * k + l];
      }
      c[int64_t(i) * n + j] = acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (int64_t(m) * n * k >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        acc += a[int64_t(l) * m + i] * b[int64_t(l) * n + j];
      }
      c[int64_t(i) * n + j] = acc;
    }
  }
}

void conv2d_forward(const double* in, const double* kern, double* out,
                    const Conv2dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < d.batch; ++n) {
    for (int f = 0; f < d.filters; ++f) {
      const double* kf = kern + int64_t(f) * d.in_ch * d.k_h * d.k_w;
      for (int oh = 0; oh < d.out_h; ++oh) {
        for (int ow = 0; ow < d.out_w; ++ow) {
          double acc = 0.0;
          for (int c = 0; c < d.in_ch; ++c) {
            const double* inc =
                in + (int64_t(n) * d.in_ch + c) * d.in_h * d.in_w;
            const double* kc = kf + int64_t(c) * d.k_h * d.k_w;
            for (int kh = 0; kh < d.k_h; ++kh) {
              const int ih = oh * d.stride - d.pad + kh;
              if (ih < 0 || ih >= d.in_h) continue;
              for (int kw = 0; kw < d.k_w; ++kw) {
                const int iw = ow * d.stride - d.pad + kw;
                if (iw < 0 || iw >= d.in_w) continue;
                acc += inc[int64_t(ih) * d.in_w + iw] * kc[kh * d.k_w + kw];
              }
            }
          }
          out[((int64_t(n) * d.filters + f) * d.out_h + oh) * d.out_w + ow] =
              acc;
        }
      }
    }
  }
}

void conv2d_input_grad(const double* gout, const double* kern, double* gin,
                       const Conv2dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < d.batch; ++n) {
    for (int c = 0; c < d.in_ch; ++c) {
      double* ginc = gin + (int64_t(n) * d.in_ch + c) * d.in_h * d.in_w;
      for (int ih = 0; ih < d.in_h; ++ih) {
        for (int iw = 0; iw < d.in_w; ++iw) {
          double acc = 0.0;
          for (int f = 0; f < d.filters; ++f) {
            const double* gof =
                gout + (int64_t(n) * d.filters + f) * d.out_h * d.out_w;
            const double* kc =
                kern + (int64_t(f) * d.in_ch + c) * d.k_h * d.k_w;
            for (int kh = 0; kh < d.k_h; ++kh) {
              const int num_h = ih + d.pad - kh;
              if (num_h < 0 || num_h % d.stride != 0) continue;
              const int oh = num_h / d.stride;
              if (oh >= d.out_h) continue;
              for (int kw = 0; kw < d.k_w; ++kw) {
                const int num_w = iw + d.pad - kw;
                if (num_w < 0 || num_w % d.stride != 0) continue;
                const int ow = num_w / d.stride;
                if (ow >= d.out_w) continue;
                acc += gof[int64_t(oh) * d.out_w + ow] * kc[kh * d.k_w + kw];
              }
            }
          }
          ginc[int64_t(ih) * d.in_w + iw] += acc;
        }
      }
    }
  }
}

void conv2d_kernel_grad(const double* gout, const double* in, double* gkern,
                        const Conv2dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int f = 0; f < d.filters; ++f) {
    for (int c = 0; c < d.in_ch; ++c) {
      double* gkc = gkern + (int64_t(f) * d.in_ch + c) * d.k_h * d.k_w;
      for (int kh = 0; kh < d.k_h; ++kh) {
        for (int kw = 0; kw < d.k_w; ++kw) {
          double acc = 0.0;
          for (int n = 0; n < d.batch; ++n) {
            const double* gof =
                gout + (int64_t(n) * d.filters + f) * d.out_h * d.out_w;
            const double* inc =
                in + (int64_t(n) * d.in_ch + c) * d.in_h * d.in_w;
            for (int oh = 0; oh < d.out_h; ++oh) {
              const int ih = oh * d.stride - d.pad + kh;
              if (ih < 0 || ih >= d.in_h) continue;
              for (int ow = 0; ow < d.out_w; ++ow) {
                const int iw = ow * d.stride - d.pad + kw;
                if (iw < 0 || iw >= d.in_w) continue;
                acc += gof[int64_t(oh) * d.out_w + ow] *
                       inc[int64_t(ih) * d.in_w + iw];
              }
            }
          }
          gkc[kh * d.k_w + kw] += acc;
        }
      }
    }
  }
}

void axpy(double alpha, const double* x, double* y, int64_t n) {
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
  for (int64_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

double sum(const double* x, int64_t n) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    acc += x[i];
  }
  return acc;
}

bool all_finite(const double* x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

}  // namespace actlab::kernels
