#include "actlab/kernels.hpp"

// Single-threaded reference kernels. conv2d gradients are written in scatter
// form straight from the cross-correlation definition, which also makes them
// the independent oracle for the gather-form production kernels.

namespace actlab::kernels::serial {

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
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

namespace {

inline int64_t in_at(const Conv2dDims& d, int n, int c, int ih, int iw) {
  return ((int64_t(n) * d.in_ch + c) * d.in_h + ih) * d.in_w + iw;
}
inline int64_t out_at(const Conv2dDims& d, int n, int f, int oh, int ow) {
  return ((int64_t(n) * d.filters + f) * d.out_h + oh) * d.out_w + ow;
}
inline int64_t k_at(const Conv2dDims& d, int f, int c, int kh, int kw) {
  return ((int64_t(f) * d.in_ch + c) * d.k_h + kh) * d.k_w + kw;
}

}  // namespace

void conv2d_forward(const double* in, const double* kern, double* out,
                    const Conv2dDims& d) {
  for (int n = 0; n < d.batch; ++n)
    for (int f = 0; f < d.filters; ++f)
      for (int oh = 0; oh < d.out_h; ++oh)
        for (int ow = 0; ow < d.out_w; ++ow) {
          double acc = 0.0;
          for (int c = 0; c < d.in_ch; ++c)
            for (int kh = 0; kh < d.k_h; ++kh)
              for (int kw = 0; kw < d.k_w; ++kw) {
                const int ih = oh * d.stride - d.pad + kh;
                const int iw = ow * d.stride - d.pad + kw;
                if (ih < 0 || ih >= d.in_h || iw < 0 || iw >= d.in_w) continue;
                acc += in[in_at(d, n, c, ih, iw)] * kern[k_at(d, f, c, kh, kw)];
              }
          out[out_at(d, n, f, oh, ow)] = acc;
        }
}

void conv2d_input_grad(const double* gout, const double* kern, double* gin,
                       const Conv2dDims& d) {
  for (int n = 0; n < d.batch; ++n)
    for (int f = 0; f < d.filters; ++f)
      for (int oh = 0; oh < d.out_h; ++oh)
        for (int ow = 0; ow < d.out_w; ++ow) {
          const double g = gout[out_at(d, n, f, oh, ow)];
          for (int c = 0; c < d.in_ch; ++c)
            for (int kh = 0; kh < d.k_h; ++kh)
              for (int kw = 0; kw < d.k_w; ++kw) {
                const int ih = oh * d.stride - d.pad + kh;
                const int iw = ow * d.stride - d.pad + kw;
                if (ih < 0 || ih >= d.in_h || iw < 0 || iw >= d.in_w) continue;
                gin[in_at(d, n, c, ih, iw)] += g * kern[k_at(d, f, c, kh, kw)];
              }
        }
}

void conv2d_kernel_grad(const double* gout, const double* in, double* gkern,
                        const Conv2dDims& d) {
  for (int n = 0; n < d.batch; ++n)
    for (int f = 0; f < d.filters; ++f)
      for (int oh = 0; oh < d.out_h; ++oh)
        for (int ow = 0; ow < d.out_w; ++ow) {
          const double g = gout[out_at(d, n, f, oh, ow)];
          for (int c = 0; c < d.in_ch; ++c)
            for (int kh = 0; kh < d.k_h; ++kh)
              for (int kw = 0; kw < d.k_w; ++kw) {
                const int ih = oh * d.stride - d.pad + kh;
                const int iw = ow * d.stride - d.pad + kw;
                if (ih < 0 || ih >= d.in_h || iw < 0 || iw >= d.in_w) continue;
                gkern[k_at(d, f, c, kh, kw)] += g * in[in_at(d, n, c, ih, iw)];
              }
        }
}

}  // namespace actlab::kernels::serial
