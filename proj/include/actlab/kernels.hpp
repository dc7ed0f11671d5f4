#pragma once

#include <cstdint>

// Dense numeric kernels. The functions in actlab::kernels are the production
// implementations, parallelized with OpenMP. Every output element is written
// by exactly one loop iteration and accumulated in a fixed sequential order,
// so results are bit-identical regardless of thread count.
//
// actlab::kernels::serial holds naive single-threaded reference
// implementations of the heavy kernels. They are kept for the test suite
// (independent oracles) and for the kernel benchmark.

namespace actlab::kernels {

// c[m*n] = a[m*k] * b[k*n]
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
// c[m*n] = a[m*k] * b^T, b stored as [n*k]
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
// c[m*n] = a^T * b, a stored as [k*m], b as [k*n]
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);

struct Conv2dDims {
  int batch;      // N
  int in_ch;      // C
  int in_h, in_w;
  int filters;    // F
  int k_h, k_w;
  int stride;
  int pad;
  int out_h, out_w;
};

// Cross-correlation (no kernel flip). out[N*F*OH*OW], in [N*C*H*W],
// kern [F*C*KH*KW].
void conv2d_forward(const double* in, const double* kern, double* out,
                    const Conv2dDims& d);
// gin[N*C*H*W] += contribution of gout[N*F*OH*OW]; gin must be zeroed by the
// caller. Gather form: one thread owns each input position.
void conv2d_input_grad(const double* gout, const double* kern, double* gin,
                       const Conv2dDims& d);
// gkern[F*C*KH*KW] += contribution; gkern must be zeroed by the caller.
void conv2d_kernel_grad(const double* gout, const double* in, double* gkern,
                        const Conv2dDims& d);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, int64_t n);

// Sequential sum (kept serial so the reduction order is fixed).
double sum(const double* x, int64_t n);

bool all_finite(const double* x, int64_t n);

inline constexpr int64_t kParallelCutoff = 4096;

// y[i] = f(x[i])
template <class F>
void map(const double* x, double* y, int64_t n, F f) {
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
  for (int64_t i = 0; i < n; ++i) {
    y[i] = f(x[i]);
  }
}

// y[i] = f(a[i], b[i])
template <class F>
void zip(const double* a, const double* b, double* y, int64_t n, F f) {
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
  for (int64_t i = 0; i < n; ++i) {
    y[i] = f(a[i], b[i]);
  }
}

// acc[i] += f(a[i], b[i]), used by backward rules.
template <class F>
void zip_accum(const double* a, const double* b, double* acc, int64_t n, F f) {
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
  for (int64_t i = 0; i < n; ++i) {
    acc[i] += f(a[i], b[i]);
  }
}

namespace serial {

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);

void conv2d_forward(const double* in, const double* kern, double* out,
                    const Conv2dDims& d);
void conv2d_input_grad(const double* gout, const double* kern, double* gin,
                       const Conv2dDims& d);
void conv2d_kernel_grad(const double* gout, const double* in, double* gkern,
                        const Conv2dDims& d);

}  // namespace serial

}  // namespace actlab::kernels
