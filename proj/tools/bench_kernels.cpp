// Kernel benchmark: OpenMP-parallel production kernels vs the serial
// reference implementations, with a max-abs-difference column as a sanity
// check. Thread count comes from OMP_NUM_THREADS.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "actlab/activations.hpp"
#include "actlab/kernels.hpp"

namespace {

using actlab::kernels::Conv2dDims;

double time_best_of(int reps, const std::function<void()>& fn) {
  fn();  // warmup
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto tic = std::chrono::steady_clock::now();
    fn();
    const auto toc = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(toc - tic).count());
  }
  return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> random_vec(size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

void row(const char* name, double serial_s, double parallel_s, double diff) {
  std::printf("%-24s %10.3f %10.3f %8.2fx %10.2e\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s, diff);
}

}  // namespace

int main() {
  std::mt19937_64 rng(7);
  constexpr int kReps = 5;

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-24s %10s %10s %9s %10s\n", "kernel", "serial ms",
              "openmp ms", "speedup", "max|diff|");

  {
    const int m = 192, k = 192, n = 192;
    auto a = random_vec(size_t(m) * k, rng);
    auto b = random_vec(size_t(k) * n, rng);
    std::vector<double> c1(size_t(m) * n), c2(size_t(m) * n);
    const double ts = time_best_of(kReps, [&] {
      actlab::kernels::serial::matmul_nn(a.data(), b.data(), c1.data(), m, k, n);
    });
    const double tp = time_best_of(kReps, [&] {
      actlab::kernels::matmul_nn(a.data(), b.data(), c2.data(), m, k, n);
    });
    row("matmul 192^3", ts, tp, max_abs_diff(c1, c2));
  }

  Conv2dDims d;
  d.batch = 4;
  d.in_ch = 8;
  d.in_h = d.in_w = 25;
  d.filters = 12;
  d.k_h = d.k_w = 3;
  d.stride = 1;
  d.pad = 1;
  d.out_h = d.out_w = 25;
  const auto in = random_vec(size_t(d.batch) * d.in_ch * d.in_h * d.in_w, rng);
  const auto kern =
      random_vec(size_t(d.filters) * d.in_ch * d.k_h * d.k_w, rng);
  const size_t out_n = size_t(d.batch) * d.filters * d.out_h * d.out_w;

  {
    std::vector<double> o1(out_n), o2(out_n);
    const double ts = time_best_of(kReps, [&] {
      actlab::kernels::serial::conv2d_forward(in.data(), kern.data(), o1.data(), d);
    });
    const double tp = time_best_of(kReps, [&] {
      actlab::kernels::conv2d_forward(in.data(), kern.data(), o2.data(), d);
    });
    row("conv2d fwd 4x8x25x25", ts, tp, max_abs_diff(o1, o2));
  }
  {
    const auto gout = random_vec(out_n, rng);
    std::vector<double> g1(in.size()), g2(in.size());
    const double ts = time_best_of(kReps, [&] {
      std::fill(g1.begin(), g1.end(), 0.0);
      actlab::kernels::serial::conv2d_input_grad(gout.data(), kern.data(),
                                                 g1.data(), d);
    });
    const double tp = time_best_of(kReps, [&] {
      std::fill(g2.begin(), g2.end(), 0.0);
      actlab::kernels::conv2d_input_grad(gout.data(), kern.data(), g2.data(), d);
    });
    row("conv2d dinput", ts, tp, max_abs_diff(g1, g2));
  }
  {
    const auto gout = random_vec(out_n, rng);
    std::vector<double> g1(kern.size()), g2(kern.size());
    const double ts = time_best_of(kReps, [&] {
      std::fill(g1.begin(), g1.end(), 0.0);
      actlab::kernels::serial::conv2d_kernel_grad(gout.data(), in.data(),
                                                  g1.data(), d);
    });
    const double tp = time_best_of(kReps, [&] {
      std::fill(g2.begin(), g2.end(), 0.0);
      actlab::kernels::conv2d_kernel_grad(gout.data(), in.data(), g2.data(), d);
    });
    row("conv2d dkernel", ts, tp, max_abs_diff(g1, g2));
  }

  {
    const size_t n = size_t(1) << 20;
    const auto x = random_vec(n, rng);
    std::vector<double> y1(n), y2(n);
    const double ts = time_best_of(kReps, [&] {
      for (size_t i = 0; i < n; ++i) {
        y1[i] = actlab::baseline_value(actlab::ActivationKind::Kind::Mish, x[i]);
      }
    });
    const double tp = time_best_of(kReps, [&] {
      actlab::kernels::map(x.data(), y2.data(), int64_t(n), [](double v) {
        return actlab::baseline_value(actlab::ActivationKind::Kind::Mish, v);
      });
    });
    row("mish map 1M", ts, tp, max_abs_diff(y1, y2));
  }
  {
    const size_t n = size_t(1) << 20;
    const auto x = random_vec(n, rng);
    std::vector<double> y1(n, 0.5), y2(n, 0.5);
    const double ts = time_best_of(kReps, [&] {
      for (size_t i = 0; i < n; ++i) y1[i] += 0.25 * x[i];
    });
    const double tp = time_best_of(kReps, [&] {
      actlab::kernels::axpy(0.25, x.data(), y2.data(), int64_t(n));
    });
    row("axpy 1M", ts, tp, max_abs_diff(y1, y2));
  }

  return 0;
}
