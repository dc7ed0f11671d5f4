#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"

#include "actlab/kernels.hpp"
#include "test_support.hpp"

using namespace actlab;

namespace {

std::vector<double> rand_vec(size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("matmul variants match the serial reference bit for bit") {
  std::mt19937_64 rng(11);
  // below and above the parallel cutoff
  for (const auto [m, k, n] : {std::array{7, 5, 9}, std::array{80, 64, 72}}) {
    const auto a = rand_vec(size_t(m) * k, rng);
    const auto b_nn = rand_vec(size_t(k) * n, rng);
    const auto b_nt = rand_vec(size_t(n) * k, rng);
    const auto a_tn = rand_vec(size_t(k) * m, rng);
    std::vector<double> c1(size_t(m) * n), c2(size_t(m) * n);

    kernels::serial::matmul_nn(a.data(), b_nn.data(), c1.data(), m, k, n);
    kernels::matmul_nn(a.data(), b_nn.data(), c2.data(), m, k, n);
    CHECK(c1 == c2);

    kernels::serial::matmul_nt(a.data(), b_nt.data(), c1.data(), m, k, n);
    kernels::matmul_nt(a.data(), b_nt.data(), c2.data(), m, k, n);
    CHECK(c1 == c2);

    kernels::serial::matmul_tn(a_tn.data(), b_nn.data(), c1.data(), m, k, n);
    kernels::matmul_tn(a_tn.data(), b_nn.data(), c2.data(), m, k, n);
    CHECK(c1 == c2);
  }
}

TEST_CASE("matmul_nt/tn agree with explicit transposition through matmul_nn") {
  std::mt19937_64 rng(12);
  const int m = 6, k = 4, n = 5;
  const auto a = rand_vec(size_t(m) * k, rng);
  const auto b = rand_vec(size_t(n) * k, rng);  // use as B^T source
  std::vector<double> bt(size_t(k) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) bt[size_t(j) * n + i] = b[size_t(i) * k + j];
  std::vector<double> via_nt(size_t(m) * n), via_nn(size_t(m) * n);
  kernels::matmul_nt(a.data(), b.data(), via_nt.data(), m, k, n);
  kernels::matmul_nn(a.data(), bt.data(), via_nn.data(), m, k, n);
  CHECK(max_abs_diff(via_nt, via_nn) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("conv2d forward matches the serial reference bit for bit") {
  std::mt19937_64 rng(13);
  for (const int stride : {1, 2}) {
    kernels::Conv2dDims d;
    d.batch = 2;
    d.in_ch = 3;
    d.in_h = d.in_w = 9;
    d.filters = 4;
    d.k_h = d.k_w = 3;
    d.stride = stride;
    d.pad = 1;
    d.out_h = (d.in_h + 2 * d.pad - d.k_h) / stride + 1;
    d.out_w = (d.in_w + 2 * d.pad - d.k_w) / stride + 1;
    const auto in = rand_vec(size_t(d.batch) * d.in_ch * d.in_h * d.in_w, rng);
    const auto kern =
        rand_vec(size_t(d.filters) * d.in_ch * d.k_h * d.k_w, rng);
    const size_t out_n = size_t(d.batch) * d.filters * d.out_h * d.out_w;
    std::vector<double> o1(out_n), o2(out_n);
    kernels::serial::conv2d_forward(in.data(), kern.data(), o1.data(), d);
    kernels::conv2d_forward(in.data(), kern.data(), o2.data(), d);
    CHECK(o1 == o2);
  }
}

TEST_CASE("conv2d gradients match the scatter-form serial oracle") {
  std::mt19937_64 rng(14);
  for (const int stride : {1, 2}) {
    kernels::Conv2dDims d;
    d.batch = 2;
    d.in_ch = 2;
    d.in_h = d.in_w = 7;
    d.filters = 3;
    d.k_h = d.k_w = 3;
    d.stride = stride;
    d.pad = 1;
    d.out_h = (d.in_h + 2 * d.pad - d.k_h) / stride + 1;
    d.out_w = (d.in_w + 2 * d.pad - d.k_w) / stride + 1;
    const auto in = rand_vec(size_t(d.batch) * d.in_ch * d.in_h * d.in_w, rng);
    const auto kern =
        rand_vec(size_t(d.filters) * d.in_ch * d.k_h * d.k_w, rng);
    const auto gout =
        rand_vec(size_t(d.batch) * d.filters * d.out_h * d.out_w, rng);

    std::vector<double> gi1(in.size(), 0.0), gi2(in.size(), 0.0);
    kernels::serial::conv2d_input_grad(gout.data(), kern.data(), gi1.data(), d);
    kernels::conv2d_input_grad(gout.data(), kern.data(), gi2.data(), d);
    CHECK(max_abs_diff(gi1, gi2) < 1e-12);

    std::vector<double> gk1(kern.size(), 0.0), gk2(kern.size(), 0.0);
    kernels::serial::conv2d_kernel_grad(gout.data(), in.data(), gk1.data(), d);
    kernels::conv2d_kernel_grad(gout.data(), in.data(), gk2.data(), d);
    CHECK(max_abs_diff(gk1, gk2) < 1e-12);
  }
}

TEST_CASE("axpy and sum") {
  std::vector<double> y = {1.0, 2.0, 3.0};
  const std::vector<double> x = {10.0, 20.0, 30.0};
  kernels::axpy(0.5, x.data(), y.data(), 3);
  CHECK(y == std::vector<double>{6.0, 12.0, 18.0});
  CHECK(kernels::sum(y.data(), 3) == doctest::Approx(36.0));
  CHECK(kernels::all_finite(y.data(), 3));
  y[1] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(kernels::all_finite(y.data(), 3));
}

}  // TEST_SUITE
