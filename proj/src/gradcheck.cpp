#include "actlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "actlab/activations.hpp"
#include "actlab/network.hpp"
#include "actlab/ops.hpp"
#include "actlab/optim.hpp"
#include "actlab/tensor.hpp"

namespace actlab {

double fd_max_rel_err(const std::function<double()>& loss,
                      std::vector<double>& x,
                      const std::vector<double>& analytic, std::mt19937_64& rng,
                      int max_coords, double h) {
  std::vector<size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), size_t(0));
  if (int(coords.size()) > max_coords) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(size_t(max_coords));
  }
  double worst = 0.0;
  for (size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = loss();
    x[i] = saved - h;
    const double down = loss();
    x[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel =
        std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, rel);
  }
  return worst;
}

namespace {

std::vector<ActivationKind> all_kinds() {
  return {ActivationKind::dsrelu(), ActivationKind::relu(),
          ActivationKind::leaky_relu(), ActivationKind::sigmoid(),
          ActivationKind::tanh_fn(), ActivationKind::mish()};
}

GradCheckReport finish(std::string name, double err, int coords, double tol) {
  GradCheckReport r;
  r.name = std::move(name);
  r.max_rel_err = err;
  r.coords_checked = coords;
  r.tolerance = tol;
  r.pass = err < tol;
  return r;
}

}  // namespace

std::vector<GradCheckReport> activation_gradient_checks(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> point(-2.0, 2.0);
  std::uniform_real_distribution<double> progress(0.0, 1.0);
  std::vector<GradCheckReport> out;
  constexpr int kPoints = 100;
  constexpr double kTol = 1e-6;
  constexpr double kH = 1e-6;
  for (const ActivationKind& kind : all_kinds()) {
    double worst = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      double x = point(rng);
      // Keep clear of the ReLU-family kink; h reaches 1e-6 around the point.
      while (std::abs(x) < 1e-3) x = point(rng);
      const TrainingProgress t(progress(rng));
      double analytic;
      auto eval = [&](double v) {
        if (kind.is_dsrelu()) {
          return dsrelu_value(v, slope(kind.schedule, t));
        }
        return baseline_value(kind.kind, v, kind.leak);
      };
      if (kind.is_dsrelu()) {
        analytic = dsrelu_derivative(x, slope(kind.schedule, t));
      } else {
        analytic = baseline_derivative(kind.kind, x, kind.leak);
      }
      const double fd = (eval(x + kH) - eval(x - kH)) / (2.0 * kH);
      const double rel =
          std::abs(fd - analytic) / std::max(1.0, std::abs(analytic));
      worst = std::max(worst, rel);
    }
    out.push_back(finish("activation/" + kind.name(), worst, kPoints, kTol));
  }
  return out;
}

namespace {

// Checks tape gradients of `run` (a scalar loss over params and input)
// against finite differences on every tensor in `tensors`.
GradCheckReport check_tape(
    const std::string& name, std::vector<Tensor*> tensors,
    const std::function<Tensor(Graph&)>& run, std::mt19937_64& rng,
    int coords_per_tensor, double tol) {
  // Analytic gradients.
  for (Tensor* t : tensors) {
    t->drop_grad();
    t->grad();  // allocate zeros
  }
  {
    Graph g(Graph::Mode::Training);
    Tensor loss = run(g);
    g.backward(loss);
  }
  auto loss_value = [&]() {
    Graph g(Graph::Mode::Inference);
    return run(g)[0];
  };
  double worst = 0.0;
  int checked = 0;
  for (Tensor* t : tensors) {
    const std::vector<double> analytic = t->grad();
    const double err = fd_max_rel_err(loss_value, t->data(), analytic, rng,
                                      coords_per_tensor);
    worst = std::max(worst, err);
    checked += std::min<int>(coords_per_tensor, int(t->size()));
  }
  return finish(name, worst, checked, tol);
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -2.0,
                     double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

std::vector<GradCheckReport> layer_gradient_checks(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckReport> out;
  constexpr double kTol = 1e-4;
  constexpr int kCoords = 100;

  {  // dense
    Tensor x = random_tensor({4, 6}, rng);
    Tensor w = random_tensor({5, 6}, rng);
    Tensor b = random_tensor({5}, rng);
    auto run = [&](Graph& g) {
      return ops::sum(g, ops::linear(g, g.leaf(x), g.leaf(w), g.leaf(b)));
    };
    out.push_back(check_tape("layer/dense", {&x, &w, &b}, run, rng, kCoords,
                             kTol));
  }
  {  // conv
    Tensor x = random_tensor({2, 3, 6, 6}, rng);
    Tensor k = random_tensor({4, 3, 3, 3}, rng);
    auto run = [&](Graph& g) {
      // tanh keeps the objective nonlinear so kernel/input grads interact
      return ops::sum(g,
                      ops::tanh_fn(g, ops::conv2d(g, g.leaf(x), g.leaf(k), 1, 1)));
    };
    out.push_back(check_tape("layer/conv", {&x, &k}, run, rng, kCoords, kTol));
  }
  {  // strided conv
    Tensor x = random_tensor({2, 2, 7, 7}, rng);
    Tensor k = random_tensor({3, 2, 3, 3}, rng);
    auto run = [&](Graph& g) {
      return ops::sum(g,
                      ops::tanh_fn(g, ops::conv2d(g, g.leaf(x), g.leaf(k), 2, 1)));
    };
    out.push_back(
        check_tape("layer/conv_stride2", {&x, &k}, run, rng, kCoords, kTol));
  }
  {  // residual block via a one-block network
    NetworkSpec spec;
    spec.input = InputShape::chw(3, 5, 5);
    spec.layers = {ResidualBlockSpec{4, 2}, GlobalAvgPoolSpec{},
                   DenseSpec{3}};
    spec.activation = ActivationKind::tanh_fn();
    spec.num_classes = 3;
    spec.seed = seed;
    Network net = Network::build(spec);
    Tensor x = random_tensor({2, 3, 5, 5}, rng);
    std::vector<int> labels = {0, 2};
    std::vector<Tensor*> tensors = {&x};
    for (Param& p : net.parameters()) tensors.push_back(&p.value);
    auto run = [&](Graph& g) {
      return cross_entropy(g, net.forward(g, g.leaf(x)), labels);
    };
    out.push_back(check_tape("layer/residual_block", tensors, run, rng, 40,
                             kTol));
  }
  {  // global average pool (input gradient only; layer has no parameters)
    Tensor x = random_tensor({2, 3, 4, 4}, rng);
    auto run = [&](Graph& g) {
      return ops::sum(g, ops::tanh_fn(g, ops::global_avg_pool(g, g.leaf(x))));
    };
    out.push_back(
        check_tape("layer/global_avg_pool", {&x}, run, rng, kCoords, kTol));
  }
  {  // flatten (pass-through gradient)
    Tensor x = random_tensor({2, 3, 4, 4}, rng);
    auto run = [&](Graph& g) {
      Tensor f = ops::reshape(g, g.leaf(x), {2, 48});
      return ops::sum(g, ops::tanh_fn(g, f));
    };
    out.push_back(check_tape("layer/flatten", {&x}, run, rng, kCoords, kTol));
  }
  return out;
}

std::vector<GradCheckReport> network_gradient_checks(uint64_t seed) {
  std::vector<GradCheckReport> out;
  constexpr double kTol = 1e-4;
  for (const ActivationKind& kind : all_kinds()) {
    std::mt19937_64 rng(seed + 17);
    NetworkSpec spec;
    spec.input = InputShape::chw(3, 9, 9);
    spec.layers = {ConvSpec{6, 3, 1, 1}, ResidualBlockSpec{6, 1},
                   ResidualBlockSpec{10, 2}, GlobalAvgPoolSpec{},
                   DenseSpec{3}};
    spec.activation = kind;
    spec.num_classes = 3;
    spec.seed = seed ^ 0x5eedULL;
    Network net = Network::build(spec);
    net.set_progress(TrainingProgress(0.3));
    Tensor x = random_tensor({2, 3, 9, 9}, rng, -1.0, 1.0);
    std::vector<int> labels = {1, 2};
    std::vector<Tensor*> tensors = {&x};
    for (Param& p : net.parameters()) tensors.push_back(&p.value);
    auto run = [&](Graph& g) {
      return cross_entropy(g, net.forward(g, g.leaf(x)), labels);
    };
    // ~100 coordinates spread over input + parameters
    const int per_tensor = std::max<int>(
        4, int(100 / std::max<size_t>(1, tensors.size())));
    out.push_back(check_tape("network/" + kind.name(), tensors, run, rng,
                             per_tensor, kTol));
  }
  return out;
}

bool all_pass(const std::vector<GradCheckReport>& reports) {
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace actlab
