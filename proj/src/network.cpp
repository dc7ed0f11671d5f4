#include "actlab/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "actlab/ops.hpp"

namespace actlab {

std::string layer_kind_name(const LayerSpec& l) {
  if (std::holds_alternative<DenseSpec>(l)) return "dense";
  if (std::holds_alternative<ConvSpec>(l)) return "conv";
  if (std::holds_alternative<ResidualBlockSpec>(l)) return "residual_block";
  if (std::holds_alternative<GlobalAvgPoolSpec>(l)) return "global_avg_pool";
  return "flatten";
}

InputShape InputShape::flat_dim(int d) {
  InputShape s;
  s.flat = d;
  return s;
}

InputShape InputShape::chw(int c, int h, int w) {
  InputShape s;
  s.image = true;
  s.channels = c;
  s.height = h;
  s.width = w;
  return s;
}

int64_t InputShape::size() const {
  return image ? int64_t(channels) * height * width : flat;
}

namespace {

[[noreturn]] void build_error(size_t layer_index, const LayerSpec& l,
                              const std::string& msg) {
  throw std::invalid_argument("layer " + std::to_string(layer_index) + " (" +
                              layer_kind_name(l) + "): " + msg);
}

int conv_out_extent(int in, int k, int stride, int pad) {
  const int num = in + 2 * pad - k;
  if (num < 0 || num % stride != 0) return -1;
  return num / stride + 1;
}

// Kaiming-uniform fan-in with gain sqrt(2): U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
Tensor kaiming_uniform(Shape shape, int fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / double(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

Network Network::build(const NetworkSpec& spec) {
  spec.activation.validate();
  if (spec.num_classes < 1) {
    throw std::invalid_argument("network: num_classes must be positive");
  }
  if (spec.layers.empty()) {
    throw std::invalid_argument("network: layer list is empty");
  }
  if (spec.input.size() < 1) {
    throw std::invalid_argument("network: input shape is empty");
  }

  Network net;
  net.spec_ = spec;
  std::mt19937_64 rng(spec.seed);

  ShapeInfo cur;
  cur.image = spec.input.image;
  cur.flat = spec.input.flat;
  cur.c = spec.input.channels;
  cur.h = spec.input.height;
  cur.w = spec.input.width;

  for (size_t li = 0; li < spec.layers.size(); ++li) {
    const LayerSpec& ls = spec.layers[li];
    Layer layer;
    layer.spec = ls;
    layer.in = cur;
    layer.first_param = int(net.params_.size());
    const std::string prefix = "layer" + std::to_string(li);
    const bool last = li + 1 == spec.layers.size();

    if (const auto* d = std::get_if<DenseSpec>(&ls)) {
      if (cur.image) build_error(li, ls, "expects flat input, got image");
      if (d->out < 1) build_error(li, ls, "output dim must be positive");
      net.params_.push_back(
          {prefix + ".weight",
           kaiming_uniform({d->out, cur.flat}, cur.flat, rng)});
      net.params_.push_back({prefix + ".bias", Tensor::zeros({d->out})});
      cur.flat = d->out;
      layer.activate = !last;
    } else if (const auto* cv = std::get_if<ConvSpec>(&ls)) {
      if (!cur.image) build_error(li, ls, "expects image input, got flat");
      if (cv->filters < 1 || cv->kernel < 1) {
        build_error(li, ls, "filters and kernel must be positive");
      }
      const int oh = conv_out_extent(cur.h, cv->kernel, cv->stride, cv->pad);
      const int ow = conv_out_extent(cur.w, cv->kernel, cv->stride, cv->pad);
      if (oh < 1 || ow < 1) {
        build_error(li, ls,
                    "non-integral output extent for input " +
                        std::to_string(cur.h) + "x" + std::to_string(cur.w));
      }
      const int fan_in = cur.c * cv->kernel * cv->kernel;
      net.params_.push_back(
          {prefix + ".weight",
           kaiming_uniform({cv->filters, cur.c, cv->kernel, cv->kernel},
                           fan_in, rng)});
      net.params_.push_back({prefix + ".bias", Tensor::zeros({cv->filters})});
      cur.c = cv->filters;
      cur.h = oh;
      cur.w = ow;
      layer.activate = !last;
    } else if (const auto* rb = std::get_if<ResidualBlockSpec>(&ls)) {
      if (!cur.image) build_error(li, ls, "expects image input, got flat");
      if (rb->filters < 1 || rb->stride < 1) {
        build_error(li, ls, "filters and stride must be positive");
      }
      const int oh = conv_out_extent(cur.h, 3, rb->stride, 1);
      const int ow = conv_out_extent(cur.w, 3, rb->stride, 1);
      if (oh < 1 || ow < 1) {
        build_error(li, ls,
                    "non-integral output extent for input " +
                        std::to_string(cur.h) + "x" + std::to_string(cur.w));
      }
      layer.has_projection = (rb->stride != 1 || rb->filters != cur.c);
      if (layer.has_projection) {
        const int sh = conv_out_extent(cur.h, 1, rb->stride, 0);
        const int sw = conv_out_extent(cur.w, 1, rb->stride, 0);
        if (sh != oh || sw != ow) {
          build_error(li, ls, "projection shortcut extent mismatch");
        }
      }
      net.params_.push_back(
          {prefix + ".conv1.weight",
           kaiming_uniform({rb->filters, cur.c, 3, 3}, cur.c * 9, rng)});
      net.params_.push_back(
          {prefix + ".conv1.bias", Tensor::zeros({rb->filters})});
      net.params_.push_back(
          {prefix + ".conv2.weight",
           kaiming_uniform({rb->filters, rb->filters, 3, 3}, rb->filters * 9,
                           rng)});
      net.params_.push_back(
          {prefix + ".conv2.bias", Tensor::zeros({rb->filters})});
      if (layer.has_projection) {
        net.params_.push_back(
            {prefix + ".proj.weight",
             kaiming_uniform({rb->filters, cur.c, 1, 1}, cur.c, rng)});
        net.params_.push_back(
            {prefix + ".proj.bias", Tensor::zeros({rb->filters})});
      }
      cur.c = rb->filters;
      cur.h = oh;
      cur.w = ow;
    } else if (std::holds_alternative<GlobalAvgPoolSpec>(ls)) {
      if (!cur.image) build_error(li, ls, "expects image input, got flat");
      cur.image = false;
      cur.flat = cur.c;
    } else {  // Flatten
      if (!cur.image) build_error(li, ls, "expects image input, got flat");
      cur.image = false;
      cur.flat = cur.c * cur.h * cur.w;
    }

    layer.out = cur;
    layer.param_count = int(net.params_.size()) - layer.first_param;
    net.layers_.push_back(std::move(layer));
  }

  if (cur.image || cur.flat != spec.num_classes) {
    throw std::invalid_argument(
        "network: final layer produces " +
        std::string(cur.image ? "an image" : std::to_string(cur.flat) +
                                                 " features") +
        ", expected num_classes=" + std::to_string(spec.num_classes));
  }
  net.set_progress(TrainingProgress(0.0));
  return net;
}

void Network::set_progress(TrainingProgress t) {
  progress_ = t;
  if (spec_.activation.is_dsrelu()) {
    slope_ = slope(spec_.activation.schedule, t);
  }
}

Tensor Network::activated(Graph& g, const Tensor& x) const {
  return ops::apply_activation(g, x, spec_.activation, slope_);
}

Tensor Network::forward(Graph& g, const Tensor& batch) {
  require_finite(batch, "network input");
  if (batch.rank() < 2) {
    throw std::invalid_argument("network: batch must have a leading batch dim");
  }
  const int n = batch.shape()[0];
  int64_t row = 1;
  for (int i = 1; i < batch.rank(); ++i) row *= batch.shape()[i];
  if (row != spec_.input.size()) {
    throw std::invalid_argument("network: batch row size " +
                                std::to_string(row) +
                                " does not match input shape size " +
                                std::to_string(spec_.input.size()));
  }

  Tensor x = batch;
  if (spec_.input.image) {
    const Shape want = {n, spec_.input.channels, spec_.input.height,
                        spec_.input.width};
    if (x.shape() != want) x = ops::reshape(g, x, want);
  } else if (x.rank() != 2) {
    x = ops::reshape(g, x, {n, spec_.input.flat});
  }

  for (const Layer& layer : layers_) {
    const int p = layer.first_param;
    if (std::holds_alternative<DenseSpec>(layer.spec)) {
      x = ops::linear(g, x, g.leaf(params_[size_t(p)].value),
                      g.leaf(params_[size_t(p) + 1].value));
      if (layer.activate) x = activated(g, x);
    } else if (const auto* cv = std::get_if<ConvSpec>(&layer.spec)) {
      x = ops::conv2d(g, x, g.leaf(params_[size_t(p)].value), cv->stride,
                      cv->pad);
      x = ops::add_channel_bias(g, x, g.leaf(params_[size_t(p) + 1].value));
      if (layer.activate) x = activated(g, x);
    } else if (const auto* rb = std::get_if<ResidualBlockSpec>(&layer.spec)) {
      Tensor h = ops::conv2d(g, x, g.leaf(params_[size_t(p)].value),
                             rb->stride, 1);
      h = ops::add_channel_bias(g, h, g.leaf(params_[size_t(p) + 1].value));
      h = activated(g, h);
      h = ops::conv2d(g, h, g.leaf(params_[size_t(p) + 2].value), 1, 1);
      h = ops::add_channel_bias(g, h, g.leaf(params_[size_t(p) + 3].value));
      Tensor shortcut = x;
      if (layer.has_projection) {
        shortcut = ops::conv2d(g, x, g.leaf(params_[size_t(p) + 4].value),
                               rb->stride, 0);
        shortcut = ops::add_channel_bias(
            g, shortcut, g.leaf(params_[size_t(p) + 5].value));
      }
      x = activated(g, ops::add(g, h, shortcut));
    } else if (std::holds_alternative<GlobalAvgPoolSpec>(layer.spec)) {
      x = ops::global_avg_pool(g, x);
    } else {
      x = ops::reshape(g, x, {n, layer.out.flat});
    }
  }
  return x;
}

int64_t Network::parameter_count() const {
  int64_t total = 0;
  for (const Param& p : params_) total += p.value.size();
  return total;
}

void Network::zero_grads() {
  for (Param& p : params_) p.value.drop_grad();
}

nlohmann::json NetworkSpec::to_json() const {
  nlohmann::json j;
  if (input.image) {
    j["input"] = {input.channels, input.height, input.width};
  } else {
    j["input"] = input.flat;
  }
  j["layers"] = nlohmann::json::array();
  for (const LayerSpec& l : layers) {
    nlohmann::json lj;
    lj["type"] = layer_kind_name(l);
    if (const auto* d = std::get_if<DenseSpec>(&l)) {
      lj["out"] = d->out;
    } else if (const auto* c = std::get_if<ConvSpec>(&l)) {
      lj["filters"] = c->filters;
      lj["kernel"] = c->kernel;
      lj["stride"] = c->stride;
      lj["pad"] = c->pad;
    } else if (const auto* r = std::get_if<ResidualBlockSpec>(&l)) {
      lj["filters"] = r->filters;
      lj["stride"] = r->stride;
    }
    j["layers"].push_back(lj);
  }
  j["num_classes"] = num_classes;
  j["seed"] = seed;
  j["activation"] = activation.name();
  if (activation.is_dsrelu()) {
    j["schedule"] = {{"a", activation.schedule.initial_slope},
                     {"b", activation.schedule.final_slope},
                     {"k", activation.schedule.steepness}};
  }
  if (activation.kind == ActivationKind::Kind::LeakyReLU) {
    j["leak"] = activation.leak;
  }
  return j;
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
  NetworkSpec spec;
  const auto& in = j.at("input");
  if (in.is_array()) {
    if (in.size() != 3) {
      throw std::invalid_argument("network spec: input must be D or [C,H,W]");
    }
    spec.input = InputShape::chw(in[0].get<int>(), in[1].get<int>(),
                                 in[2].get<int>());
  } else {
    spec.input = InputShape::flat_dim(in.get<int>());
  }
  for (const auto& lj : j.at("layers")) {
    const std::string type = lj.at("type").get<std::string>();
    if (type == "dense") {
      spec.layers.push_back(DenseSpec{lj.at("out").get<int>()});
    } else if (type == "conv") {
      ConvSpec c;
      c.filters = lj.at("filters").get<int>();
      c.kernel = lj.value("kernel", 3);
      c.stride = lj.value("stride", 1);
      c.pad = lj.value("pad", 1);
      spec.layers.push_back(c);
    } else if (type == "residual_block") {
      ResidualBlockSpec r;
      r.filters = lj.at("filters").get<int>();
      r.stride = lj.value("stride", 1);
      spec.layers.push_back(r);
    } else if (type == "global_avg_pool") {
      spec.layers.push_back(GlobalAvgPoolSpec{});
    } else if (type == "flatten") {
      spec.layers.push_back(FlattenSpec{});
    } else {
      throw std::invalid_argument("network spec: unknown layer type '" + type +
                                  "'");
    }
  }
  spec.num_classes = j.at("num_classes").get<int>();
  spec.seed = j.value("seed", uint64_t(0));
  SlopeSchedule sched = SlopeSchedule::defaults();
  if (j.contains("schedule")) {
    const auto& sj = j["schedule"];
    if (sj.contains("a_deg") || sj.contains("b_deg")) {
      sched = SlopeSchedule::from_degrees(sj.value("a_deg", 85.0),
                                          sj.value("b_deg", 10.0),
                                          sj.value("k", 5.0));
    } else {
      sched = SlopeSchedule{sj.value("a", kDefaultInitialSlope),
                            sj.value("b", kDefaultFinalSlope),
                            sj.value("k", 5.0)};
      sched.validate();
    }
  }
  spec.activation = ActivationKind::from_name(j.value("activation", "relu"),
                                              sched, j.value("leak", 0.01));
  return spec;
}

namespace {

void write_f64_le(std::ofstream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (unsigned char)((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64_le(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_parameters(const Network& net, const std::string& bin_path,
                     const std::string& manifest_path) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write '" + bin_path + "'");
  nlohmann::json manifest = nlohmann::json::array();
  int64_t offset = 0;
  for (const Param& p : net.parameters()) {
    for (double v : p.value.data()) write_f64_le(bin, v);
    manifest.push_back({{"name", p.name},
                        {"shape", p.value.shape()},
                        {"offset", offset},
                        {"count", p.value.size()}});
    offset += p.value.size();
  }
  if (!bin) throw std::runtime_error("write to '" + bin_path + "' failed");
  std::ofstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot write '" + manifest_path + "'");
  mf << manifest.dump(2) << '\n';
}

void load_parameters(Network& net, const std::string& bin_path) {
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open '" + bin_path + "'");
  for (Param& p : net.parameters()) {
    for (auto& v : p.value.data()) v = read_f64_le(bin);
    if (!bin) {
      throw std::runtime_error("'" + bin_path +
                               "' truncated while reading parameter '" +
                               p.name + "'");
    }
    require_finite(p.value, "loaded parameter");
  }
  bin.peek();
  if (!bin.eof()) {
    throw std::runtime_error("'" + bin_path +
                             "' has trailing bytes beyond the parameters");
  }
}

}  // namespace actlab
