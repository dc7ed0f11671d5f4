#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "actlab/activations.hpp"
#include "actlab/optim.hpp"
#include "actlab/tensor.hpp"

namespace actlab {

struct DenseSpec {
  int out = 0;
};
struct ConvSpec {
  int filters = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;
};
// Two 3x3 convolutions (stride s then 1, pad 1) plus a shortcut added before
// the final activation; the shortcut is a 1x1 stride-s projection when the
// channel count or stride changes, identity otherwise.
struct ResidualBlockSpec {
  int filters = 0;
  int stride = 1;
};
struct GlobalAvgPoolSpec {};
struct FlattenSpec {};

using LayerSpec = std::variant<DenseSpec, ConvSpec, ResidualBlockSpec,
                               GlobalAvgPoolSpec, FlattenSpec>;

std::string layer_kind_name(const LayerSpec& l);

// Either a flat feature count or a C×H×W image.
struct InputShape {
  bool image = false;
  int flat = 0;
  int channels = 0, height = 0, width = 0;

  static InputShape flat_dim(int d);
  static InputShape chw(int c, int h, int w);
  int64_t size() const;
};

struct NetworkSpec {
  InputShape input;
  std::vector<LayerSpec> layers;
  ActivationKind activation = ActivationKind::relu();
  int num_classes = 0;
  uint64_t seed = 0;

  nlohmann::json to_json() const;
  static NetworkSpec from_json(const nlohmann::json& j);
};

// A built, parameterized network. The configured activation follows every
// dense/conv layer except the final one and runs inside residual blocks.
// For DSReLU the slope is evaluated once in set_progress and cached.
class Network {
 public:
  static Network build(const NetworkSpec& spec);

  // batch: [N×D] for flat inputs; [N×C×H×W] or row-major-flattened [N×CHW]
  // for image inputs. Returns logits [N×num_classes].
  Tensor forward(Graph& g, const Tensor& batch);

  void set_progress(TrainingProgress t);
  TrainingProgress progress() const { return progress_; }
  double current_slope() const { return slope_; }

  std::vector<Param>& parameters() { return params_; }
  const std::vector<Param>& parameters() const { return params_; }
  int64_t parameter_count() const;
  void zero_grads();

  const NetworkSpec& spec() const { return spec_; }

 private:
  struct ShapeInfo {
    bool image = false;
    int flat = 0;
    int c = 0, h = 0, w = 0;
  };
  struct Layer {
    LayerSpec spec;
    ShapeInfo in, out;
    int first_param = 0;
    int param_count = 0;
    bool has_projection = false;
    bool activate = false;
  };

  Network() = default;
  Tensor activated(Graph& g, const Tensor& x) const;

  NetworkSpec spec_;
  std::vector<Param> params_;
  std::vector<Layer> layers_;
  TrainingProgress progress_{0.0};
  double slope_ = 1.0;
};

// Parameters as a flat little-endian f64 blob plus a JSON manifest giving
// name/shape/offset per tensor.
void save_parameters(const Network& net, const std::string& bin_path,
                     const std::string& manifest_path);
void load_parameters(Network& net, const std::string& bin_path);

}  // namespace actlab
