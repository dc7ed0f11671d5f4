#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace actlab {

using Shape = std::vector<int>;

// Product of extents; the empty shape is a scalar (size 1).
int64_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);
bool same_shape(const Shape& a, const Shape& b);

// Dense n-dimensional array of 64-bit floats, flat row-major storage.
// `node` is a handle into the active Graph (-1 when detached). A tensor with
// an allocated `grad` is a parameter-style leaf; gradients accumulate there.
class Tensor {
 public:
  Tensor() : shape_{0} {}
  Tensor(Shape shape, std::vector<double> data);
  explicit Tensor(Shape shape);  // zero-filled

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);

  const Shape& shape() const { return shape_; }
  int64_t size() const { return int64_t(data_.size()); }
  int rank() const { return int(shape_.size()); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double& operator[](int64_t i) { return data_[size_t(i)]; }
  double operator[](int64_t i) const { return data_[size_t(i)]; }

  bool has_grad() const { return !grad_.empty(); }
  std::vector<double>& grad();  // allocates zeros on first use
  const std::vector<double>& grad() const { return grad_; }
  void zero_grad();
  void drop_grad() { grad_.clear(); }

  int node = -1;

 private:
  Shape shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
};

// Throws if any element of `t` is NaN/Inf; `what` names the producing
// operation in the message.
void require_finite(const Tensor& t, const char* what);
void require_finite(const std::vector<double>& v, const char* what);

// Append-only record of a forward pass. Nodes are topological by
// construction: a node only references smaller ids. backward() walks the
// tape once, in reverse id order, and accumulates into leaf parameters'
// grad buffers. A graph is rebuilt per forward pass and is confined to one
// worker.
class Graph {
 public:
  enum class Mode { Training, Inference };

  explicit Graph(Mode mode = Mode::Training) : mode_(mode) {}

  Mode mode() const { return mode_; }
  bool recording() const { return mode_ == Mode::Training; }
  size_t node_count() const { return nodes_.size(); }

  // Registers `param` as a leaf. Returned tensor carries the node handle;
  // after backward(), param.grad receives this leaf's accumulated gradient.
  Tensor leaf(Tensor& param);

  // Gradient of `this node's output` pulled into input node buffers.
  using PullFn = std::function<void(Graph&, const std::vector<double>&)>;

  // Records an operation node of `size` output elements. Returns its id.
  int record(int64_t size, PullFn pull);

  // Node grad buffer, lazily allocated to zeros.
  std::vector<double>& grad(int id);

  // Seeds d(loss)/d(loss)=1 and propagates through the tape.
  void backward(const Tensor& loss);

 private:
  struct Node {
    int64_t size;
    PullFn pull;            // null for leaves
    Tensor* sink = nullptr; // leaf target
    std::vector<double> grad;
  };
  std::vector<Node> nodes_;
  Mode mode_;
};

}  // namespace actlab
