#include "actlab/tensor.hpp"

#include <sstream>
#include <stdexcept>

#include "actlab/kernels.hpp"

namespace actlab {

int64_t shape_size(const Shape& s) {
  int64_t n = 1;
  for (int e : s) n *= e;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << 'x';
    os << s[i];
  }
  os << ']';
  return os.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (int e : shape_) {
    if (e < 0) throw std::invalid_argument("tensor extent must be nonnegative");
  }
  if (shape_size(shape_) != int64_t(data_.size())) {
    throw std::invalid_argument("tensor data length " +
                                std::to_string(data_.size()) +
                                " does not match shape " + shape_str(shape_));
  }
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  for (int e : shape_) {
    if (e < 0) throw std::invalid_argument("tensor extent must be nonnegative");
  }
  data_.assign(size_t(shape_size(shape_)), 0.0);
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  t.data_.assign(t.data_.size(), value);
  return t;
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

std::vector<double>& Tensor::grad() {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() { grad_.assign(grad_.size(), 0.0); }

void require_finite(const std::vector<double>& v, const char* what) {
  if (!kernels::all_finite(v.data(), int64_t(v.size()))) {
    throw std::runtime_error(std::string(what) +
                             " produced a non-finite value");
  }
}

void require_finite(const Tensor& t, const char* what) {
  require_finite(t.data(), what);
}

Tensor Graph::leaf(Tensor& param) {
  Tensor out(param.shape(), param.data());
  if (recording()) {
    Node node;
    node.size = param.size();
    node.sink = &param;
    nodes_.push_back(std::move(node));
    out.node = int(nodes_.size()) - 1;
  }
  return out;
}

int Graph::record(int64_t size, PullFn pull) {
  Node node;
  node.size = size;
  node.pull = std::move(pull);
  nodes_.push_back(std::move(node));
  return int(nodes_.size()) - 1;
}

std::vector<double>& Graph::grad(int id) {
  Node& node = nodes_.at(size_t(id));
  if (node.grad.empty()) node.grad.assign(size_t(node.size), 0.0);
  return node.grad;
}

void Graph::backward(const Tensor& loss) {
  if (!recording() || loss.node < 0) {
    throw std::runtime_error(
        "backward requires a loss recorded on a training-mode graph");
  }
  if (loss.size() != 1) {
    throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                shape_str(loss.shape()));
  }
  grad(loss.node).assign(1, 1.0);
  for (int id = loss.node; id >= 0; --id) {
    Node& node = nodes_[size_t(id)];
    if (node.grad.empty()) continue;  // does not influence the loss
    if (node.sink != nullptr) {
      kernels::axpy(1.0, node.grad.data(), node.sink->grad().data(),
                    node.size);
    } else if (node.pull) {
      node.pull(*this, node.grad);
    }
  }
}

}  // namespace actlab
