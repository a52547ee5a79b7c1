#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace scatterhsd::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::uint64_t id = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads self.grad and accumulates into the grads of self.inputs.
  std::function<void(Node& self)> backward;
};

/// Dense row-major double tensor with an optional reverse-mode history.
///
/// Tensors are cheap handles; copying one shares the underlying node. Node ids are
/// drawn from a global monotonic counter, so an op's inputs always carry smaller ids
/// than the op itself and creation order is a valid topological order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor scalar(double v) { return constant({}, {v}); }
  static Tensor zeros(Shape shape, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  std::uint64_t node_id() const { return node_->id; }
  const char* op() const { return node_->op; }

  std::span<const double> data() const { return node_->value; }
  /// Empty until backward() has reached this tensor.
  std::span<const double> grad() const { return node_->grad; }
  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }

  /// In-place access for optimizers and initialisers; only valid on leaves.
  std::span<double> mutable_data();
  std::span<double> mutable_grad();
  void zero_grad();

  const std::shared_ptr<Node>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Reverse-topological record of the ops reachable from a loss.
struct Tape {
  struct Entry {
    std::uint64_t node_id;
    const char* op;
    std::vector<std::uint64_t> input_ids;
  };
  std::vector<Entry> entries;  // inputs precede the ops that consume them
};

Tape record(const Tensor& loss);

/// Accumulates d(loss)/d(leaf) into every requires_grad leaf reachable from `loss`.
/// Leaf gradients are accumulated, not overwritten; call zero_grad between steps.
void backward(const Tensor& loss);

// Elementwise ops on equal shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
/// x[n, in] * w[in, out] + b[out]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// Row-wise softmax over the last axis of a rank-1 or rank-2 tensor.
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Max over one axis; the gradient goes to the argmax, lowest index on ties.
Tensor max_over_set(const Tensor& a, std::size_t axis);

/// Rows of `a` (along axis 0) in the given order; repeats allowed.
Tensor gather(const Tensor& a, const std::vector<std::size_t>& indices);

/// Per-row weighted sum of gathered rows: out[i] = sum_j w[i][j] * a[idx[i][j]].
/// `idx` and `w` are flattened [n, k] row-major; weights are constants.
Tensor weighted_gather(const Tensor& a, const std::vector<std::size_t>& idx,
                       const std::vector<double>& w, std::size_t k);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

/// out[i] = a[i, cols[i]] for a rank-2 tensor.
Tensor pick(const Tensor& a, const std::vector<std::size_t>& cols);

Tensor reshape(const Tensor& a, Shape shape);

/// Same values, no history.
Tensor detach(const Tensor& a);

/// Per-column standardisation of a[n, m]: (x - mean) / sqrt(var + eps), no learned affine.
Tensor batchnorm_free_norm(const Tensor& a, double eps = 1e-5);

}  // namespace scatterhsd::ad
