#include "scatterhsd/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "scatterhsd/error.hpp"

namespace scatterhsd::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

std::atomic<std::uint64_t> g_next_id{1};

using NodePtr = std::shared_ptr<Node>;

void check_finite(const std::vector<double>& v, const char* op) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericsError(std::string(op) + " produced a non-finite value");
  }
}

// Grad buffer of an input, allocated on first use.
std::vector<double>& grad_of(Node& n) {
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Tensor make(const char* op, Shape shape, std::vector<double> value, std::vector<NodePtr> inputs,
            std::function<void(Node&)> bw) {
  check_finite(value, op);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  node->op = op;
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [](const NodePtr& n) { return n->requires_grad; });
  if (needs) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(bw);
  }
  return Tensor(std::move(node));
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.defined() && b.defined(), std::string(op) + ": undefined tensor");
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                                      " vs " + shape_string(b.shape()));
}

// (rows, cols) of a tensor viewed as a matrix over its last axis.
std::pair<std::size_t, std::size_t> as_rows(const Tensor& a, const char* op) {
  require(a.rank() == 1 || a.rank() == 2, std::string(op) + ": expected rank 1 or 2, got " +
                                              shape_string(a.shape()));
  if (a.rank() == 1) return {1, a.dim(0)};
  return {a.dim(0), a.dim(1)};
}

template <class F, class D>
Tensor unary(const Tensor& a, const char* op, F f, D dfdx) {
  require(a.defined(), std::string(op) + ": undefined tensor");
  std::vector<double> out(a.size());
  const auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  return make(op, a.shape(), std::move(out), {a.node()}, [dfdx](Node& self) {
    Node& in = *self.inputs[0];
    auto& g = grad_of(in);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * dfdx(in.value[i], self.value[i]);
  });
}

}  // namespace

std::size_t numel(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  if (numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_string(shape) + " given " +
                     std::to_string(values.size()) + " values");
  }
  return make("constant", std::move(shape), std::move(values), {}, nullptr);
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  t.node_->op = "parameter";
  return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = numel(shape);
  return requires_grad ? parameter(std::move(shape), std::vector<double>(n, 0.0))
                       : constant(std::move(shape), std::vector<double>(n, 0.0));
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

std::span<double> Tensor::mutable_data() {
  if (node_->backward) throw InvalidInput("mutable_data() on a non-leaf tensor");
  return node_->value;
}

std::span<double> Tensor::mutable_grad() { return grad_of(*node_); }

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

namespace {

std::vector<Node*> topo_order(const Tensor& loss) {
  std::vector<Node*> nodes;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{loss.node().get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!n->requires_grad || !seen.insert(n).second) continue;
    nodes.push_back(n);
    for (const auto& in : n->inputs) stack.push_back(in.get());
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->id < b->id; });
  return nodes;
}

}  // namespace

Tape record(const Tensor& loss) {
  Tape tape;
  for (Node* n : topo_order(loss)) {
    Tape::Entry e{n->id, n->op, {}};
    for (const auto& in : n->inputs) e.input_ids.push_back(in->id);
    tape.entries.push_back(std::move(e));
  }
  return tape;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw InvalidInput("backward() needs a scalar loss");
  }
  if (!loss.requires_grad()) return;
  auto nodes = topo_order(loss);
  for (Node* n : nodes) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);
  }
  grad_of(*loss.node())[0] += 1.0;
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make("add", a.shape(), std::move(out), {a.node(), b.node()}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      Node& in = *self.inputs[k];
      if (!in.requires_grad) continue;
      auto& g = grad_of(in);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make("sub", a.shape(), std::move(out), {a.node(), b.node()}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      Node& in = *self.inputs[k];
      if (!in.requires_grad) continue;
      const double sign = k == 0 ? 1.0 : -1.0;
      auto& g = grad_of(in);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make("mul", a.shape(), std::move(out), {a.node(), b.node()}, [](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    if (x.requires_grad) {
      auto& g = grad_of(x);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      auto& g = grad_of(y);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * x.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  return unary(a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.defined() && b.defined() && a.rank() == 2 && b.rank() == 2,
          "matmul: expected two rank-2 tensors");
  require(a.dim(1) == b.dim(0), "matmul: inner dimension mismatch " + shape_string(a.shape()) +
                                    " x " + shape_string(b.shape()));
  const auto n = a.dim(0), k = a.dim(1), m = b.dim(1);
  std::vector<double> out(n * m);
  const auto an = static_cast<Eigen::Index>(n), ak = static_cast<Eigen::Index>(k),
             bm = static_cast<Eigen::Index>(m);
  MapMat(out.data(), an, bm).noalias() =
      ConstMapMat(a.data().data(), an, ak) * ConstMapMat(b.data().data(), ak, bm);
  return make("matmul", {n, m}, std::move(out), {a.node(), b.node()}, [an, ak, bm](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    ConstMapMat dout(self.grad.data(), an, bm);
    if (x.requires_grad) {
      MapMat(grad_of(x).data(), an, ak).noalias() +=
          dout * ConstMapMat(y.value.data(), ak, bm).transpose();
    }
    if (y.requires_grad) {
      MapMat(grad_of(y).data(), ak, bm).noalias() +=
          ConstMapMat(x.value.data(), an, ak).transpose() * dout;
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.defined() && w.defined() && b.defined(), "linear: undefined tensor");
  require(x.rank() == 2 && w.rank() == 2 && b.rank() == 1, "linear: expected x[n,in], w[in,out], b[out]");
  require(x.dim(1) == w.dim(0) && w.dim(1) == b.dim(0),
          "linear: incompatible shapes " + shape_string(x.shape()) + ", " +
              shape_string(w.shape()) + ", " + shape_string(b.shape()));
  const auto n = static_cast<Eigen::Index>(x.dim(0));
  const auto in = static_cast<Eigen::Index>(w.dim(0));
  const auto out_dim = static_cast<Eigen::Index>(w.dim(1));
  std::vector<double> out(x.dim(0) * w.dim(1));
  MapMat y(out.data(), n, out_dim);
  y.noalias() = ConstMapMat(x.data().data(), n, in) * ConstMapMat(w.data().data(), in, out_dim);
  const Eigen::Map<const Eigen::RowVectorXd> bias(b.data().data(), out_dim);
  y.rowwise() += bias;
  return make("linear", {x.dim(0), w.dim(1)}, std::move(out), {x.node(), w.node(), b.node()},
              [n, in, out_dim](Node& self) {
                Node& xs = *self.inputs[0];
                Node& ws = *self.inputs[1];
                Node& bs = *self.inputs[2];
                ConstMapMat dy(self.grad.data(), n, out_dim);
                if (xs.requires_grad) {
                  MapMat(grad_of(xs).data(), n, in).noalias() +=
                      dy * ConstMapMat(ws.value.data(), in, out_dim).transpose();
                }
                if (ws.requires_grad) {
                  MapMat(grad_of(ws).data(), in, out_dim).noalias() +=
                      ConstMapMat(xs.value.data(), n, in).transpose() * dy;
                }
                if (bs.requires_grad) {
                  Eigen::Map<Eigen::RowVectorXd>(grad_of(bs).data(), out_dim) += dy.colwise().sum();
                }
              });
}

Tensor softmax(const Tensor& a) {
  const auto [rows, cols] = as_rows(a, "softmax");
  std::vector<double> out(a.size());
  const auto x = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    double* yr = out.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += (yr[c] = std::exp(xr[c] - mx));
    for (std::size_t c = 0; c < cols; ++c) yr[c] /= z;
  }
  return make("softmax", a.shape(), std::move(out), {a.node()}, [rows, cols](Node& self) {
    auto& g = grad_of(*self.inputs[0]);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* dy = self.grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += dy[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += y[c] * (dy[c] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& a) {
  const auto [rows, cols] = as_rows(a, "log_softmax");
  std::vector<double> out(a.size());
  const auto x = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    double* yr = out.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(xr[c] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) yr[c] = xr[c] - lse;
  }
  return make("log_softmax", a.shape(), std::move(out), {a.node()}, [rows, cols](Node& self) {
    auto& g = grad_of(*self.inputs[0]);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* dy = self.grad.data() + r * cols;
      double total = 0.0;
      for (std::size_t c = 0; c < cols; ++c) total += dy[c];
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += dy[c] - std::exp(y[c]) * total;
    }
  });
}

Tensor sum(const Tensor& a) {
  require(a.defined(), "sum: undefined tensor");
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make("sum", {}, {s}, {a.node()}, [](Node& self) {
    auto& g = grad_of(*self.inputs[0]);
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  require(a.defined() && a.size() > 0, "mean: empty tensor");
  double s = 0.0;
  for (double v : a.data()) s += v;
  const double inv = 1.0 / static_cast<double>(a.size());
  return make("mean", {}, {s * inv}, {a.node()}, [inv](Node& self) {
    auto& g = grad_of(*self.inputs[0]);
    for (auto& v : g) v += self.grad[0] * inv;
  });
}

Tensor max_over_set(const Tensor& a, std::size_t axis) {
  require(a.defined() && axis < a.rank(), "max_over_set: axis out of range");
  const auto& s = a.shape();
  require(s[axis] > 0, "max_over_set: empty axis");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];
  Shape out_shape;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != axis) out_shape.push_back(s[i]);
  }
  std::vector<double> out(outer * inner);
  std::vector<std::size_t> arg(outer * inner);
  const auto x = a.data();
  for (std::size_t o = 0; o < outer; ++o) {
    const double* base = x.data() + o * len * inner;
    double* best = out.data() + o * inner;
    std::size_t* best_i = arg.data() + o * inner;
    for (std::size_t j = 0; j < inner; ++j) {
      best[j] = base[j];
      best_i[j] = o * len * inner + j;
    }
    for (std::size_t l = 1; l < len; ++l) {
      const double* row = base + l * inner;
      for (std::size_t j = 0; j < inner; ++j) {
        if (row[j] > best[j]) {  // strict: ties keep the lowest index
          best[j] = row[j];
          best_i[j] = (o * len + l) * inner + j;
        }
      }
    }
  }
  return make("max_over_set", std::move(out_shape), std::move(out), {a.node()},
              [arg = std::move(arg)](Node& self) {
                auto& g = grad_of(*self.inputs[0]);
                for (std::size_t i = 0; i < arg.size(); ++i) g[arg[i]] += self.grad[i];
              });
}

Tensor gather(const Tensor& a, const std::vector<std::size_t>& indices) {
  require(a.defined() && a.rank() >= 1, "gather: expected rank >= 1");
  const std::size_t n = a.dim(0);
  const std::size_t row = a.size() / std::max<std::size_t>(n, 1);
  Shape shape = a.shape();
  shape[0] = indices.size();
  std::vector<double> out(indices.size() * row);
  const auto x = a.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= n) throw ShapeError("gather: index out of range");
    std::copy_n(x.data() + indices[i] * row, row, out.data() + i * row);
  }
  return make("gather", std::move(shape), std::move(out), {a.node()},
              [indices, row](Node& self) {
                auto& g = grad_of(*self.inputs[0]);
                for (std::size_t i = 0; i < indices.size(); ++i) {
                  double* dst = g.data() + indices[i] * row;
                  const double* src = self.grad.data() + i * row;
                  for (std::size_t j = 0; j < row; ++j) dst[j] += src[j];
                }
              });
}

Tensor weighted_gather(const Tensor& a, const std::vector<std::size_t>& idx,
                       const std::vector<double>& w, std::size_t k) {
  require(a.defined() && a.rank() == 2, "weighted_gather: expected a[m, c]");
  require(k > 0 && idx.size() == w.size() && idx.size() % k == 0,
          "weighted_gather: idx and w must be [n, k]");
  const std::size_t m = a.dim(0), c = a.dim(1), n = idx.size() / k;
  std::vector<double> out(n * c, 0.0);
  const auto x = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t src = idx[i * k + j];
      if (src >= m) throw ShapeError("weighted_gather: index out of range");
      const double wt = w[i * k + j];
      for (std::size_t f = 0; f < c; ++f) out[i * c + f] += wt * x[src * c + f];
    }
  }
  return make("weighted_gather", {n, c}, std::move(out), {a.node()},
              [idx, w, k, n, c](Node& self) {
                auto& g = grad_of(*self.inputs[0]);
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t j = 0; j < k; ++j) {
                    const double wt = w[i * k + j];
                    double* dst = g.data() + idx[i * k + j] * c;
                    const double* src = self.grad.data() + i * c;
                    for (std::size_t f = 0; f < c; ++f) dst[f] += wt * src[f];
                  }
                }
              });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  require(!parts.empty(), "concat: no inputs");
  const Shape& s0 = parts[0].shape();
  require(axis < s0.size(), "concat: axis out of range");
  Shape out_shape = s0;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    require(p.rank() == s0.size(), "concat: rank mismatch");
    for (std::size_t i = 0; i < s0.size(); ++i) {
      require(i == axis || p.dim(i) == s0[i], "concat: shape mismatch " + shape_string(p.shape()) +
                                                   " vs " + shape_string(s0));
    }
    out_shape[axis] += p.dim(axis);
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s0[i];
  for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];
  const std::size_t out_row = out_shape[axis] * inner;

  std::vector<double> out(numel(out_shape));
  std::vector<std::size_t> widths;
  std::vector<NodePtr> nodes;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(axis) * inner;
    const auto x = p.data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(x.data() + o * w, w, out.data() + o * out_row + offset);
    }
    offset += w;
    widths.push_back(w);
    nodes.push_back(p.node());
  }
  return make("concat", std::move(out_shape), std::move(out), std::move(nodes),
              [widths, outer, out_row](Node& self) {
                std::size_t off = 0;
                for (std::size_t k = 0; k < widths.size(); ++k) {
                  Node& in = *self.inputs[k];
                  if (in.requires_grad) {
                    auto& g = grad_of(in);
                    for (std::size_t o = 0; o < outer; ++o) {
                      const double* src = self.grad.data() + o * out_row + off;
                      double* dst = g.data() + o * widths[k];
                      for (std::size_t j = 0; j < widths[k]; ++j) dst[j] += src[j];
                    }
                  }
                  off += widths[k];
                }
              });
}

Tensor pick(const Tensor& a, const std::vector<std::size_t>& cols) {
  require(a.defined() && a.rank() == 2 && cols.size() == a.dim(0),
          "pick: expected a[n, m] and n column indices");
  const std::size_t m = a.dim(1);
  std::vector<double> out(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] >= m) throw ShapeError("pick: column index out of range");
    out[i] = a[i * m + cols[i]];
  }
  return make("pick", {cols.size()}, std::move(out), {a.node()}, [cols, m](Node& self) {
    auto& g = grad_of(*self.inputs[0]);
    for (std::size_t i = 0; i < cols.size(); ++i) g[i * m + cols[i]] += self.grad[i];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  require(a.defined() && numel(shape) == a.size(),
          "reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
  std::vector<double> out(a.data().begin(), a.data().end());
  return make("reshape", std::move(shape), std::move(out), {a.node()}, [](Node& self) {
    auto& g = grad_of(*self.inputs[0]);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor detach(const Tensor& a) {
  require(a.defined(), "detach: undefined tensor");
  return Tensor::constant(a.shape(), std::vector<double>(a.data().begin(), a.data().end()));
}

Tensor batchnorm_free_norm(const Tensor& a, double eps) {
  require(a.defined() && a.rank() == 2 && a.dim(0) > 0, "batchnorm_free_norm: expected a[n, m]");
  const std::size_t n = a.dim(0), m = a.dim(1);
  std::vector<double> mu(m, 0.0), inv_std(m, 0.0), out(a.size());
  const auto x = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) mu[j] += x[i * m + j];
  }
  for (auto& v : mu) v /= static_cast<double>(n);
  for (std::size_t j = 0; j < m; ++j) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i * m + j] - mu[j];
      var += d * d;
    }
    inv_std[j] = 1.0 / std::sqrt(var / static_cast<double>(n) + eps);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = (x[i * m + j] - mu[j]) * inv_std[j];
  }
  return make("batchnorm_free_norm", a.shape(), std::move(out), {a.node()},
              [n, m, inv_std = std::move(inv_std)](Node& self) {
                auto& g = grad_of(*self.inputs[0]);
                const double inv_n = 1.0 / static_cast<double>(n);
                for (std::size_t j = 0; j < m; ++j) {
                  double mean_dy = 0.0, mean_dy_y = 0.0;
                  for (std::size_t i = 0; i < n; ++i) {
                    mean_dy += self.grad[i * m + j];
                    mean_dy_y += self.grad[i * m + j] * self.value[i * m + j];
                  }
                  mean_dy *= inv_n;
                  mean_dy_y *= inv_n;
                  for (std::size_t i = 0; i < n; ++i) {
                    g[i * m + j] += inv_std[j] * (self.grad[i * m + j] - mean_dy -
                                                  self.value[i * m + j] * mean_dy_y);
                  }
                }
              });
}

}  // namespace scatterhsd::ad
