#include "scatterhsd/optim.hpp"

#include <cmath>

#include "scatterhsd/error.hpp"
#include "scatterhsd/random.hpp"

namespace scatterhsd::ad {

Tensor ParameterSet::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw InvalidInput("duplicate parameter '" + name + "'");
  Tensor t = Tensor::parameter(std::move(shape), std::move(values));
  index_[name] = entries_.size();
  entries_.emplace_back(name, t);
  return t;
}

Tensor ParameterSet::add_weight(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  std::vector<double> w(in * out);
  for (auto& v : w) v = rng.uniform(-bound, bound);
  return add(name, {in, out}, std::move(w));
}

Tensor ParameterSet::add_bias(const std::string& name, std::size_t out) {
  return add(name, {out}, std::vector<double>(out, 0.0));
}

const Tensor& ParameterSet::get(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("no parameter named '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

void ParameterSet::assign(const ParameterSet& other) {
  if (other.size() != size()) throw InvalidInput("parameter sets differ in size");
  for (auto& [name, t] : entries_) {
    const Tensor& src = other.get(name);
    if (src.shape() != t.shape()) throw ShapeError("shape mismatch for parameter '" + name + "'");
    auto dst = t.mutable_data();
    std::copy(src.data().begin(), src.data().end(), dst.begin());
  }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: params/grads size mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + cfg.weight_decay * params[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void Adam::step(ParameterSet& params, double lr, const std::vector<std::string>& frozen_prefixes) {
  for (const auto& [name, t] : params.entries()) {
    bool frozen = false;
    for (const auto& p : frozen_prefixes) frozen = frozen || name.rfind(p, 0) == 0;
    if (frozen) continue;
    Tensor handle = t;
    auto grad = handle.mutable_grad();
    adam_step(handle.mutable_data(), grad, state_[name], lr, cfg_);
  }
}

}  // namespace scatterhsd::ad
