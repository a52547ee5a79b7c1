#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scatterhsd/autodiff.hpp"

namespace scatterhsd {
class Rng;
}

namespace scatterhsd::ad {

/// Named trainable leaves, kept in insertion order.
class ParameterSet {
 public:
  Tensor add(const std::string& name, Shape shape, std::vector<double> values);
  /// He-uniform weights for a fan-in of shape[0].
  Tensor add_weight(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  Tensor add_bias(const std::string& name, std::size_t out);

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;

  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }

  void zero_grad();

  /// Overwrite values from another set with identical names and shapes.
  void assign(const ParameterSet& other);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

/// One Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& cfg = {});

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// Steps every parameter whose name is not in `frozen`.
  void step(ParameterSet& params, double lr, const std::vector<std::string>& frozen_prefixes = {});

 private:
  AdamConfig cfg_;
  std::map<std::string, AdamState> state_;
};

}  // namespace scatterhsd::ad
