#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "scatterhsd/autodiff.hpp"
#include "scatterhsd/random.hpp"

namespace scatterhsd::testing {

struct OpCase {
  std::string name;
  std::vector<ad::Tensor> inputs;
  std::function<ad::Tensor()> loss;
};

inline ad::Tensor random_param(ad::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return ad::Tensor::parameter(std::move(shape), std::move(v));
}

inline ad::Tensor random_const(ad::Shape shape, Rng& rng) {
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return ad::Tensor::constant(std::move(shape), std::move(v));
}

/// sum(out * w) with fixed random w, so every output entry gets a distinct upstream gradient.
inline ad::Tensor project(const ad::Tensor& out, const ad::Tensor& w) { return ad::sum(ad::mul(out, w)); }

/// One case per differentiable op, each on random inputs.
inline std::vector<OpCase> op_cases(std::uint64_t seed) {
  using namespace ad;
  Rng rng(seed);
  std::vector<OpCase> cases;
  auto add_case = [&](std::string name, std::vector<Tensor> in, const Shape& out_shape,
                      std::function<Tensor(const std::vector<Tensor>&)> f) {
    const Tensor w = random_const(out_shape, rng);
    cases.push_back({std::move(name), in, [in, w, f] { return project(f(in), w); }});
  };
  const Tensor a = random_param({3, 4}, rng), b = random_param({3, 4}, rng);
  add_case("add", {a, b}, {3, 4}, [](auto& t) { return add(t[0], t[1]); });
  add_case("sub", {a, b}, {3, 4}, [](auto& t) { return sub(t[0], t[1]); });
  add_case("mul", {a, b}, {3, 4}, [](auto& t) { return mul(t[0], t[1]); });
  add_case("scale", {a}, {3, 4}, [](auto& t) { return scale(t[0], -2.5); });
  add_case("relu", {a}, {3, 4}, [](auto& t) { return relu(t[0]); });
  add_case("tanh", {a}, {3, 4}, [](auto& t) { return tanh(t[0]); });
  add_case("exp", {a}, {3, 4}, [](auto& t) { return exp(t[0]); });
  add_case("log", {random_param({5}, rng, 0.5, 2.0)}, {5}, [](auto& t) { return log(t[0]); });
  add_case("matmul", {random_param({2, 3}, rng), random_param({3, 4}, rng)}, {2, 4},
           [](auto& t) { return matmul(t[0], t[1]); });
  add_case("linear", {random_param({5, 3}, rng), random_param({3, 2}, rng), random_param({2}, rng)}, {5, 2},
           [](auto& t) { return linear(t[0], t[1], t[2]); });
  add_case("softmax_rank1", {random_param({4}, rng)}, {4}, [](auto& t) { return softmax(t[0]); });
  add_case("softmax", {a}, {3, 4}, [](auto& t) { return softmax(t[0]); });
  add_case("log_softmax", {a}, {3, 4}, [](auto& t) { return log_softmax(t[0]); });
  add_case("sum", {a}, {}, [](auto& t) { return sum(t[0]); });
  add_case("mean", {a}, {}, [](auto& t) { return mean(t[0]); });
  add_case("max_over_set0", {a}, {4}, [](auto& t) { return max_over_set(t[0], 0); });
  add_case("max_over_set1", {a}, {3}, [](auto& t) { return max_over_set(t[0], 1); });
  add_case("max_over_set_rank3", {random_param({2, 3, 4}, rng)}, {2, 4},
           [](auto& t) { return max_over_set(t[0], 1); });
  add_case("gather", {a}, {5, 4}, [](auto& t) { return gather(t[0], {2, 0, 2, 1, 0}); });
  add_case("weighted_gather", {a}, {2, 4}, [](auto& t) {
    return weighted_gather(t[0], {0, 1, 2, 2, 1, 1}, {0.2, 0.3, 0.5, 0.6, 0.1, 0.3}, 3);
  });
  add_case("concat0", {a, random_param({2, 4}, rng)}, {5, 4}, [](auto& t) { return concat({t[0], t[1]}, 0); });
  add_case("concat1", {a, random_param({3, 2}, rng)}, {3, 6}, [](auto& t) { return concat({t[0], t[1]}, 1); });
  add_case("pick", {a}, {3}, [](auto& t) { return pick(t[0], {3, 0, 1}); });
  add_case("reshape", {a}, {6, 2}, [](auto& t) { return reshape(t[0], {6, 2}); });
  add_case("batchnorm_free_norm", {random_param({6, 3}, rng)}, {6, 3},
           [](auto& t) { return batchnorm_free_norm(t[0]); });
  return cases;
}

}  // namespace scatterhsd::testing
