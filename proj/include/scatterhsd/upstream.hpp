#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scatterhsd/autodiff.hpp"
#include "scatterhsd/optim.hpp"
#include "scatterhsd/point_cloud.hpp"

namespace scatterhsd {
class Rng;
}

namespace scatterhsd::upstream {

struct UpstreamConfig {
  std::vector<std::size_t> encoder_widths{64, 128};
  std::size_t decoder_hidden = 128;
  std::size_t split_hidden = 64;
  std::size_t coarse_points = 512;
  std::vector<std::size_t> split_ratios{1, 1, 2};
  std::size_t target_points = 1024;
  /// Child offsets are tanh-bounded to this radius in normalized space.
  double offset_bound = 0.2;

  std::size_t code_size() const { return encoder_widths.back(); }
  /// Checks coarse_points * prod(split_ratios) == target_points among others.
  void validate() const;
};

inline constexpr std::size_t kMinInputPoints = 16;

/// Masked-autoencoder completion network: a shared pointwise MLP with max-pooling
/// encodes the scattered input; a fully-connected decoder emits coarse points that
/// a sequence of point-splitting stages refines to the target resolution.
class Upstream {
 public:
  /// Registers parameters under `prefix` in `params`.
  Upstream(UpstreamConfig cfg, ad::ParameterSet& params, Rng& rng, std::string prefix = "up.");

  const UpstreamConfig& config() const noexcept { return cfg_; }

  /// x[N', 3] -> code[E]; permutation invariant.
  ad::Tensor encode(const ad::Tensor& x) const;

  /// Coarse [coarse_points, 3] points before any splitting.
  ad::Tensor decode_coarse(const ad::Tensor& code) const;

  /// code[E] -> points[target_points, 3].
  ad::Tensor decode(const ad::Tensor& code) const;

  ad::Tensor forward(const ad::Tensor& x) const { return decode(encode(x)); }

 private:
  struct Dense {
    ad::Tensor w, b;
  };
  struct SplitStage {
    std::size_t ratio;
    Dense hidden, offset;
  };

  UpstreamConfig cfg_;
  std::vector<Dense> encoder_;
  Dense dec_hidden_, dec_out_;
  std::vector<SplitStage> stages_;
};

/// Differentiable bidirectional Chamfer loss against a constant target. The
/// nearest-neighbour matching is fixed at the current prediction, so the gradient
/// is a subgradient that flows through both directional terms.
ad::Tensor rec_loss(const ad::Tensor& pred, const ad::Tensor& gt);
ad::Tensor rec_loss(const ad::Tensor& pred, const PointCloud& gt);

ad::Tensor to_tensor(const PointCloud& cloud);
PointCloud to_cloud(const ad::Tensor& points);

}  // namespace scatterhsd::upstream
