#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scatterhsd/point_cloud.hpp"

namespace scatterhsd::scatter {

/// One sparsity setting: `seeds` FPS patch centres, `neighbors` points per patch,
/// drawn from a dense source of `source_size` points.
struct ScatterConfig {
  std::size_t seeds = 32;
  std::size_t neighbors = 16;
  std::size_t source_size = 10000;
  std::uint64_t rng_seed = 0;

  std::size_t output_size() const noexcept { return seeds * neighbors; }
  void validate() const;
};

/// Patch structure behind one scattered draw: indices into the dense source.
struct Patches {
  std::vector<std::size_t> centroids;
  std::vector<std::vector<std::size_t>> members;
};

Patches scatter_patches(const PointCloud& dense, const ScatterConfig& cfg);

/// FPS centroids plus their kNN patches, concatenated. Overlapping patches keep
/// their duplicates so the output always has seeds * neighbors points.
PointCloud scatter_sample(const PointCloud& dense, const ScatterConfig& cfg);

/// `views` independent draws; view v uses rng_seed + v.
std::vector<PointCloud> multi_view(const PointCloud& dense, const ScatterConfig& cfg,
                                   std::size_t views);

}  // namespace scatterhsd::scatter
