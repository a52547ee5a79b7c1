#include "scatterhsd/scatter.hpp"

#include <string>

#include "scatterhsd/error.hpp"
#include "scatterhsd/geometry.hpp"

namespace scatterhsd::scatter {

void ScatterConfig::validate() const {
  if (seeds == 0 || neighbors == 0) throw InvalidInput("scatter: seeds and neighbors must be >= 1");
  if (seeds * neighbors > source_size) {
    throw InvalidInput("scatter: seeds*neighbors = " + std::to_string(seeds * neighbors) +
                       " exceeds source size " + std::to_string(source_size));
  }
}

Patches scatter_patches(const PointCloud& dense, const ScatterConfig& cfg) {
  cfg.validate();
  if (dense.size() != cfg.source_size) {
    throw InvalidInput("scatter: dense cloud has " + std::to_string(dense.size()) +
                       " points, config expects " + std::to_string(cfg.source_size));
  }
  Patches out;
  out.centroids = geometry::fps_seeded(dense, cfg.seeds, cfg.rng_seed);
  out.members.reserve(cfg.seeds);
  for (std::size_t c : out.centroids) {
    out.members.push_back(geometry::knn(dense, c, cfg.neighbors).neighbor_indices);
  }
  return out;
}

PointCloud scatter_sample(const PointCloud& dense, const ScatterConfig& cfg) {
  const Patches patches = scatter_patches(dense, cfg);
  std::vector<std::size_t> flat;
  flat.reserve(cfg.output_size());
  for (const auto& m : patches.members) flat.insert(flat.end(), m.begin(), m.end());
  return dense.select(flat);
}

std::vector<PointCloud> multi_view(const PointCloud& dense, const ScatterConfig& cfg,
                                   std::size_t views) {
  if (views == 0) throw InvalidInput("multi_view: views must be >= 1");
  std::vector<PointCloud> out;
  out.reserve(views);
  for (std::size_t v = 0; v < views; ++v) {
    ScatterConfig view_cfg = cfg;
    view_cfg.rng_seed = cfg.rng_seed + v;
    out.push_back(scatter_sample(dense, view_cfg));
  }
  return out;
}

}  // namespace scatterhsd::scatter
