#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scatterhsd/point_cloud.hpp"

namespace scatterhsd::geometry {

/// k nearest neighbours of one centre, ordered by (squared distance, index).
struct NeighborIndex {
  std::size_t center_index = 0;
  std::vector<std::size_t> neighbor_indices;
};

/// Shift the centroid to the origin and scale so the farthest point has norm 1.
/// A cloud whose points all coincide is only centred.
PointCloud normalize(const PointCloud& cloud);

Vec3 centroid(const PointCloud& cloud);

/// Greedy farthest point sampling. Ties go to the lowest index.
std::vector<std::size_t> fps(const PointCloud& cloud, std::size_t m, std::size_t start = 0);

/// fps with a start index drawn from `seed`.
std::vector<std::size_t> fps_seeded(const PointCloud& cloud, std::size_t m, std::uint64_t seed);

NeighborIndex knn(const PointCloud& cloud, std::size_t center, std::size_t k);

/// knn around an arbitrary query location (the query is not part of `cloud`).
std::vector<std::size_t> knn_query(const PointCloud& cloud, const Vec3& query, std::size_t k);

/// Bidirectional mean of squared nearest-neighbour distances. Raw value, not x1000.
double chamfer(const PointCloud& a, const PointCloud& b);

/// For each point of `a`, the index of its nearest point in `b` (lowest index on ties).
std::vector<std::size_t> nearest_map(const PointCloud& a, const PointCloud& b);

/// Same kernels on flat row-major xyz buffers, used by the network code.
std::vector<std::size_t> fps_flat(const std::vector<double>& xyz, std::size_t m,
                                  std::size_t start = 0);
std::vector<std::size_t> knn_flat(const std::vector<double>& xyz, const double* query,
                                  std::size_t k);
std::vector<std::size_t> nearest_map_flat(const std::vector<double>& a,
                                          const std::vector<double>& b);

PointCloud from_flat(const std::vector<double>& xyz);
std::vector<double> to_flat(const PointCloud& cloud);

}  // namespace scatterhsd::geometry
