#include "scatterhsd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "scatterhsd/error.hpp"

namespace scatterhsd::geometry {
namespace {

static_assert(sizeof(Vec3) == 3 * sizeof(double), "Vec3 must be tightly packed");

const double* raw(const PointCloud& cloud) { return cloud.points.front().data(); }

double sq_dist(const double* a, const double* b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

std::vector<std::size_t> fps_raw(const double* xyz, std::size_t n, std::size_t m,
                                 std::size_t start) {
  if (m == 0 || m > n) {
    throw InvalidInput("fps: requested " + std::to_string(m) + " samples from " +
                       std::to_string(n) + " points");
  }
  if (start >= n) throw InvalidInput("fps: start index out of range");

  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  std::size_t current = start;
  for (std::size_t step = 0; step < m; ++step) {
    picked.push_back(current);
    const double* c = xyz + 3 * current;
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sq_dist(xyz + 3 * i, c);
      if (d < min_d[i]) min_d[i] = d;
      // Strict comparison keeps the lowest index on ties.
      if (min_d[i] > best_d) {
        best_d = min_d[i];
        best = i;
      }
    }
    current = best;
  }
  return picked;
}

std::vector<std::size_t> knn_raw(const double* xyz, std::size_t n, const double* query,
                                 std::size_t k) {
  if (k > n) {
    throw InvalidInput("knn: k=" + std::to_string(k) + " exceeds " + std::to_string(n) +
                       " points");
  }
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = {sq_dist(xyz + 3 * i, query), i};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

std::vector<std::size_t> nearest_raw(const double* a, std::size_t na, const double* b,
                                     std::size_t nb) {
  std::vector<std::size_t> out(na);
  for (std::size_t i = 0; i < na; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < nb; ++j) {
      const double d = sq_dist(a + 3 * i, b + 3 * j);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    out[i] = arg;
  }
  return out;
}

double directed_mean(const double* a, std::size_t na, const double* b, std::size_t nb) {
  double total = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j) best = std::min(best, sq_dist(a + 3 * i, b + 3 * j));
    total += best;
  }
  return total / static_cast<double>(na);
}

void require_non_empty(const PointCloud& c, const char* op) {
  if (c.empty()) throw InvalidInput(std::string(op) + ": empty point cloud");
}

}  // namespace

Vec3 centroid(const PointCloud& cloud) {
  require_non_empty(cloud, "centroid");
  Vec3 c{0.0, 0.0, 0.0};
  for (const auto& p : cloud.points) {
    c[0] += p[0];
    c[1] += p[1];
    c[2] += p[2];
  }
  const double inv = 1.0 / static_cast<double>(cloud.size());
  return {c[0] * inv, c[1] * inv, c[2] * inv};
}

PointCloud normalize(const PointCloud& cloud) {
  require_non_empty(cloud, "normalize");
  cloud.validate();
  const Vec3 c = centroid(cloud);
  PointCloud out = cloud;
  double max_sq = 0.0;
  for (auto& p : out.points) {
    p = {p[0] - c[0], p[1] - c[1], p[2] - c[2]};
    max_sq = std::max(max_sq, p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  }
  if (max_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(max_sq);
    for (auto& p : out.points) p = {p[0] * inv, p[1] * inv, p[2] * inv};
  }
  return out;
}

std::vector<std::size_t> fps(const PointCloud& cloud, std::size_t m, std::size_t start) {
  require_non_empty(cloud, "fps");
  return fps_raw(raw(cloud), cloud.size(), m, start);
}

std::vector<std::size_t> fps_seeded(const PointCloud& cloud, std::size_t m, std::uint64_t seed) {
  require_non_empty(cloud, "fps");
  std::mt19937_64 rng(seed);
  return fps_raw(raw(cloud), cloud.size(), m, static_cast<std::size_t>(rng() % cloud.size()));
}

NeighborIndex knn(const PointCloud& cloud, std::size_t center, std::size_t k) {
  require_non_empty(cloud, "knn");
  if (center >= cloud.size()) throw InvalidInput("knn: center index out of range");
  return {center, knn_raw(raw(cloud), cloud.size(), cloud.points[center].data(), k)};
}

std::vector<std::size_t> knn_query(const PointCloud& cloud, const Vec3& query, std::size_t k) {
  require_non_empty(cloud, "knn");
  return knn_raw(raw(cloud), cloud.size(), query.data(), k);
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_non_empty(a, "chamfer");
  require_non_empty(b, "chamfer");
  return directed_mean(raw(a), a.size(), raw(b), b.size()) +
         directed_mean(raw(b), b.size(), raw(a), a.size());
}

std::vector<std::size_t> nearest_map(const PointCloud& a, const PointCloud& b) {
  require_non_empty(a, "nearest_map");
  require_non_empty(b, "nearest_map");
  return nearest_raw(raw(a), a.size(), raw(b), b.size());
}

std::vector<std::size_t> fps_flat(const std::vector<double>& xyz, std::size_t m,
                                  std::size_t start) {
  if (xyz.empty()) throw InvalidInput("fps: empty point cloud");
  return fps_raw(xyz.data(), xyz.size() / 3, m, start);
}

std::vector<std::size_t> knn_flat(const std::vector<double>& xyz, const double* query,
                                  std::size_t k) {
  return knn_raw(xyz.data(), xyz.size() / 3, query, k);
}

std::vector<std::size_t> nearest_map_flat(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw InvalidInput("nearest_map: empty point cloud");
  return nearest_raw(a.data(), a.size() / 3, b.data(), b.size() / 3);
}

PointCloud from_flat(const std::vector<double>& xyz) {
  if (xyz.size() % 3 != 0) throw InvalidInput("flat xyz buffer length not a multiple of 3");
  PointCloud out;
  out.points.resize(xyz.size() / 3);
  std::copy(xyz.begin(), xyz.end(), out.points.empty() ? nullptr : out.points.front().data());
  return out;
}

std::vector<double> to_flat(const PointCloud& cloud) {
  std::vector<double> out;
  out.reserve(cloud.size() * 3);
  for (const auto& p : cloud.points) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace scatterhsd::geometry
