#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace scatterhsd {

using Vec3 = std::array<double, 3>;

/// Ordered 3D point set with optional per-point part labels.
struct PointCloud {
  std::vector<Vec3> points;
  std::optional<std::vector<int>> labels;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool has_labels() const noexcept { return labels.has_value(); }

  /// Throws InvalidInput if a coordinate is non-finite or labels are misaligned.
  void validate() const;

  /// Sub-cloud made of the given indices (labels follow).
  PointCloud select(const std::vector<std::size_t>& indices) const;

  bool operator==(const PointCloud&) const = default;
};

inline double squared_distance(const Vec3& a, const Vec3& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace scatterhsd
