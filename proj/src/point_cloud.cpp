#include "scatterhsd/point_cloud.hpp"

#include <cmath>
#include <string>

#include "scatterhsd/error.hpp"

namespace scatterhsd {

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double c : points[i]) {
      if (!std::isfinite(c)) {
        throw InvalidInput("non-finite coordinate at point " + std::to_string(i));
      }
    }
  }
  if (labels && labels->size() != points.size()) {
    throw InvalidInput("label count " + std::to_string(labels->size()) +
                       " does not match point count " + std::to_string(points.size()));
  }
}

PointCloud PointCloud::select(const std::vector<std::size_t>& indices) const {
  PointCloud out;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(points.at(i));
  if (labels) {
    std::vector<int> sub;
    sub.reserve(indices.size());
    for (std::size_t i : indices) sub.push_back((*labels)[i]);
    out.labels = std::move(sub);
  }
  return out;
}

}  // namespace scatterhsd
