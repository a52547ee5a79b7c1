#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scatterhsd/point_cloud.hpp"

namespace scatterhsd::corpus {

/// Built-in shape families. Mug and hammer are two-part composites with part labels.
enum class ShapeClass : int {
  sphere = 0,
  box,
  cylinder,
  torus,
  cone,
  capsule,
  mug,
  hammer,
};

inline constexpr int kNumClasses = 8;
inline constexpr std::size_t kDenseSourceSize = 10000;

std::string_view class_name(int class_id);
bool is_composite(int class_id);

/// Class id plus its shape parameters. Parameter meaning per class:
///   sphere   {}                         box      {ex, ey, ez}
///   cylinder {radius, height}           torus    {major, minor}
///   cone     {radius, height}           capsule  {radius, length}
///   mug      {body_r, body_h, handle_major, handle_minor}
///   hammer   {head_len, head_side, handle_len, handle_r}
struct ShapeSpec {
  int class_id = 0;
  std::vector<double> params;
  std::uint64_t rng_seed = 0;

  bool operator==(const ShapeSpec&) const = default;
};

struct DatasetSplit {
  std::vector<ShapeSpec> train;
  std::vector<ShapeSpec> test;
};

/// Parameters drawn from the per-class ranges using `rng_seed`.
ShapeSpec random_spec(int class_id, std::uint64_t rng_seed);

/// n points sampled uniformly by surface area, then normalized.
PointCloud gen_shape(const ShapeSpec& spec, std::size_t n);

/// Deterministic 80/20 split over the first `classes` built-in classes.
DatasetSplit gen_split(int classes, std::size_t per_class, std::uint64_t seed);

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
};

/// Area-weighted uniform sampling over triangles.
PointCloud sample_mesh(const Mesh& mesh, std::size_t n, std::uint64_t seed);

enum class CloudFormat { xyz, ply_ascii, off };

CloudFormat format_from_path(const std::filesystem::path& path);

/// xyz and ply are read verbatim; off meshes are sampled to 10,000 points.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
Mesh load_off(const std::filesystem::path& path);

void save_xyz(const std::filesystem::path& path, const PointCloud& cloud);
/// ASCII PLY with vertex x/y/z and, when present, an int `label` property.
void save_ply(const std::filesystem::path& path, const PointCloud& cloud);

struct ManifestRow {
  ShapeSpec spec;
  std::string split;
  std::filesystem::path path;
};

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

}  // namespace scatterhsd::corpus
