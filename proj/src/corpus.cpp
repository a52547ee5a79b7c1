#include "scatterhsd/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "scatterhsd/error.hpp"
#include "scatterhsd/geometry.hpp"
#include "scatterhsd/random.hpp"

namespace scatterhsd::corpus {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kOffSamplingSeed = 0x5ca77e12ULL;

struct SurfacePatch {
  double area;
  int label;
  std::function<Vec3(Rng&)> sample;
};

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

// Open tube of radius r along z from z0 to z1.
SurfacePatch tube(double r, double z0, double z1, int label) {
  return {2.0 * kPi * r * (z1 - z0), label, [=](Rng& rng) {
            const double t = 2.0 * kPi * rng.uniform();
            return Vec3{r * std::cos(t), r * std::sin(t), rng.uniform(z0, z1)};
          }};
}

SurfacePatch disc(double r, double z, int label) {
  return {kPi * r * r, label, [=](Rng& rng) {
            const double rad = r * std::sqrt(rng.uniform());
            const double t = 2.0 * kPi * rng.uniform();
            return Vec3{rad * std::cos(t), rad * std::sin(t), z};
          }};
}

// Hemisphere of radius r centred at (0,0,zc), opening towards -dir (dir = +1 or -1).
SurfacePatch hemisphere(double r, double zc, double dir, int label) {
  return {2.0 * kPi * r * r, label, [=](Rng& rng) {
            // Archimedes: z uniform on [0, r] gives uniform area on a spherical zone.
            const double h = r * rng.uniform();
            const double rho = std::sqrt(std::max(0.0, r * r - h * h));
            const double t = 2.0 * kPi * rng.uniform();
            return Vec3{rho * std::cos(t), rho * std::sin(t), zc + dir * h};
          }};
}

// Axis-aligned rectangle face: fixed coordinate `axis` at `value`, the other two
// spanning [lo, hi].
SurfacePatch face(int axis, double value, Vec3 lo, Vec3 hi, int label) {
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;
  return {(hi[u] - lo[u]) * (hi[v] - lo[v]), label, [=](Rng& rng) {
            Vec3 p{};
            p[axis] = value;
            p[u] = rng.uniform(lo[u], hi[u]);
            p[v] = rng.uniform(lo[v], hi[v]);
            return p;
          }};
}

std::vector<SurfacePatch> box_faces(Vec3 lo, Vec3 hi, int label) {
  std::vector<SurfacePatch> out;
  for (int axis = 0; axis < 3; ++axis) {
    out.push_back(face(axis, lo[axis], lo, hi, label));
    out.push_back(face(axis, hi[axis], lo, hi, label));
  }
  return out;
}

// Torus (or a sector of it) in the plane spanned by `a` and `b`; `theta_span` is
// the swept major angle centred on direction `a`.
SurfacePatch torus(double major, double minor, Vec3 center, int plane_axis, double theta_span,
                   int label) {
  return {theta_span * 2.0 * kPi * major * minor, label, [=](Rng& rng) {
            double theta = 0.0;
            double phi = 0.0;
            // Rejection on the Jacobian (major + minor cos phi) for area-uniform draws.
            for (;;) {
              theta = (rng.uniform() - 0.5) * theta_span;
              phi = 2.0 * kPi * rng.uniform();
              if (rng.uniform() * (major + minor) <= major + minor * std::cos(phi)) break;
            }
            const double ring = major + minor * std::cos(phi);
            const double w = minor * std::sin(phi);
            Vec3 p{};
            if (plane_axis == 2) {  // ring in the xy-plane
              p = {ring * std::cos(theta), ring * std::sin(theta), w};
            } else {  // ring in the xz-plane
              p = {ring * std::cos(theta), w, ring * std::sin(theta)};
            }
            return add(p, center);
          }};
}

SurfacePatch cone_lateral(double r, double h, int label) {
  const double slant = std::sqrt(r * r + h * h);
  return {kPi * r * slant, label, [=](Rng& rng) {
            // Distance from the apex grows as sqrt(u) for uniform area.
            const double s = std::sqrt(rng.uniform());
            const double t = 2.0 * kPi * rng.uniform();
            return Vec3{s * r * std::cos(t), s * r * std::sin(t), h * (1.0 - s)};
          }};
}

std::vector<SurfacePatch> build_surface(const ShapeSpec& spec) {
  const auto& p = spec.params;
  auto need = [&](std::size_t count) {
    if (p.size() != count) {
      throw InvalidInput(std::string(class_name(spec.class_id)) + " expects " +
                         std::to_string(count) + " parameters, got " + std::to_string(p.size()));
    }
    for (double v : p) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("shape parameters must be positive");
    }
  };
  switch (static_cast<ShapeClass>(spec.class_id)) {
    case ShapeClass::sphere:
      need(0);
      return {};  // handled separately (antipodal sampling)
    case ShapeClass::box:
      need(3);
      return box_faces({-p[0] / 2, -p[1] / 2, -p[2] / 2}, {p[0] / 2, p[1] / 2, p[2] / 2}, 0);
    case ShapeClass::cylinder:
      need(2);
      return {tube(p[0], 0.0, p[1], 0), disc(p[0], 0.0, 0), disc(p[0], p[1], 0)};
    case ShapeClass::torus:
      need(2);
      if (p[1] >= p[0]) throw InvalidInput("torus minor radius must be below major radius");
      return {torus(p[0], p[1], {0, 0, 0}, 2, 2.0 * kPi, 0)};
    case ShapeClass::cone:
      need(2);
      return {cone_lateral(p[0], p[1], 0), disc(p[0], 0.0, 0)};
    case ShapeClass::capsule:
      need(2);
      return {tube(p[0], 0.0, p[1], 0), hemisphere(p[0], 0.0, -1.0, 0),
              hemisphere(p[0], p[1], 1.0, 0)};
    case ShapeClass::mug: {
      need(4);
      const double body_r = p[0];
      const double body_h = p[1];
      const double handle_major = p[2];
      const double handle_minor = p[3];
      return {tube(body_r, 0.0, body_h, 0), disc(body_r, 0.0, 0),
              torus(handle_major, handle_minor, {body_r, 0.0, body_h / 2}, 1, kPi, 1)};
    }
    case ShapeClass::hammer: {
      need(4);
      const double head_len = p[0];
      const double side = p[1];
      const double handle_len = p[2];
      const double handle_r = p[3];
      auto patches = box_faces({-head_len / 2, -side / 2, handle_len},
                               {head_len / 2, side / 2, handle_len + side}, 0);
      patches.push_back(tube(handle_r, 0.0, handle_len, 1));
      patches.push_back(disc(handle_r, 0.0, 1));
      return patches;
    }
  }
  throw InvalidInput("unknown shape class " + std::to_string(spec.class_id));
}

PointCloud sample_sphere(std::size_t n, Rng& rng) {
  // Antipodal pairs put the sample centroid exactly at the sphere centre.
  PointCloud out;
  out.points.reserve(n);
  while (out.points.size() + 1 < n) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double t = 2.0 * kPi * rng.uniform();
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 q{rho * std::cos(t), rho * std::sin(t), z};
    out.points.push_back(q);
    out.points.push_back({-q[0], -q[1], -q[2]});
  }
  if (out.points.size() < n) out.points.push_back({0.0, 0.0, 1.0});
  return out;
}

std::size_t pick_patch(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

double parse_double(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
  if (used != tok.size() || !std::isfinite(v)) {
    throw ParseError("expected a finite number, got '" + tok + "'", line);
  }
  return v;
}

long parse_int(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
  if (used != tok.size()) throw ParseError("expected an integer, got '" + tok + "'", line);
  return v;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

// Reads the next non-blank, non-comment line. Returns false at EOF.
bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

PointCloud load_xyz(const std::filesystem::path& path) {
  auto in = open_in(path);
  PointCloud out;
  std::string line;
  std::size_t lineno = 0;
  while (next_content_line(in, line, lineno)) {
    const auto t = tokens(line);
    if (t.size() < 3) throw ParseError("xyz line needs 3 coordinates", lineno);
    out.points.push_back(
        {parse_double(t[0], lineno), parse_double(t[1], lineno), parse_double(t[2], lineno)});
  }
  if (out.empty()) throw ParseError("xyz file contains no points", lineno);
  return out;
}

PointCloud load_ply(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || (++lineno, tokens(line) != std::vector<std::string>{"ply"})) {
    throw ParseError("missing 'ply' magic", 1);
  }
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool seen_format = false;
  std::vector<std::string> props;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError("unterminated PLY header", lineno);
    ++lineno;
    const auto t = tokens(line);
    if (t.empty() || t[0] == "comment" || t[0] == "obj_info") continue;
    if (t[0] == "end_header") break;
    if (t[0] == "format") {
      if (t.size() < 2 || t[1] != "ascii") throw ParseError("only ascii PLY is supported", lineno);
      seen_format = true;
    } else if (t[0] == "element") {
      if (t.size() != 3) throw ParseError("malformed element line", lineno);
      in_vertex = t[1] == "vertex";
      if (in_vertex) vertex_count = static_cast<std::size_t>(parse_int(t[2], lineno));
    } else if (t[0] == "property") {
      if (t.size() < 3) throw ParseError("malformed property line", lineno);
      if (in_vertex) props.push_back(t.back());
    } else {
      throw ParseError("unknown PLY header keyword '" + t[0] + "'", lineno);
    }
  }
  if (!seen_format) throw ParseError("PLY header lacks a format line", lineno);
  auto index_of = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1 : it - props.begin();
  };
  const auto ix = index_of("x");
  const auto iy = index_of("y");
  const auto iz = index_of("z");
  const auto il = index_of("label");
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError("PLY vertex lacks x/y/z", lineno);

  PointCloud out;
  std::vector<int> labels;
  out.points.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("truncated PLY: expected " + std::to_string(vertex_count) + " vertices, got " +
                           std::to_string(i),
                       lineno + 1);
    }
    ++lineno;
    const auto t = tokens(line);
    if (t.size() < props.size()) throw ParseError("PLY vertex row too short", lineno);
    out.points.push_back({parse_double(t[static_cast<std::size_t>(ix)], lineno),
                          parse_double(t[static_cast<std::size_t>(iy)], lineno),
                          parse_double(t[static_cast<std::size_t>(iz)], lineno)});
    if (il >= 0) labels.push_back(static_cast<int>(parse_int(t[static_cast<std::size_t>(il)], lineno)));
  }
  if (il >= 0) out.labels = std::move(labels);
  if (out.empty()) throw ParseError("PLY file contains no vertices", lineno);
  return out;
}

}  // namespace

std::string_view class_name(int class_id) {
  static constexpr std::string_view names[kNumClasses] = {
      "sphere", "box", "cylinder", "torus", "cone", "capsule", "mug", "hammer"};
  if (class_id < 0 || class_id >= kNumClasses) {
    throw InvalidInput("unknown shape class " + std::to_string(class_id));
  }
  return names[class_id];
}

bool is_composite(int class_id) {
  return class_id == static_cast<int>(ShapeClass::mug) ||
         class_id == static_cast<int>(ShapeClass::hammer);
}

ShapeSpec random_spec(int class_id, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  ShapeSpec spec{class_id, {}, rng_seed};
  switch (static_cast<ShapeClass>(class_id)) {
    case ShapeClass::sphere:
      break;
    case ShapeClass::box:
      spec.params = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
      break;
    case ShapeClass::cylinder:
      spec.params = {rng.uniform(0.3, 0.7), rng.uniform(0.8, 2.0)};
      break;
    case ShapeClass::torus:
      spec.params = {rng.uniform(0.6, 1.0), rng.uniform(0.15, 0.35)};
      break;
    case ShapeClass::cone:
      spec.params = {rng.uniform(0.4, 0.8), rng.uniform(0.8, 1.8)};
      break;
    case ShapeClass::capsule:
      spec.params = {rng.uniform(0.3, 0.6), rng.uniform(0.6, 1.6)};
      break;
    case ShapeClass::mug:
      spec.params = {rng.uniform(0.4, 0.6), rng.uniform(0.8, 1.4), rng.uniform(0.2, 0.35),
                     rng.uniform(0.05, 0.1)};
      break;
    case ShapeClass::hammer:
      spec.params = {rng.uniform(0.8, 1.4), rng.uniform(0.2, 0.35), rng.uniform(1.2, 2.0),
                     rng.uniform(0.05, 0.1)};
      break;
    default:
      throw InvalidInput("unknown shape class " + std::to_string(class_id));
  }
  return spec;
}

PointCloud gen_shape(const ShapeSpec& spec, std::size_t n) {
  if (n < 8) throw InvalidInput("gen_shape: need at least 8 points");
  class_name(spec.class_id);  // validates the id
  Rng rng(mix_seed(spec.rng_seed, 0x5a4e));
  if (spec.class_id == static_cast<int>(ShapeClass::sphere)) {
    if (!spec.params.empty()) throw InvalidInput("sphere takes no parameters");
    return geometry::normalize(sample_sphere(n, rng));
  }
  const auto patches = build_surface(spec);
  std::vector<double> cumulative;
  double running = 0.0;
  for (const auto& p : patches) cumulative.push_back(running += p.area);

  PointCloud out;
  out.points.reserve(n);
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& patch = patches[pick_patch(cumulative, rng.uniform())];
    out.points.push_back(patch.sample(rng));
    labels.push_back(patch.label);
  }
  if (is_composite(spec.class_id)) out.labels = std::move(labels);
  return geometry::normalize(out);
}

DatasetSplit gen_split(int classes, std::size_t per_class, std::uint64_t seed) {
  if (classes < 1 || classes > kNumClasses) {
    throw InvalidInput("classes must be in [1, " + std::to_string(kNumClasses) + "]");
  }
  const std::size_t train_count = (per_class * 4 + 2) / 5;
  DatasetSplit split;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::uint64_t s = mix_seed(mix_seed(seed, static_cast<std::uint64_t>(c)), i);
      auto spec = random_spec(c, s);
      (i < train_count ? split.train : split.test).push_back(std::move(spec));
    }
  }
  return split;
}

PointCloud sample_mesh(const Mesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.triangles.empty()) throw InvalidInput("mesh has no triangles");
  std::vector<double> cumulative;
  double running = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices.at(tri[0]);
    const Vec3& b = mesh.vertices.at(tri[1]);
    const Vec3& c = mesh.vertices.at(tri[2]);
    const Vec3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const Vec3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const Vec3 cr{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    running += 0.5 * std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
    cumulative.push_back(running);
  }
  if (!(running > 0.0)) throw InvalidInput("mesh has zero surface area");
  Rng rng(seed);
  PointCloud out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tri = mesh.triangles[pick_patch(cumulative, rng.uniform())];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double wa = 1.0 - r1;
    const double wb = r1 * (1.0 - r2);
    const double wc = r1 * r2;
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    out.points.push_back({wa * a[0] + wb * b[0] + wc * c[0], wa * a[1] + wb * b[1] + wc * c[1],
                          wa * a[2] + wb * b[2] + wc * c[2]});
  }
  return out;
}

CloudFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::xyz;
  if (ext == ".ply") return CloudFormat::ply_ascii;
  if (ext == ".off") return CloudFormat::off;
  throw InvalidInput("unrecognised point cloud extension '" + ext + "'");
}

Mesh load_off(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!next_content_line(in, line, lineno)) throw ParseError("empty OFF file", 1);
  auto t = tokens(line);
  // Some writers put the counts on the magic line ("OFF8 6 0").
  if (t.empty() || t[0].rfind("OFF", 0) != 0) throw ParseError("missing OFF magic", lineno);
  std::vector<std::string> counts;
  if (t[0].size() > 3) counts.push_back(t[0].substr(3));
  counts.insert(counts.end(), t.begin() + 1, t.end());
  if (counts.empty()) {
    if (!next_content_line(in, line, lineno)) throw ParseError("missing OFF counts", lineno + 1);
    counts = tokens(line);
  }
  if (counts.size() < 2) throw ParseError("OFF counts line needs vertex and face counts", lineno);
  const auto nv = parse_int(counts[0], lineno);
  const auto nf = parse_int(counts[1], lineno);
  if (nv <= 0 || nf < 0) throw ParseError("invalid OFF counts", lineno);

  Mesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line, lineno)) throw ParseError("truncated OFF vertex list", lineno + 1);
    t = tokens(line);
    if (t.size() < 3) throw ParseError("OFF vertex needs 3 coordinates", lineno);
    mesh.vertices.push_back(
        {parse_double(t[0], lineno), parse_double(t[1], lineno), parse_double(t[2], lineno)});
  }
  for (long f = 0; f < nf; ++f) {
    if (!next_content_line(in, line, lineno)) throw ParseError("truncated OFF face list", lineno + 1);
    t = tokens(line);
    if (t.empty()) throw ParseError("empty OFF face", lineno);
    const auto arity = parse_int(t[0], lineno);
    if (arity < 3 || t.size() < static_cast<std::size_t>(arity) + 1) {
      throw ParseError("malformed OFF face", lineno);
    }
    std::vector<std::size_t> idx;
    for (long k = 1; k <= arity; ++k) {
      const auto v = parse_int(t[static_cast<std::size_t>(k)], lineno);
      if (v < 0 || v >= nv) throw ParseError("OFF face index out of range", lineno);
      idx.push_back(static_cast<std::size_t>(v));
    }
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
  }
  return mesh;
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  PointCloud cloud;
  switch (format) {
    case CloudFormat::xyz:
      cloud = load_xyz(path);
      break;
    case CloudFormat::ply_ascii:
      cloud = load_ply(path);
      break;
    case CloudFormat::off:
      cloud = sample_mesh(load_off(path), kDenseSourceSize, kOffSamplingSeed);
      break;
  }
  cloud.validate();
  return cloud;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

void save_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path);
  for (const auto& p : cloud.points) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n";
  if (cloud.labels) out << "property int label\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out << p[0] << ' ' << p[1] << ' ' << p[2];
    if (cloud.labels) out << ' ' << (*cloud.labels)[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  auto out = open_out(path);
  out << "class_id,class_name,rng_seed,split,params,path\n";
  for (const auto& r : rows) {
    out << r.spec.class_id << ',' << class_name(r.spec.class_id) << ',' << r.spec.rng_seed << ','
        << r.split << ',';
    for (std::size_t i = 0; i < r.spec.params.size(); ++i) {
      if (i) out << ';';
      out << r.spec.params[i];
    }
    out << ',' << r.path.generic_string() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty manifest", 1);
  ++lineno;
  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 6) throw ParseError("manifest row needs 6 columns", lineno);
    ManifestRow row;
    row.spec.class_id = static_cast<int>(parse_int(cols[0], lineno));
    row.spec.rng_seed = std::stoull(cols[2]);
    row.split = cols[3];
    std::stringstream ps(cols[4]);
    for (std::string v; std::getline(ps, v, ';');) row.spec.params.push_back(parse_double(v, lineno));
    row.path = cols[5];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace scatterhsd::corpus
