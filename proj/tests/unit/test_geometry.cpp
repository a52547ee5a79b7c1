#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "scatterhsd/error.hpp"
#include "scatterhsd/geometry.hpp"
#include "scatterhsd/random.hpp"
#include "scatterhsd/scatter.hpp"
#include "scatterhsd/corpus.hpp"

using namespace scatterhsd;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  return c;
}

}  // namespace

TEST_CASE("normalize centres and scales to the unit ball") {
  PointCloud c{{{2, 0, 0}, {4, 0, 0}}, std::nullopt};
  const auto n = geometry::normalize(c);
  CHECK(n.points[0] == Vec3{-1, 0, 0});
  CHECK(n.points[1] == Vec3{1, 0, 0});

  const auto again = geometry::normalize(n);
  for (std::size_t i = 0; i < n.size(); ++i) {
    for (int d = 0; d < 3; ++d) CHECK(std::abs(again.points[i][d] - n.points[i][d]) < 1e-6);
  }

  // centroid (0, 2/3, 2/3); farthest points (0,0,2) and (0,2,0) at distance sqrt(20)/3
  PointCloud t{{{0, 0, 0}, {0, 0, 2}, {0, 2, 0}}, std::nullopt};
  const auto tn = geometry::normalize(t);
  const double s = 3.0 / std::sqrt(20.0);
  CHECK(tn.points[0][1] == doctest::Approx(-2.0 / 3.0 * s).epsilon(1e-12));
  CHECK(tn.points[1][2] == doctest::Approx(4.0 / 3.0 * s).epsilon(1e-12));
  CHECK(tn.points[2][1] == doctest::Approx(4.0 / 3.0 * s).epsilon(1e-12));

  CHECK_THROWS_AS(geometry::normalize(PointCloud{}), InvalidInput);
}

TEST_CASE("fps on a line picks the ends then the lowest tied middle") {
  PointCloud line;
  for (int i = 0; i < 10; ++i) line.points.push_back({static_cast<double>(i), 0, 0});
  CHECK(geometry::fps(line, 3, 0) == std::vector<std::size_t>{0, 9, 4});
  CHECK(geometry::fps(line, 1, 7) == std::vector<std::size_t>{7});
  auto all = geometry::fps(line, 10, 0);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
  CHECK_THROWS_AS(geometry::fps(line, 11, 0), InvalidInput);
  CHECK(geometry::fps_seeded(line, 4, 5) == geometry::fps_seeded(line, 4, 5));
}

TEST_CASE("knn returns self first and breaks ties by index") {
  PointCloud sq{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, std::nullopt};
  CHECK(geometry::knn(sq, 0, 1).neighbor_indices == std::vector<std::size_t>{0});
  CHECK(geometry::knn(sq, 0, 3).neighbor_indices == std::vector<std::size_t>{0, 1, 2});
  PointCloud pair{{{0, 0, 0}, {-1, 0, 0}, {1, 0, 0}}, std::nullopt};
  CHECK(geometry::knn(pair, 0, 2).neighbor_indices == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(geometry::knn(sq, 0, 5), InvalidInput);
}

TEST_CASE("chamfer and nearest_map") {
  PointCloud a{{{0, 0, 0}}, std::nullopt}, b{{{1, 0, 0}}, std::nullopt};
  CHECK(geometry::chamfer(a, b) == 2.0);
  const auto r = random_cloud(32, 3);
  CHECK(geometry::chamfer(r, r) == 0.0);
  CHECK_THROWS_AS(geometry::chamfer(a, PointCloud{}), InvalidInput);

  const auto q = random_cloud(32, 4);
  double ab = 0, ba = 0;
  for (const auto& p : r.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : q.points) best = std::min(best, squared_distance(p, o));
    ab += best;
  }
  for (const auto& p : q.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : r.points) best = std::min(best, squared_distance(p, o));
    ba += best;
  }
  CHECK(geometry::chamfer(r, q) == ab / 32.0 + ba / 32.0);

  const auto id = geometry::nearest_map(r, r);
  for (std::size_t i = 0; i < id.size(); ++i) CHECK(id[i] == i);
  CHECK(geometry::nearest_map(r, a) == std::vector<std::size_t>(32, 0));
}

TEST_CASE("scatter sampling") {
  const auto dense = corpus::gen_shape(corpus::random_spec(0, 1), corpus::kDenseSourceSize);

  scatter::ScatterConfig cfg{32, 16, 10000, 7};
  const auto s = scatter::scatter_sample(dense, cfg);
  CHECK(s.size() == 512);
  const auto patches = scatter::scatter_patches(dense, cfg);
  REQUIRE(patches.centroids.size() == 32);
  for (std::size_t p = 0; p < 32; ++p) {
    const auto& members = patches.members[p];
    CHECK(members.size() == 16);
    const auto expect = geometry::knn(dense, patches.centroids[p], 16).neighbor_indices;
    CHECK(members == expect);
  }
  CHECK(scatter::scatter_sample(dense, cfg) == s);

  PointCloud small = dense.select({0, 1, 2, 3, 4});
  scatter::ScatterConfig whole{1, 5, 5, 0};
  auto got = scatter::scatter_sample(small, whole).points;
  auto want = small.points;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  CHECK(got == want);

  CHECK_THROWS_AS((scatter::ScatterConfig{64, 200, 10000, 0}.validate()), InvalidInput);

  const auto views = scatter::multi_view(dense, cfg, 8);
  CHECK(views.size() == 8);
  CHECK(views == scatter::multi_view(dense, cfg, 8));
  CHECK(scatter::multi_view(dense, cfg, 1).front() == scatter::scatter_sample(dense, cfg));
}

TEST_CASE("sparser scatter has smaller patches") {
  const auto dense = corpus::gen_shape(corpus::random_spec(0, 2), corpus::kDenseSourceSize);
  auto mean_radius = [&](std::size_t s, std::size_t k) {
    double total = 0;
    std::size_t count = 0;
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
      const auto p = scatter::scatter_patches(dense, {s, k, 10000, draw});
      for (std::size_t i = 0; i < p.centroids.size(); ++i) {
        total += std::sqrt(squared_distance(dense.points[p.centroids[i]], dense.points[p.members[i].back()]));
        ++count;
      }
    }
    return total / static_cast<double>(count);
  };
  CHECK(mean_radius(64, 8) < mean_radius(32, 16));
}
