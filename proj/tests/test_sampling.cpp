#include <doctest.h>

#include <cmath>

#include "egs/error.hpp"
#include "egs/rng.hpp"
#include "egs/sampling.hpp"
#include "egs/scene.hpp"

#include "oracles.hpp"

using namespace egs;

namespace {

Frame frame_from_centers(const std::vector<Vec3>& centers) {
  Frame f;
  for (const Vec3& c : centers) f.primitives.push_back({c, 0.5, {0.01, 0.01, 0.01}});
  return f;
}

std::vector<Vec3> random_points(Rng& rng, std::size_t n) {
  std::vector<Vec3> pts(n);
  for (auto& p : pts) {
    p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  }
  return pts;
}

}  // namespace

TEST_CASE("filter_bbox keeps closed-box membership in original order") {
  const Bbox box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};

  SUBCASE("all inside is the identity") {
    const Frame f = frame_from_centers({{0.1, 0.1, 0.1}, {0.9, 0.9, 0.9}});
    CHECK(filter_bbox(f, box) == std::vector<std::uint32_t>{0, 1});
  }
  SUBCASE("all outside is empty") {
    const Frame f = frame_from_centers({{2.0, 0.0, 0.0}, {0.0, -1.0, 0.0}});
    CHECK(filter_bbox(f, box).empty());
  }
  SUBCASE("a point exactly on a face is included") {
    const Frame f = frame_from_centers({{1.0, 0.5, 0.5}, {0.5, 0.0, 0.5}});
    CHECK(filter_bbox(f, box) == std::vector<std::uint32_t>{0, 1});
  }
}

TEST_CASE("voxel_cap basics") {
  SUBCASE("under the cap passes through") {
    Rng rng(11);
    const auto pts = random_points(rng, 10);
    const auto out = voxel_cap(pts, 16, 0.1);
    REQUIRE(out.size() == 10);
    for (std::uint32_t i = 0; i < 10; ++i) CHECK(out[i] == i);
  }
  SUBCASE("coincident points collapse to the lowest index") {
    const std::vector<Vec3> pts(4, Vec3{0.5, 0.5, 0.5});
    const auto out = voxel_cap(pts, 1, 0.1);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 0);
  }
  SUBCASE("grid with cap 25 picks one representative per coarse cell") {
    // 10x10 grid in the z=0 plane, pitch 1. Doubling once gives 2x2 cells.
    std::vector<Vec3> pts;
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 10; ++x) pts.push_back({double(x), double(y), 0.0});
    }
    const auto out = voxel_cap(pts, 25, 1.0);
    CHECK(out.size() == 25);
    CHECK(out == oracles::brute_voxel_cap(pts, 25, 1.0));
    // All four members of a 2x2 cell tie on centroid distance; the lowest
    // index must win, and index 0 is such a member.
    CHECK(out[0] == 0);
  }
}

TEST_CASE("voxel_cap matches the brute-force oracle on random clouds") {
  Rng rng(2026);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 20 + rng.next_below(200);
    const std::size_t cap = 1 + rng.next_below(n);
    const auto pts = random_points(rng, n);
    CHECK(voxel_cap(pts, cap, 0.25) == oracles::brute_voxel_cap(pts, cap, 0.25));
  }
}

TEST_CASE("voxel_cap never grows, is idempotent, permutation-stable") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 30 + rng.next_below(150);
    const std::size_t cap = 5 + rng.next_below(40);
    const auto pts = random_points(rng, n);
    const auto once = voxel_cap(pts, cap, 0.3);
    CHECK(once.size() <= cap);
    for (std::uint32_t idx : once) CHECK(idx < n);

    // Idempotence: capping the representatives again is the identity.
    std::vector<Vec3> reps;
    for (std::uint32_t idx : once) reps.push_back(pts[idx]);
    const auto twice = voxel_cap(reps, cap, 0.3);
    REQUIRE(twice.size() == once.size());
    for (std::uint32_t i = 0; i < twice.size(); ++i) CHECK(twice[i] == i);

    // Permutation invariance up to the tie rule: reversing the cloud must keep
    // the occupied-voxel structure, and wherever a voxel has a unique
    // nearest-to-centroid member the same geometric point must be chosen.
    // (Two-member voxels tie exactly — the centroid is the midpoint — and the
    // lowest-index rule is then deliberately order-dependent.)
    std::vector<Vec3> rev(pts.rbegin(), pts.rend());
    auto rev_out = voxel_cap(rev, cap, 0.3);
    REQUIRE(rev_out.size() == once.size());

    const auto cells = oracles::voxel_cells_at_final_edge(pts, cap, 0.3);
    auto cell_of = [&](const Vec3& p) { return oracles::voxel_key(p, cells.origin, cells.edge); };
    std::map<std::array<long long, 3>, Vec3> fwd_choice, rev_choice;
    for (std::uint32_t idx : once) fwd_choice[cell_of(pts[idx])] = pts[idx];
    for (std::uint32_t idx : rev_out) rev_choice[cell_of(rev[idx])] = rev[idx];
    REQUIRE(fwd_choice.size() == rev_choice.size());
    for (const auto& [key, p] : fwd_choice) {
      REQUIRE(rev_choice.count(key) == 1);
      if (cells.unique_min.at(key)) CHECK(rev_choice.at(key) == p);
    }
  }
}

TEST_CASE("fps hand trace on collinear points") {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}};
  CHECK(fps(pts, 3) == std::vector<std::uint32_t>{0, 4, 2});
  const auto all = fps(pts, 5);
  std::vector<std::uint32_t> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
}

TEST_CASE("fps equals the brute-force greedy oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.next_below(64);
    const std::size_t k = 1 + rng.next_below(n);
    const auto pts = random_points(rng, n);
    CHECK(fps(pts, k) == oracles::brute_fps(pts, k));
  }
}

TEST_CASE("fps rejects out-of-range k") {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(fps(pts, 0), ArgumentError);
  CHECK_THROWS_AS(fps(pts, 3), ArgumentError);
}

TEST_CASE("feature descriptors") {
  const Bbox box{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}};
  CandidatePool pool;
  pool.bbox = box;
  pool.cap = 16;

  SUBCASE("bbox corner maps to zero coords") {
    pool.candidates = {{0, {{0.0, 0.0, 0.0}, 0.5, {1.0, 2.0, 3.0}}},
                       {1, {{2.0, 2.0, 2.0}, 0.25, {0.5, 0.5, 0.5}}}};
    const auto f = features(pool);
    CHECK(f[0].coords_norm.x == 0.0);
    CHECK(f[0].coords_norm.y == 0.0);
    CHECK(f[0].coords_norm.z == 0.0);
    CHECK(f[1].coords_norm.x == 1.0);
    CHECK(f[0].opacity == 0.5);
    // scale (1,2,3): log(mean + 1e-8) = log(2 + 1e-8)
    CHECK(f[0].log_mean_scale == doctest::Approx(std::log(2.0 + 1e-8)).epsilon(1e-12));
  }

  SUBCASE("single candidate has dist_norm zero") {
    pool.candidates = {{0, {{1.0, 1.0, 1.0}, 0.5, {0.1, 0.1, 0.1}}}};
    CHECK(features(pool)[0].dist_norm == 0.0);
  }

  SUBCASE("empty pool is an error") {
    pool.candidates.clear();
    CHECK_THROWS_AS(features(pool), ArgumentError);
  }
}

TEST_CASE("feature ranges hold on generated scenes") {
  SceneSpec spec;
  spec.seed = 31;
  spec.num_frames = 4;
  spec.clusters = 3;
  spec.primitives_per_cluster = 40;
  const auto frames = generate_scene(spec);
  const Bbox bounds = scene_bounds(frames);
  for (const Frame& f : frames) {
    const auto pool = make_candidate_pool(f, bounds, {2048, 0.02});
    pool.validate();
    for (const auto& d : features(pool)) {
      CHECK(d.coords_norm.x >= 0.0);
      CHECK(d.coords_norm.x <= 1.0);
      CHECK(d.coords_norm.y >= 0.0);
      CHECK(d.coords_norm.y <= 1.0);
      CHECK(d.coords_norm.z >= 0.0);
      CHECK(d.coords_norm.z <= 1.0);
      CHECK(d.dist_norm >= 0.0);
      CHECK(d.dist_norm <= 1.0);
      CHECK(std::isfinite(d.log_mean_scale));
    }
  }
}

TEST_CASE("pool construction respects the cap and stable order") {
  SceneSpec spec;
  spec.seed = 5;
  spec.num_frames = 1;
  spec.clusters = 4;
  spec.primitives_per_cluster = 256;
  const auto frames = generate_scene(spec);
  const Bbox bounds = scene_bounds(frames);
  const auto pool = make_candidate_pool(frames[0], bounds, {128, 0.01});
  CHECK(pool.size() <= 128);
  pool.validate();
}
