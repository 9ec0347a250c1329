#include <doctest.h>

#include <fstream>
#include <sstream>

#include "egs/error.hpp"
#include "egs/metrics.hpp"
#include "egs/render.hpp"
#include "egs/scene.hpp"

#include "oracles.hpp"

using namespace egs;

namespace {

SceneSpec toy_spec() {
  SceneSpec spec;
  spec.seed = 2026;
  spec.num_frames = 8;
  spec.clusters = 4;
  spec.primitives_per_cluster = 512;
  spec.fraction_salient = 0.25;
  spec.motion_amplitude = 0.01;
  return spec;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("degenerate spec: one salient primitive") {
  SceneSpec spec;
  spec.num_frames = 1;
  spec.clusters = 1;
  spec.primitives_per_cluster = 1;
  spec.fraction_salient = 1.0;
  const auto frames = generate_scene(spec);
  REQUIRE(frames.size() == 1);
  REQUIRE(frames[0].primitives.size() == 1);
  CHECK(frames[0].primitives[0].opacity >= 0.8);
}

TEST_CASE("generation is deterministic") {
  const SceneSpec spec = toy_spec();
  const auto a = generate_scene(spec);
  const auto b = generate_scene(spec);
  CHECK(a == b);
}

TEST_CASE("counts and salient fraction from the spec") {
  const SceneSpec spec = toy_spec();
  const auto frames = generate_scene(spec);
  REQUIRE(frames.size() == 8);
  const std::size_t expected_salient = salient_count(spec);
  CHECK(expected_salient ==
        static_cast<std::size_t>(std::llround(0.25 * 4 * 512)));
  for (const Frame& f : frames) {
    REQUIRE(f.primitives.size() == 4 * 512);
    // Enumerate: salient <=> opacity >= 0.8, background <= 0.2, no middle ground.
    std::size_t salient = 0;
    for (const auto& g : f.primitives) {
      if (g.opacity >= 0.8) {
        ++salient;
      } else {
        CHECK(g.opacity <= 0.2);
      }
    }
    CHECK(salient == expected_salient);
  }
}

TEST_CASE("generated centers stay in the bbox, scales positive") {
  SceneSpec spec = toy_spec();
  spec.motion_amplitude = 0.08;  // enough drift to hit the reflection rule
  spec.num_frames = 16;
  const auto frames = generate_scene(spec);
  for (const Frame& f : frames) {
    for (const auto& g : f.primitives) {
      CHECK(spec.bbox.contains(g.center));
      CHECK(g.scale.x > 0.0);
      CHECK(g.scale.y > 0.0);
      CHECK(g.scale.z > 0.0);
      CHECK(g.opacity >= 0.0);
      CHECK(g.opacity <= 1.0);
    }
  }
}

TEST_CASE("invalid specs name the offending field") {
  SceneSpec spec = toy_spec();
  spec.clusters = 0;
  CHECK_THROWS_WITH_AS(generate_scene(spec), doctest::Contains("clusters"),
                       ValidationError);
  spec = toy_spec();
  spec.fraction_salient = 1.5;
  CHECK_THROWS_WITH_AS(generate_scene(spec), doctest::Contains("fraction_salient"),
                       ValidationError);
  spec = toy_spec();
  spec.bbox.max = spec.bbox.min;
  CHECK_THROWS_WITH_AS(generate_scene(spec), doctest::Contains("bbox"), ValidationError);
}

TEST_CASE("scene file round-trips exactly") {
  const auto dir = oracles::temp_dir("scene_io");

  SUBCASE("empty frame list") {
    write_scene({}, dir / "empty.scene");
    CHECK(file_bytes(dir / "empty.scene") == "EGS-SCENE v1 0\n");
    CHECK(read_scene(dir / "empty.scene").empty());
  }

  SUBCASE("single primitive gives a 3-line file") {
    Frame f;
    f.index = 0;
    f.primitives.push_back({{0.25, 0.5, 0.75}, 0.9, {0.01, 0.02, 0.03}});
    write_scene({f}, dir / "one.scene");
    const std::string bytes = file_bytes(dir / "one.scene");
    CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 3);
    const auto back = read_scene(dir / "one.scene");
    REQUIRE(back.size() == 1);
    CHECK(back[0] == f);
  }

  SUBCASE("generated scene round-trips on every field") {
    SceneSpec spec = toy_spec();
    spec.seed = 7;
    spec.primitives_per_cluster = 64;
    const auto frames = generate_scene(spec);
    write_scene(frames, dir / "gen.scene");
    const auto back = read_scene(dir / "gen.scene");
    CHECK(back == frames);
    // And writing the reread scene reproduces the bytes.
    write_scene(back, dir / "gen2.scene");
    CHECK(file_bytes(dir / "gen.scene") == file_bytes(dir / "gen2.scene"));
  }
}

TEST_CASE("malformed scene files fail with line numbers") {
  const auto dir = oracles::temp_dir("scene_bad");
  auto write_text = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    return dir / name;
  };

  CHECK_THROWS_AS(read_scene(write_text("h.scene", "NOPE v1 1\n")), ParseError);
  CHECK_THROWS_WITH_AS(
      read_scene(write_text("row.scene", "EGS-SCENE v1 1\nFRAME 0 1\n1 2 3\n")),
      doctest::Contains(":3"), ParseError);
  CHECK_THROWS_AS(
      read_scene(write_text("count.scene",
                            "EGS-SCENE v1 1\nFRAME 0 2\n1 2 3 0.5 1 1 1\n")),
      FormatError);
}

TEST_CASE("salient primitives carry at least 90% of the render energy") {
  // Planted-structure contract: the policy's training signal lives in the
  // salient subset.
  for (std::uint64_t seed : {2026ULL, 2027ULL, 7ULL}) {
    SceneSpec spec = toy_spec();
    spec.seed = seed;
    spec.primitives_per_cluster = 96;
    const auto frames = generate_scene(spec);
    const RenderView view{spec.bbox, 64, 64};

    std::vector<GaussianPrimitive> salient;
    for (const auto& g : frames[0].primitives) {
      if (g.opacity >= 0.8) salient.push_back(g);
    }
    const Image full = render_frame(frames[0], view);
    const Image sal = render(salient, view);
    double e_full = 0.0, e_sal = 0.0;
    for (double p : full.pixels) e_full += p;
    for (double p : sal.pixels) e_sal += p;
    REQUIRE(e_full > 0.0);
    CHECK(e_sal / e_full >= 0.9);
  }
}

TEST_CASE("scene_bounds covers every center and pads degenerate axes") {
  Frame f;
  f.primitives.push_back({{0.2, 0.3, 0.5}, 0.5, {0.01, 0.01, 0.01}});
  f.primitives.push_back({{0.8, 0.7, 0.5}, 0.5, {0.01, 0.01, 0.01}});
  const Bbox b = scene_bounds({f});
  CHECK(b.valid());
  for (const auto& g : f.primitives) CHECK(b.contains(g.center));
}
