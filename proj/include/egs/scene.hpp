#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "egs/geometry.hpp"

namespace egs {

struct GaussianPrimitive {
  Vec3 center;
  double opacity{0.0};   // in [0, 1]
  Vec3 scale;            // componentwise > 0

  bool operator==(const GaussianPrimitive&) const = default;
};

struct Frame {
  std::uint32_t index{0};
  std::vector<GaussianPrimitive> primitives;

  bool operator==(const Frame&) const = default;
};

// Procedural scene recipe. Salient primitives sit on wireframe-box clusters
// that translate over time; the rest is static low-opacity background fill.
struct SceneSpec {
  std::uint64_t seed{2026};
  std::uint32_t num_frames{8};
  std::uint32_t clusters{4};
  std::uint32_t primitives_per_cluster{64};
  double fraction_salient{0.25};
  double motion_amplitude{0.01};  // scene units per frame
  Bbox bbox{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};

  void validate() const;  // throws ValidationError naming the offending field
};

// Deterministic function of the spec: same spec gives byte-identical frames on
// every platform. Salient primitives have opacity >= 0.8 and small scales;
// background stays at opacity <= 0.2.
std::vector<Frame> generate_scene(const SceneSpec& spec);

std::size_t salient_count(const SceneSpec& spec);

void write_scene(const std::vector<Frame>& frames, const std::filesystem::path& path);
std::vector<Frame> read_scene(const std::filesystem::path& path);

// Componentwise min/max over every primitive center in the scene. Used as the
// working bbox for candidate filtering and rendering when no explicit box is
// configured. Degenerate axes are padded so the box stays valid.
Bbox scene_bounds(const std::vector<Frame>& frames);

}  // namespace egs
