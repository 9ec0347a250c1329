#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "egs/geometry.hpp"
#include "egs/scene.hpp"

namespace egs {

// One pooled candidate; `original` is its position in the source frame, which
// is the primitive's canonical identity.
struct Candidate {
  std::uint32_t original{0};
  GaussianPrimitive primitive;
};

struct CandidatePool {
  std::uint32_t source_frame{0};
  std::vector<Candidate> candidates;  // original indices strictly increasing
  Bbox bbox;
  std::size_t cap{2048};

  std::size_t size() const { return candidates.size(); }
  std::vector<Vec3> centers() const;
  void validate() const;
};

// The six-component per-candidate descriptor fed to the policy.
struct FeatureDescriptor {
  Vec3 coords_norm;        // bbox-normalized position, each in [0, 1]
  double opacity{0.0};
  double log_mean_scale{0.0};
  double dist_norm{0.0};   // distance to pool centroid over the pool max

  static constexpr int kDim = 6;
};

// Original indices of primitives whose centers lie inside the closed box, in
// original order. Empty result is fine.
std::vector<std::uint32_t> filter_bbox(const Frame& frame, const Bbox& bbox);

// Caps `points` to at most `cap` representatives by voxel-hash downsampling.
// Under the cap the input passes through unchanged. Otherwise the voxel edge
// starts at `initial_voxel` and doubles until the occupied-voxel count fits;
// each voxel is represented by the member nearest its members' centroid (ties
// to the lowest index). Returned indices are positions into `points`, sorted
// ascending.
std::vector<std::uint32_t> voxel_cap(std::span<const Vec3> points, std::size_t cap,
                                     double initial_voxel);

// Greedy farthest point sampling over positions 0..n-1: starts at index 0 and
// repeatedly appends the point with the largest min-distance to the selected
// set (ties to the lowest index). Output is in selection order.
std::vector<std::uint32_t> fps(std::span<const Vec3> points, std::size_t k);

struct PoolConfig {
  std::size_t cap{2048};
  double initial_voxel{0.02};
};

CandidatePool make_candidate_pool(const Frame& frame, const Bbox& bbox,
                                  const PoolConfig& cfg);

std::vector<FeatureDescriptor> features(const CandidatePool& pool);

}  // namespace egs
