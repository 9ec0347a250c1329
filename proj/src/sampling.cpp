#include "egs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <unordered_map>

#include "egs/error.hpp"

namespace egs {

std::vector<Vec3> CandidatePool::centers() const {
  std::vector<Vec3> out;
  out.reserve(candidates.size());
  for (const Candidate& c : candidates) out.push_back(c.primitive.center);
  return out;
}

void CandidatePool::validate() const {
  if (candidates.size() > cap) throw ValidationError("candidate pool exceeds its cap");
  std::uint32_t prev = 0;
  bool first = true;
  for (const Candidate& c : candidates) {
    if (!bbox.contains(c.primitive.center)) {
      throw ValidationError("candidate center outside the pool bbox");
    }
    if (!first && c.original <= prev) {
      throw ValidationError("candidate original indices must be strictly increasing");
    }
    prev = c.original;
    first = false;
  }
}

std::vector<std::uint32_t> filter_bbox(const Frame& frame, const Bbox& bbox) {
  if (!bbox.valid()) throw ArgumentError("filter_bbox: bbox min must be < max");
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < frame.primitives.size(); ++i) {
    if (bbox.contains(frame.primitives[i].center)) out.push_back(i);
  }
  return out;
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t v : {static_cast<std::uint64_t>(k.x), static_cast<std::uint64_t>(k.y),
                            static_cast<std::uint64_t>(k.z)}) {
      h ^= v;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::vector<std::uint32_t> voxel_cap(std::span<const Vec3> points, std::size_t cap,
                                     double initial_voxel) {
  if (cap < 1) throw ArgumentError("voxel_cap: cap must be >= 1");
  if (!(initial_voxel > 0.0)) throw ArgumentError("voxel_cap: initial_voxel must be > 0");

  const std::size_t n = points.size();
  std::vector<std::uint32_t> identity(n);
  for (std::uint32_t i = 0; i < n; ++i) identity[i] = i;
  if (n <= cap) return identity;

  Vec3 origin = points[0];
  for (const Vec3& p : points) {
    origin.x = std::min(origin.x, p.x);
    origin.y = std::min(origin.y, p.y);
    origin.z = std::min(origin.z, p.z);
  }

  double edge = initial_voxel;
  for (;;) {
    std::unordered_map<VoxelKey, std::vector<std::uint32_t>, VoxelKeyHash> cells;
    cells.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const Vec3& p = points[i];
      const VoxelKey key{static_cast<std::int64_t>(std::floor((p.x - origin.x) / edge)),
                         static_cast<std::int64_t>(std::floor((p.y - origin.y) / edge)),
                         static_cast<std::int64_t>(std::floor((p.z - origin.z) / edge))};
      cells[key].push_back(i);
    }
    if (cells.size() <= cap) {
      std::vector<std::uint32_t> reps;
      reps.reserve(cells.size());
      for (const auto& [key, members] : cells) {
        // Centroid accumulation runs in coordinate-sorted order so the sum is
        // identical for any permutation of the input cloud.
        std::vector<Vec3> sorted_members;
        sorted_members.reserve(members.size());
        for (std::uint32_t m : members) sorted_members.push_back(points[m]);
        std::sort(sorted_members.begin(), sorted_members.end(),
                  [](const Vec3& a, const Vec3& b) {
                    return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
                  });
        Vec3 centroid{0.0, 0.0, 0.0};
        for (const Vec3& p : sorted_members) centroid = centroid + p;
        centroid = centroid * (1.0 / static_cast<double>(members.size()));
        std::uint32_t best = members[0];
        double best_d = std::numeric_limits<double>::infinity();
        for (std::uint32_t m : members) {
          const double d = (points[m] - centroid).norm2();
          if (d < best_d || (d == best_d && m < best)) {
            best_d = d;
            best = m;
          }
        }
        reps.push_back(best);
      }
      std::sort(reps.begin(), reps.end());
      return reps;
    }
    edge *= 2.0;
  }
}

std::vector<std::uint32_t> fps(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k < 1 || k > n) {
    throw ArgumentError("fps: k must satisfy 1 <= k <= " + std::to_string(n) + ", got " +
                        std::to_string(k));
  }
  std::vector<std::uint32_t> selected;
  selected.reserve(k);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::uint32_t current = 0;
  selected.push_back(current);
  for (std::size_t step = 1; step < k; ++step) {
    std::uint32_t best = 0;
    double best_d2 = -1.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const double d2 = (points[i] - points[current]).norm2();
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    current = best;
    selected.push_back(current);
    min_d2[current] = -1.0;  // never re-selected: every real distance is >= 0
  }
  return selected;
}

CandidatePool make_candidate_pool(const Frame& frame, const Bbox& bbox,
                                  const PoolConfig& cfg) {
  const std::vector<std::uint32_t> inside = filter_bbox(frame, bbox);
  std::vector<Vec3> centers;
  centers.reserve(inside.size());
  for (std::uint32_t i : inside) centers.push_back(frame.primitives[i].center);
  const std::vector<std::uint32_t> kept = voxel_cap(centers, cfg.cap, cfg.initial_voxel);

  CandidatePool pool;
  pool.source_frame = frame.index;
  pool.bbox = bbox;
  pool.cap = cfg.cap;
  pool.candidates.reserve(kept.size());
  for (std::uint32_t pos : kept) {
    pool.candidates.push_back({inside[pos], frame.primitives[inside[pos]]});
  }
  return pool;
}

std::vector<FeatureDescriptor> features(const CandidatePool& pool) {
  if (pool.candidates.empty()) throw ArgumentError("features: empty candidate pool");
  constexpr double kEps = 1e-8;

  Vec3 centroid{0.0, 0.0, 0.0};
  for (const Candidate& c : pool.candidates) centroid = centroid + c.primitive.center;
  centroid = centroid * (1.0 / static_cast<double>(pool.candidates.size()));

  double max_dist = 0.0;
  for (const Candidate& c : pool.candidates) {
    max_dist = std::max(max_dist, (c.primitive.center - centroid).norm());
  }

  const Vec3 ext = pool.bbox.extent();
  std::vector<FeatureDescriptor> out;
  out.reserve(pool.candidates.size());
  for (const Candidate& c : pool.candidates) {
    FeatureDescriptor f;
    const Vec3 rel = c.primitive.center - pool.bbox.min;
    f.coords_norm = {rel.x / ext.x, rel.y / ext.y, rel.z / ext.z};
    f.opacity = c.primitive.opacity;
    const double mean_scale =
        (c.primitive.scale.x + c.primitive.scale.y + c.primitive.scale.z) / 3.0;
    f.log_mean_scale = std::log(mean_scale + kEps);
    const double d = (c.primitive.center - centroid).norm();
    f.dist_norm = max_dist > 0.0 ? d / max_dist : 0.0;
    out.push_back(f);
  }
  return out;
}

}  // namespace egs
