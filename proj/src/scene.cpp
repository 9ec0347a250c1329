#include "egs/scene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "egs/error.hpp"
#include "egs/rng.hpp"
#include "egs/text.hpp"

namespace egs {

namespace {

// Reflects t into [lo, hi] with a triangle wave; keeps motion piecewise linear.
double fold(double t, double lo, double hi) {
  const double span = hi - lo;
  double u = std::fmod(t - lo, 2.0 * span);
  if (u < 0.0) u += 2.0 * span;
  return lo + (u <= span ? u : 2.0 * span - u);
}

// Point on the wireframe of an axis-aligned box of half-extent h around the
// origin: pick one of twelve edges, then a position along it.
Vec3 wireframe_point(Rng& rng, double h) {
  const std::uint64_t edge = rng.next_below(12);
  const double t = rng.uniform(-h, h);
  const double a = (edge & 1) ? h : -h;
  const double b = (edge & 2) ? h : -h;
  switch (edge >> 2) {
    case 0: return {t, a, b};   // edges along x
    case 1: return {a, t, b};   // edges along y
    default: return {a, b, t};  // edges along z
  }
}

// Opacity bands are disjoint (>= 0.8 salient, <= 0.2 background) and the
// background footprint is kept small so the salient subset dominates the
// rendered energy; that planted structure is the training signal.
constexpr double kSalientOpacityLo = 0.85;
constexpr double kSalientOpacityHi = 1.0;
constexpr double kBackgroundOpacityLo = 0.02;
constexpr double kBackgroundOpacityHi = 0.10;

}  // namespace

void SceneSpec::validate() const {
  if (num_frames < 1) throw ValidationError("scene spec: num_frames must be >= 1");
  if (clusters < 1) throw ValidationError("scene spec: clusters must be >= 1");
  if (primitives_per_cluster < 1) {
    throw ValidationError("scene spec: primitives_per_cluster must be >= 1");
  }
  if (!(fraction_salient >= 0.0 && fraction_salient <= 1.0)) {
    throw ValidationError("scene spec: fraction_salient must lie in [0, 1]");
  }
  if (!(motion_amplitude >= 0.0) || !std::isfinite(motion_amplitude)) {
    throw ValidationError("scene spec: motion_amplitude must be finite and >= 0");
  }
  if (!bbox.valid()) throw ValidationError("scene spec: bbox min must be < max componentwise");
}

std::size_t salient_count(const SceneSpec& spec) {
  const double total = static_cast<double>(spec.clusters) *
                       static_cast<double>(spec.primitives_per_cluster);
  return static_cast<std::size_t>(std::llround(spec.fraction_salient * total));
}

std::vector<Frame> generate_scene(const SceneSpec& spec) {
  spec.validate();

  const std::size_t total =
      static_cast<std::size_t>(spec.clusters) * spec.primitives_per_cluster;
  const std::size_t n_salient = salient_count(spec);
  const Vec3 ext = spec.bbox.extent();
  const double min_ext = std::min(ext.x, std::min(ext.y, ext.z));
  const double cluster_half = 0.08 * min_ext;

  Rng rng(spec.seed);
  Rng layout = rng.fork(0x5ce9e1);
  Rng motion = rng.fork(0x307a0b);

  // Cluster start positions and straight-line velocities. The start box is
  // inset so the wireframe itself cannot poke outside before clamping.
  const double inset = cluster_half * 1.5;
  struct ClusterTrack {
    Vec3 start;
    Vec3 velocity;
  };
  std::vector<ClusterTrack> tracks(spec.clusters);
  for (auto& tr : tracks) {
    tr.start = {layout.uniform(spec.bbox.min.x + inset, spec.bbox.max.x - inset),
                layout.uniform(spec.bbox.min.y + inset, spec.bbox.max.y - inset),
                layout.uniform(spec.bbox.min.z + inset, spec.bbox.max.z - inset)};
    Vec3 dir{layout.uniform(-1.0, 1.0), layout.uniform(-1.0, 1.0),
             layout.uniform(-1.0, 1.0)};
    const double n = dir.norm();
    if (n > 0.0) dir = dir * (1.0 / n);
    tr.velocity = dir * spec.motion_amplitude;
  }

  // Per-primitive templates: offsets, opacities and scales are fixed once and
  // reused every frame, so clusters translate rigidly.
  struct Template {
    std::uint32_t cluster;  // background uses the sentinel ~0u
    Vec3 offset;            // relative to cluster center, or absolute for background
    double opacity;
    Vec3 scale;
  };
  std::vector<Template> prims;
  prims.reserve(total);

  // Salient primitives spread round-robin over clusters.
  for (std::size_t i = 0; i < n_salient; ++i) {
    Template t;
    t.cluster = static_cast<std::uint32_t>(i % spec.clusters);
    Vec3 p = wireframe_point(layout, cluster_half);
    const double jitter = cluster_half / 20.0;
    p = p + Vec3{layout.uniform(-jitter, jitter), layout.uniform(-jitter, jitter),
                 layout.uniform(-jitter, jitter)};
    t.offset = p;
    t.opacity = layout.uniform(kSalientOpacityLo, kSalientOpacityHi);
    t.scale = {layout.uniform(0.03, 0.05) * min_ext, layout.uniform(0.03, 0.05) * min_ext,
               layout.uniform(0.03, 0.05) * min_ext};
    prims.push_back(t);
  }
  for (std::size_t i = n_salient; i < total; ++i) {
    Template t;
    t.cluster = ~0u;
    t.offset = {layout.uniform(spec.bbox.min.x, spec.bbox.max.x),
                layout.uniform(spec.bbox.min.y, spec.bbox.max.y),
                layout.uniform(spec.bbox.min.z, spec.bbox.max.z)};
    t.opacity = layout.uniform(kBackgroundOpacityLo, kBackgroundOpacityHi);
    t.scale = {layout.uniform(0.006, 0.015) * min_ext,
               layout.uniform(0.006, 0.015) * min_ext,
               layout.uniform(0.006, 0.015) * min_ext};
    prims.push_back(t);
  }

  std::vector<Frame> frames(spec.num_frames);
  const double jitter_amp = 0.1 * spec.motion_amplitude;
  for (std::uint32_t f = 0; f < spec.num_frames; ++f) {
    Frame& frame = frames[f];
    frame.index = f;
    frame.primitives.reserve(total);

    std::vector<Vec3> centers(spec.clusters);
    for (std::uint32_t c = 0; c < spec.clusters; ++c) {
      const Vec3 drift = tracks[c].start + tracks[c].velocity * static_cast<double>(f);
      Vec3 jit{motion.uniform(-jitter_amp, jitter_amp),
               motion.uniform(-jitter_amp, jitter_amp),
               motion.uniform(-jitter_amp, jitter_amp)};
      centers[c] = {fold(drift.x, spec.bbox.min.x + inset, spec.bbox.max.x - inset) + jit.x,
                    fold(drift.y, spec.bbox.min.y + inset, spec.bbox.max.y - inset) + jit.y,
                    fold(drift.z, spec.bbox.min.z + inset, spec.bbox.max.z - inset) + jit.z};
    }

    for (const Template& t : prims) {
      GaussianPrimitive g;
      const Vec3 pos = t.cluster == ~0u ? t.offset : centers[t.cluster] + t.offset;
      g.center = {clamp(pos.x, spec.bbox.min.x, spec.bbox.max.x),
                  clamp(pos.y, spec.bbox.min.y, spec.bbox.max.y),
                  clamp(pos.z, spec.bbox.min.z, spec.bbox.max.z)};
      g.opacity = t.opacity;
      g.scale = t.scale;
      frame.primitives.push_back(g);
    }
  }
  return frames;
}

void write_scene(const std::vector<Frame>& frames, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw IoError("cannot open scene file for writing: " + path.string());
  out << "EGS-SCENE v1 " << frames.size() << "\n";
  for (const Frame& f : frames) {
    out << "FRAME " << f.index << " " << f.primitives.size() << "\n";
    for (const GaussianPrimitive& g : f.primitives) {
      out << format_double(g.center.x) << ' ' << format_double(g.center.y) << ' '
          << format_double(g.center.z) << ' ' << format_double(g.opacity) << ' '
          << format_double(g.scale.x) << ' ' << format_double(g.scale.y) << ' '
          << format_double(g.scale.z) << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Frame> read_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scene file: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("scene file " + path.string() + ":" + std::to_string(line_no) +
                      ": " + msg);
  };

  if (!next_line()) throw fail("missing header");
  auto head = split_ws(line);
  if (head.size() != 3 || head[0] != "EGS-SCENE" || head[1] != "v1") {
    throw fail("expected 'EGS-SCENE v1 <num_frames>'");
  }
  const std::uint64_t num_frames = parse_u64(head[2], "num_frames");

  std::vector<Frame> frames;
  frames.reserve(num_frames);
  for (std::uint64_t f = 0; f < num_frames; ++f) {
    if (!next_line()) throw fail("unexpected end of file: expected FRAME header");
    auto fh = split_ws(line);
    if (fh.size() != 3 || fh[0] != "FRAME") throw fail("expected 'FRAME <t> <N>'");
    Frame frame;
    frame.index = static_cast<std::uint32_t>(parse_u64(fh[1], "frame index"));
    const std::uint64_t n = parse_u64(fh[2], "primitive count");
    frame.primitives.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!next_line()) {
        throw FormatError("scene file " + path.string() + ": frame " +
                          std::to_string(frame.index) + " declares " + std::to_string(n) +
                          " primitives but the file ends after " + std::to_string(i));
      }
      auto tok = split_ws(line);
      if (tok.size() != 7) throw fail("expected 7 fields per primitive row");
      GaussianPrimitive g;
      g.center = {parse_double(tok[0], "x"), parse_double(tok[1], "y"),
                  parse_double(tok[2], "z")};
      g.opacity = parse_double(tok[3], "opacity");
      g.scale = {parse_double(tok[4], "sx"), parse_double(tok[5], "sy"),
                 parse_double(tok[6], "sz")};
      frame.primitives.push_back(g);
    }
    frames.push_back(std::move(frame));
  }
  if (next_line() && !line.empty()) throw fail("trailing content after last frame");
  return frames;
}

Bbox scene_bounds(const std::vector<Frame>& frames) {
  bool any = false;
  Bbox b{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  for (const Frame& f : frames) {
    for (const GaussianPrimitive& g : f.primitives) {
      if (!any) {
        b.min = b.max = g.center;
        any = true;
        continue;
      }
      b.min.x = std::min(b.min.x, g.center.x);
      b.min.y = std::min(b.min.y, g.center.y);
      b.min.z = std::min(b.min.z, g.center.z);
      b.max.x = std::max(b.max.x, g.center.x);
      b.max.y = std::max(b.max.y, g.center.y);
      b.max.z = std::max(b.max.z, g.center.z);
    }
  }
  const double pad = 1e-6;
  if (b.max.x - b.min.x < pad) { b.min.x -= pad; b.max.x += pad; }
  if (b.max.y - b.min.y < pad) { b.min.y -= pad; b.max.y += pad; }
  if (b.max.z - b.min.z < pad) { b.min.z -= pad; b.max.z += pad; }
  return b;
}

}  // namespace egs
