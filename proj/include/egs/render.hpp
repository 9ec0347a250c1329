#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "egs/geometry.hpp"
#include "egs/scene.hpp"

namespace egs {

struct Image {
  int width{0};
  int height{0};
  std::vector<double> pixels;  // row-major, intensities in [0, 1]

  static Image zeros(int width, int height);
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Fixed orthographic camera looking down the z axis: the bbox's xy face maps
// onto the full image.
struct RenderView {
  Bbox bbox;
  int width{64};
  int height{64};
};

// Additive grayscale splatting: every Gaussian contributes
// opacity * exp(-|p - proj(center)|^2 / (2 sigma^2)) to each pixel, with sigma
// the mean of the two in-plane scale components in pixel units. Contributions
// are summed first, then clamped to [0, 1], so the result is order-independent.
Image render(std::span<const GaussianPrimitive> primitives, const RenderView& view);

Image render_frame(const Frame& frame, const RenderView& view);

// Renders the primitives at `frame_indices` (positions into the frame).
Image render_indices(const Frame& frame, std::span<const std::uint32_t> frame_indices,
                     const RenderView& view);

// Binary PGM (P5, maxval 255) debug dump.
void write_pgm(const Image& img, const std::filesystem::path& path);

}  // namespace egs
