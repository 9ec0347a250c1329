#include "egs/render.hpp"

#include <cmath>
#include <fstream>

#include "egs/error.hpp"

namespace egs {

Image Image::zeros(int width, int height) {
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, 0.0);
  return img;
}

Image render(std::span<const GaussianPrimitive> primitives, const RenderView& view) {
  if (view.width < 1 || view.height < 1) {
    throw ArgumentError("render: image dimensions must be >= 1");
  }
  if (!view.bbox.valid()) throw ArgumentError("render: invalid view bbox");

  Image img = Image::zeros(view.width, view.height);
  const Vec3 ext = view.bbox.extent();
  const double px_per_x = view.width / ext.x;
  const double px_per_y = view.height / ext.y;

  for (const GaussianPrimitive& g : primitives) {
    const double cx = (g.center.x - view.bbox.min.x) * px_per_x;
    const double cy = (g.center.y - view.bbox.min.y) * px_per_y;
    const double sigma = 0.5 * (g.scale.x * px_per_x + g.scale.y * px_per_y);
    const double inv_2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int y = 0; y < view.height; ++y) {
      const double dy = (y + 0.5) - cy;
      double* row = img.pixels.data() + static_cast<std::size_t>(y) * view.width;
      for (int x = 0; x < view.width; ++x) {
        const double dx = (x + 0.5) - cx;
        row[x] += g.opacity * std::exp(-(dx * dx + dy * dy) * inv_2s2);
      }
    }
  }
  for (double& p : img.pixels) p = clamp(p, 0.0, 1.0);
  return img;
}

Image render_frame(const Frame& frame, const RenderView& view) {
  return render(frame.primitives, view);
}

Image render_indices(const Frame& frame, std::span<const std::uint32_t> frame_indices,
                     const RenderView& view) {
  std::vector<GaussianPrimitive> subset;
  subset.reserve(frame_indices.size());
  for (std::uint32_t i : frame_indices) {
    if (i >= frame.primitives.size()) {
      throw ArgumentError("render_indices: index " + std::to_string(i) +
                          " out of range for frame with " +
                          std::to_string(frame.primitives.size()) + " primitives");
    }
    subset.push_back(frame.primitives[i]);
  }
  return render(subset, view);
}

void write_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open PGM for writing: " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (double p : img.pixels) {
    const auto byte = static_cast<unsigned char>(std::lround(clamp(p, 0.0, 1.0) * 255.0));
    out.put(static_cast<char>(byte));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace egs
