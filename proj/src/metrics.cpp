#include "egs/metrics.hpp"

#include <array>
#include <cmath>

#include "egs/error.hpp"

namespace egs {

namespace {

void require_same_dims(const Image& a, const Image& b, const char* op) {
  if (a.width != b.width || a.height != b.height) {
    throw ArgumentError(std::string(op) + ": image dimensions differ: " +
                        std::to_string(a.width) + "x" + std::to_string(a.height) +
                        " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2
constexpr double kC2 = 0.03 * 0.03;  // (K2 * L)^2

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> w{};
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable Gaussian filter evaluated only where the full window fits.
std::vector<double> filter_valid(const Image& img, int out_w, int out_h) {
  const auto taps = gaussian_taps();
  // Horizontal pass over all rows.
  std::vector<double> tmp(static_cast<std::size_t>(img.height) * out_w);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += taps[t] * img.at(x + t, y);
      tmp[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  // Vertical pass.
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) {
        acc += taps[t] * tmp[static_cast<std::size_t>(y + t) * out_w + x];
      }
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

Image product_image(const Image& a, const Image& b) {
  Image out = Image::zeros(a.width, a.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = a.pixels[i] * b.pixels[i];
  }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same_dims(a, b, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.pixels.size());
  if (mse < 1e-12) return kPsnrCap;
  return -10.0 * std::log10(mse);
}

double dssim(const Image& a, const Image& b) {
  require_same_dims(a, b, "dssim");
  if (a.width < kWindow || a.height < kWindow) {
    throw ArgumentError("dssim: images must be at least 11x11");
  }
  const int out_w = a.width - kWindow + 1;
  const int out_h = a.height - kWindow + 1;

  const auto mu_a = filter_valid(a, out_w, out_h);
  const auto mu_b = filter_valid(b, out_w, out_h);
  const auto m_aa = filter_valid(product_image(a, a), out_w, out_h);
  const auto m_bb = filter_valid(product_image(b, b), out_w, out_h);
  const auto m_ab = filter_valid(product_image(a, b), out_w, out_h);

  double ssim_sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = m_aa[i] - ma * ma;
    const double vb = m_bb[i] - mb * mb;
    const double cov = m_ab[i] - ma * mb;
    const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
    const double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
    ssim_sum += num / den;
  }
  const double ssim = ssim_sum / static_cast<double>(mu_a.size());
  return (1.0 - ssim) / 2.0;
}

}  // namespace egs
