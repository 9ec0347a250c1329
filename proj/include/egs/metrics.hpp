#pragma once

#include "egs/render.hpp"

namespace egs {

// Peak signal-to-noise ratio in dB for unit-range intensities:
// 10*log10(1/MSE), capped at 99 dB once MSE drops below 1e-12.
double psnr(const Image& a, const Image& b);

// Structural dissimilarity (1 - SSIM) / 2 with the standard 11x11 Gaussian
// window (sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1), averaged over window
// positions that fit entirely inside the image.
double dssim(const Image& a, const Image& b);

inline constexpr double kPsnrCap = 99.0;

}  // namespace egs
