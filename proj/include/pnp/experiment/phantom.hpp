#pragma once

#include <cmath>
#include <numbers>

#include "pnp/core/image.hpp"

namespace pnp {

// Deterministic test image mixing smooth and broadband content: gradient
// background, hard-edged disk and rectangle, thin lines and a fine checkered
// patch. `variant` shifts the geometry so a corpus of distinct images can be
// generated reproducibly.
inline Image make_phantom(Eigen::Index height, Eigen::Index width, Eigen::Index channels = 1,
                          int variant = 0) {
  Image img(height, width, channels);
  const double h = double(height), w = double(width);
  const double vx = 0.13 * double(variant % 5), vy = 0.17 * double(variant % 3);
  for (Eigen::Index c = 0; c < channels; ++c) {
    const double cshift = 0.08 * double(c);
    for (Eigen::Index i = 0; i < height; ++i)
      for (Eigen::Index j = 0; j < width; ++j) {
        const double u = double(i) / h, v = double(j) / w;
        double val = 0.2 + 0.25 * u + 0.1 * v + cshift;
        const double d1 = std::hypot(u - 0.32 - vx * 0.2, v - 0.32 - vy * 0.2);
        if (d1 < 0.16) val = 0.85 - cshift;
        if (u > 0.55 + vy * 0.1 && u < 0.85 && v > 0.45 && v < 0.85 + vx * 0.1)
          val = 0.15 + cshift;
        if (std::abs(v - 0.18 - 0.07 * vx) < 0.015) val = 0.92;  // vertical line
        if (std::abs(u - 0.74 + 0.05 * vy) < 0.012) val = 0.88;  // horizontal line
        if (u > 0.08 && u < 0.38 && v > 0.58 && v < 0.92)        // checkered patch
          val = ((i / 4 + j / 4 + variant) % 2) ? 0.72 : 0.28;
        val += 0.04 * std::sin(2.0 * std::numbers::pi * (2.0 * u + double(variant))) *
               std::cos(2.0 * std::numbers::pi * 3.0 * v);
        img(i, j, c) = std::clamp(val, 0.03, 0.97);
      }
  }
  return img;
}

inline std::vector<Image> make_phantom_corpus(int count, Eigen::Index height,
                                              Eigen::Index width, Eigen::Index channels = 1) {
  std::vector<Image> out;
  out.reserve(size_t(count));
  for (int i = 0; i < count; ++i) out.push_back(make_phantom(height, width, channels, i));
  return out;
}

// Nearest-neighbor upsampling (super-resolution initialization).
inline Image upsample_nearest(const Image& low, int scale) {
  Image out(low.height() * scale, low.width() * scale, low.channels());
  for (Eigen::Index c = 0; c < low.channels(); ++c)
    for (Eigen::Index i = 0; i < out.height(); ++i)
      for (Eigen::Index j = 0; j < out.width(); ++j)
        out(i, j, c) = low(i / scale, j / scale, c);
  return out;
}

}  // namespace pnp
