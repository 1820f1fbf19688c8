#pragma once

#include <string>

#include "pnp/core/image.hpp"

namespace pnp {

// File I/O for 8/16-bit PGM (grayscale) and PNG (grayscale or RGB).
// Export clamps to [0,1] and quantizes with round-half-to-even; import maps
// integer samples back to [0,1]. Format chosen from the file extension.

Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img, int bit_depth = 8);

// Masks are stored as 8-bit grayscale images (0 = missing, 255 = observed).
BinaryMask read_mask(const std::string& path);
void write_mask(const std::string& path, const BinaryMask& mask);

double quantize_unit(double v, int maxval);  // exposed for tests

}  // namespace pnp
