#pragma once

#include <cmath>
#include <limits>

#include "pnp/core/image.hpp"

namespace pnp {

template <typename Scalar>
double mse(const ImageT<Scalar>& a, const ImageT<Scalar>& b) {
  if (!a.same_shape(b)) throw DimensionError("mse: image shape mismatch");
  return double((a.array() - b.array()).square().sum()) / double(a.size());
}

// 10*log10(peak^2 / MSE) with peak = 1. Identical images give +inf.
template <typename Scalar>
double psnr(const ImageT<Scalar>& a, const ImageT<Scalar>& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

}  // namespace pnp
