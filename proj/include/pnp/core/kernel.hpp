#pragma once

#include <Eigen/Core>
#include <cmath>

#include "pnp/errors.hpp"

namespace pnp {

// Square convolution kernel with odd side length, anchored at its center tap.
// Blur kernels are normalized to unit sum; denoiser filters may carry
// arbitrary taps (including all-zero).
template <typename Scalar>
class KernelT {
public:
  using TapArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  KernelT() : taps_(TapArray::Constant(1, 1, Scalar(1))) {}

  explicit KernelT(TapArray taps) : taps_(std::move(taps)) {
    if (taps_.rows() != taps_.cols()) throw ConfigError("kernel must be square");
    if (taps_.rows() % 2 == 0) throw ConfigError("kernel size must be odd");
  }

  Eigen::Index size() const { return taps_.rows(); }
  Eigen::Index center() const { return taps_.rows() / 2; }
  const TapArray& taps() const { return taps_; }
  Scalar sum() const { return taps_.sum(); }

  // Rescale to unit sum. Errors on (near-)zero total mass.
  KernelT normalized() const {
    const Scalar s = sum();
    if (std::abs(double(s)) < 1e-14) throw ConfigError("cannot normalize zero-sum kernel");
    return KernelT(TapArray(taps_ / s));
  }

  bool fits(Eigen::Index height, Eigen::Index width) const {
    return size() <= height && size() <= width;
  }

private:
  TapArray taps_;
};

using ConvKernel = KernelT<double>;

template <typename Scalar = double>
KernelT<Scalar> delta_kernel() {
  typename KernelT<Scalar>::TapArray t(1, 1);
  t(0, 0) = Scalar(1);
  return KernelT<Scalar>(std::move(t));
}

// k x k kernel with all taps 1/k^2. uniform_kernel(1) is the delta kernel.
template <typename Scalar = double>
KernelT<Scalar> uniform_kernel(Eigen::Index size) {
  if (size <= 0 || size % 2 == 0) throw ConfigError("uniform kernel size must be odd positive");
  typename KernelT<Scalar>::TapArray t =
      KernelT<Scalar>::TapArray::Constant(size, size, Scalar(1) / Scalar(size * size));
  return KernelT<Scalar>(std::move(t));
}

// Isotropic Gaussian truncated to the declared support, then renormalized.
template <typename Scalar = double>
KernelT<Scalar> gaussian_kernel(double stddev, Eigen::Index size = 25) {
  if (stddev <= 0) throw ConfigError("gaussian kernel stddev must be positive");
  if (size <= 0 || size % 2 == 0) throw ConfigError("gaussian kernel size must be odd positive");
  typename KernelT<Scalar>::TapArray t(size, size);
  const Eigen::Index c = size / 2;
  for (Eigen::Index a = 0; a < size; ++a)
    for (Eigen::Index b = 0; b < size; ++b) {
      const double r2 = double((a - c) * (a - c) + (b - c) * (b - c));
      t(a, b) = Scalar(std::exp(-r2 / (2.0 * stddev * stddev)));
    }
  return KernelT<Scalar>(std::move(t)).normalized();
}

}  // namespace pnp
