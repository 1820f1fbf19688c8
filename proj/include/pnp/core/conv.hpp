#pragma once

#include "pnp/core/fft.hpp"
#include "pnp/core/image.hpp"
#include "pnp/core/kernel.hpp"

namespace pnp {

// Kernel embedded on the H x W torus with its anchor at pixel (0,0).
// The DFT of this plane is the operator symbol of circular convolution.
template <typename Scalar>
PlaneT<Scalar> embed_kernel(const KernelT<Scalar>& k, Eigen::Index height, Eigen::Index width) {
  if (!k.fits(height, width)) throw DimensionError("kernel larger than image");
  PlaneT<Scalar> p = PlaneT<Scalar>::Zero(height, width);
  const Eigen::Index c = k.center();
  for (Eigen::Index a = 0; a < k.size(); ++a)
    for (Eigen::Index b = 0; b < k.size(); ++b) {
      const Eigen::Index i = ((a - c) % height + height) % height;
      const Eigen::Index j = ((b - c) % width + width) % width;
      p(i, j) += k.taps()(a, b);
    }
  return p;
}

template <typename Scalar>
SpectrumT<Scalar> kernel_symbol(const KernelT<Scalar>& k, Eigen::Index height,
                                Eigen::Index width) {
  return fft2(embed_kernel(k, height, width));
}

namespace detail {

template <typename Scalar>
ImageT<Scalar> conv_with_symbol(const ImageT<Scalar>& img, const SpectrumT<Scalar>& symbol) {
  ImageT<Scalar> out = like(img);
  for (Eigen::Index c = 0; c < img.channels(); ++c) {
    PlaneT<Scalar> plane = img.plane(c);
    out.plane(c) = ifft2_real<Scalar>(fft2(plane) * symbol);
  }
  return out;
}

}  // namespace detail

// Circular convolution, kernel anchored at its center. Linear in img.
template <typename Scalar>
ImageT<Scalar> conv_circular(const ImageT<Scalar>& img, const KernelT<Scalar>& k) {
  return detail::conv_with_symbol(img, kernel_symbol(k, img.height(), img.width()));
}

// Adjoint of conv_circular (correlation); symbol is the complex conjugate.
template <typename Scalar>
ImageT<Scalar> conv_circular_adjoint(const ImageT<Scalar>& img, const KernelT<Scalar>& k) {
  return detail::conv_with_symbol(img,
                                  SpectrumT<Scalar>(kernel_symbol(k, img.height(), img.width()).conjugate()));
}

template <typename Scalar>
ImageT<Scalar> circular_shift(const ImageT<Scalar>& img, Eigen::Index di, Eigen::Index dj) {
  ImageT<Scalar> out = like(img);
  const Eigen::Index h = img.height(), w = img.width();
  for (Eigen::Index c = 0; c < img.channels(); ++c)
    for (Eigen::Index i = 0; i < h; ++i)
      for (Eigen::Index j = 0; j < w; ++j)
        out(((i + di) % h + h) % h, ((j + dj) % w + w) % w, c) = img(i, j, c);
  return out;
}

}  // namespace pnp
