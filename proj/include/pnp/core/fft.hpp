#pragma once

#include <Eigen/Core>
#include <complex>
#include <unsupported/Eigen/FFT>

#include "pnp/errors.hpp"

namespace pnp {

template <typename Scalar>
using PlaneT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using SpectrumT =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Plane = PlaneT<double>;
using Spectrum = SpectrumT<double>;

namespace detail {

// Row, then column 1-D transforms. Each call builds its own FFT object, so
// concurrent use needs no synchronization.
template <typename Scalar, bool Inverse>
SpectrumT<Scalar> fft2_impl(const SpectrumT<Scalar>& in) {
  using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
  const Eigen::Index rows = in.rows(), cols = in.cols();
  if (rows < 1 || cols < 1) throw DimensionError("fft2: empty plane");
  Eigen::FFT<Scalar> fft;
  SpectrumT<Scalar> out = in;
  CVec buf_in, buf_out;

  if (cols > 1) {  // a length-1 transform is the identity
    for (Eigen::Index i = 0; i < rows; ++i) {
      buf_in = in.row(i).transpose();
      if constexpr (Inverse)
        fft.inv(buf_out, buf_in);
      else
        fft.fwd(buf_out, buf_in);
      out.row(i) = buf_out.transpose();
    }
  }
  if (rows > 1) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      buf_in = out.col(j);
      if constexpr (Inverse)
        fft.inv(buf_out, buf_in);
      else
        fft.fwd(buf_out, buf_in);
      out.col(j) = buf_out;
    }
  }
  return out;
}

}  // namespace detail

// Unnormalized forward 2-D DFT.
template <typename Scalar>
SpectrumT<Scalar> fft2(const SpectrumT<Scalar>& plane) {
  return detail::fft2_impl<Scalar, false>(plane);
}

template <typename Scalar>
SpectrumT<Scalar> fft2(const PlaneT<Scalar>& plane) {
  return fft2(SpectrumT<Scalar>(plane.template cast<std::complex<Scalar>>()));
}

// Inverse 2-D DFT with 1/(H*W) scaling, so ifft2(fft2(x)) == x.
template <typename Scalar>
SpectrumT<Scalar> ifft2(const SpectrumT<Scalar>& spectrum) {
  return detail::fft2_impl<Scalar, true>(spectrum);
}

// Inverse transform of a spectrum known to come from real data.
template <typename Scalar>
PlaneT<Scalar> ifft2_real(const SpectrumT<Scalar>& spectrum) {
  return ifft2(spectrum).real();
}

}  // namespace pnp
