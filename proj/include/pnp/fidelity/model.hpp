#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "pnp/core/conv.hpp"
#include "pnp/core/image.hpp"

namespace pnp {

enum class DegradationKind { Blur, Downsample, Mask };

// s-fold decimation anchored at pixel (0,0) and its adjoint (zero-filling).
inline Image decimate(const Image& big, int scale) {
  if (scale < 1 || big.height() % scale || big.width() % scale)
    throw DimensionError("image dimensions must be divisible by the scale");
  Image out(big.height() / scale, big.width() / scale, big.channels());
  for (Eigen::Index c = 0; c < big.channels(); ++c)
    for (Eigen::Index i = 0; i < out.height(); ++i)
      for (Eigen::Index j = 0; j < out.width(); ++j) out(i, j, c) = big(i * scale, j * scale, c);
  return out;
}

inline Image zero_fill_upsample(const Image& low, int scale) {
  Image out(low.height() * scale, low.width() * scale, low.channels());
  for (Eigen::Index c = 0; c < low.channels(); ++c)
    for (Eigen::Index i = 0; i < low.height(); ++i)
      for (Eigen::Index j = 0; j < low.width(); ++j) out(i * scale, j * scale, c) = low(i, j, c);
  return out;
}

// Observed pixels keep their values, unobserved ones drop to zero.
inline Image apply_mask_operator(const Image& x, const BinaryMask& mask) {
  if (mask.height != x.height() || mask.width != x.width())
    throw DimensionError("mask and image shapes differ");
  Image out = x;
  for (Eigen::Index c = 0; c < x.channels(); ++c)
    for (Eigen::Index i = 0; i < x.height(); ++i)
      for (Eigen::Index j = 0; j < x.width(); ++j)
        if (!mask.observed(i, j)) out(i, j, c) = 0.0;
  return out;
}

// Data-fidelity term f for the linear observation model y = A x + noise:
//
//   Blur        A = H (circular convolution),   f(x) = ||Hx-y||^2 / (2 nu^2)
//   Downsample  A = S H (blur then s-fold decimation anchored at (0,0))
//   Mask        f = indicator of {x : x agrees with y on observed pixels}
//
// Quadratic variants expose gradient, exact Lipschitz constant and an exact
// FFT proximal map; the mask variant exposes only the projection prox and a
// 0/+inf objective so that DR envelopes stay computable along the iteration
// (the prox output always satisfies the constraint, hence f = 0 there).
class DegradationModel {
public:
  static DegradationModel blur(ConvKernel kernel, Image y, double nu) {
    if (nu <= 0) throw ConfigError("noise level must be positive for quadratic variants");
    if (!kernel.fits(y.height(), y.width())) throw DimensionError("kernel larger than image");
    DegradationModel m;
    m.kind_ = DegradationKind::Blur;
    m.kernel_ = std::move(kernel);
    m.y_ = std::move(y);
    m.nu_ = nu;
    return m;
  }

  static DegradationModel downsample(ConvKernel kernel, int scale, Image y_low, double nu) {
    if (nu <= 0) throw ConfigError("noise level must be positive for quadratic variants");
    if (scale < 2) throw ConfigError("downsampling scale must be at least 2");
    DegradationModel m;
    m.kind_ = DegradationKind::Downsample;
    m.kernel_ = std::move(kernel);
    m.scale_ = scale;
    m.y_ = std::move(y_low);
    m.nu_ = nu;
    if (!m.kernel_.fits(m.high_height(), m.high_width()))
      throw DimensionError("kernel larger than the high-resolution grid");
    return m;
  }

  static DegradationModel mask(BinaryMask mask, Image y, double nu = 0.0) {
    if (nu < 0) throw ConfigError("noise level must be nonnegative");
    if (mask.height != y.height() || mask.width != y.width())
      throw DimensionError("mask and observation shapes differ");
    DegradationModel m;
    m.kind_ = DegradationKind::Mask;
    m.mask_ = std::move(mask);
    m.y_ = std::move(y);
    m.nu_ = nu;
    return m;
  }

  DegradationKind kind() const { return kind_; }
  const Image& observation() const { return y_; }
  double nu() const { return nu_; }
  int scale() const { return scale_; }
  const ConvKernel& kernel() const { return kernel_; }
  const BinaryMask& mask() const { return mask_; }
  bool differentiable() const { return kind_ != DegradationKind::Mask; }

  // Reconstruction-grid dimensions (the domain of x).
  Eigen::Index high_height() const {
    return kind_ == DegradationKind::Downsample ? y_.height() * scale_ : y_.height();
  }
  Eigen::Index high_width() const {
    return kind_ == DegradationKind::Downsample ? y_.width() * scale_ : y_.width();
  }

  Image apply(const Image& x) const {
    check_domain(x);
    switch (kind_) {
      case DegradationKind::Blur:
        return conv_circular(x, kernel_);
      case DegradationKind::Downsample:
        return decimate(conv_circular(x, kernel_), scale_);
      case DegradationKind::Mask:
        return apply_mask_operator(x, mask_);
    }
    throw ConfigError("bad degradation kind");
  }

  Image apply_adjoint(const Image& r) const {
    switch (kind_) {
      case DegradationKind::Blur:
        return conv_circular_adjoint(r, kernel_);
      case DegradationKind::Downsample:
        return conv_circular_adjoint(zero_fill_upsample(r, scale_), kernel_);
      case DegradationKind::Mask:
        return apply_mask_operator(r, mask_);
    }
    throw ConfigError("bad degradation kind");
  }

  double eval_f(const Image& x) const {
    check_domain(x);
    if (kind_ == DegradationKind::Mask) {
      for (Eigen::Index c = 0; c < x.channels(); ++c)
        for (Eigen::Index i = 0; i < x.height(); ++i)
          for (Eigen::Index j = 0; j < x.width(); ++j)
            if (mask_.observed(i, j) && x(i, j, c) != y_(i, j, c))
              return std::numeric_limits<double>::infinity();
      return 0.0;
    }
    return (apply(x) - y_).squared_norm() / (2.0 * nu_ * nu_);
  }

  // A^T (A x - y) / nu^2
  Image grad_f(const Image& x) const {
    if (!differentiable())
      throw UnsupportedOperation("gradient undefined for the indicator data term");
    check_domain(x);
    return (1.0 / (nu_ * nu_)) * apply_adjoint(apply(x) - y_);
  }

  // Exact ||A^T A||_S / nu^2 via the operator symbol.
  double lipschitz_f() const {
    if (!differentiable())
      throw UnsupportedOperation("Lipschitz constant undefined for the indicator data term");
    const Eigen::Index h = high_height(), w = high_width();
    const Eigen::ArrayXXd power = kernel_symbol(kernel_, h, w).abs2();
    if (kind_ == DegradationKind::Blur) return power.maxCoeff() / (nu_ * nu_);
    // Downsample: ||A^T A|| = max over aliasing classes of (1/s^2) sum |h_j|^2.
    const Eigen::Index hc = h / scale_, wc = w / scale_;
    double best = 0;
    for (Eigen::Index p = 0; p < hc; ++p)
      for (Eigen::Index q = 0; q < wc; ++q) {
        double acc = 0;
        for (int a = 0; a < scale_; ++a)
          for (int b = 0; b < scale_; ++b) acc += power(p + a * hc, q + b * wc);
        best = std::max(best, acc / double(scale_ * scale_));
      }
    return best / (nu_ * nu_);
  }

  // Exact minimizer of tau_lambda * f(z) + 1/2 ||z - x||^2.
  Image prox_f(double tau_lambda, const Image& x) const {
    check_domain(x);
    if (!x.all_finite()) throw NumericError("prox_f: non-finite input");
    switch (kind_) {
      case DegradationKind::Mask: {
        Image out = x;  // projection: copy observed pixels of y
        for (Eigen::Index c = 0; c < out.channels(); ++c)
          for (Eigen::Index i = 0; i < out.height(); ++i)
            for (Eigen::Index j = 0; j < out.width(); ++j)
              if (mask_.observed(i, j)) out(i, j, c) = y_(i, j, c);
        return out;
      }
      case DegradationKind::Blur:
        if (!(tau_lambda > 0)) throw ConfigError("prox weight must be positive");
        return prox_blur(tau_lambda, x);
      case DegradationKind::Downsample:
        if (!(tau_lambda > 0)) throw ConfigError("prox weight must be positive");
        return prox_downsample(tau_lambda, x);
    }
    throw ConfigError("bad degradation kind");
  }

private:
  DegradationModel() = default;

  void check_domain(const Image& x) const {
    if (x.height() != high_height() || x.width() != high_width() ||
        x.channels() != y_.channels())
      throw DimensionError("image shape incompatible with degradation model");
  }

  // Per-frequency solve of (rho H^T H + I) z = rho H^T y + x, rho = tau_lambda/nu^2.
  Image prox_blur(double tau_lambda, const Image& x) const {
    const double rho = tau_lambda / (nu_ * nu_);
    const Spectrum sym = kernel_symbol(kernel_, x.height(), x.width());
    const Eigen::ArrayXXd denom = 1.0 + rho * sym.abs2();
    Image out = like(x);
    for (Eigen::Index c = 0; c < x.channels(); ++c) {
      const Spectrum xh = fft2(Plane(x.plane(c)));
      const Spectrum yh = fft2(Plane(y_.plane(c)));
      const Spectrum num = rho * sym.conjugate() * yh + xh;
      out.plane(c) = ifft2_real<double>(Spectrum(num / denom.cast<std::complex<double>>()));
    }
    return out;
  }

  // Woodbury solve of (rho H^T S^T S H + I) z = b: within each aliasing class
  // of s^2 frequencies the system is a rank-one update of the identity, so a
  // single folded inversion per class gives the exact minimizer.
  Image prox_downsample(double tau_lambda, const Image& x) const {
    const double rho = tau_lambda / (nu_ * nu_);
    const Eigen::Index h = high_height(), w = high_width();
    const Spectrum sym = kernel_symbol(kernel_, h, w);
    const Eigen::Index hc = h / scale_, wc = w / scale_;
    const double s2 = double(scale_ * scale_);
    Image out = like(x);
    Image b = rho * apply_adjoint(y_) + x;
    for (Eigen::Index c = 0; c < x.channels(); ++c) {
      const Spectrum bh = fft2(Plane(b.plane(c)));
      Spectrum zh = bh;
      for (Eigen::Index p = 0; p < hc; ++p)
        for (Eigen::Index q = 0; q < wc; ++q) {
          std::complex<double> t(0, 0);
          double power = 0;
          for (int a = 0; a < scale_; ++a)
            for (int bb = 0; bb < scale_; ++bb) {
              const std::complex<double> hj = sym(p + a * hc, q + bb * wc);
              t += hj * bh(p + a * hc, q + bb * wc);
              power += std::norm(hj);
            }
          t /= 1.0 + rho / s2 * power;
          for (int a = 0; a < scale_; ++a)
            for (int bb = 0; bb < scale_; ++bb) {
              const Eigen::Index i = p + a * hc, j = q + bb * wc;
              zh(i, j) = bh(i, j) - rho / s2 * std::conj(sym(i, j)) * t;
            }
        }
      out.plane(c) = ifft2_real<double>(zh);
    }
    return out;
  }

  DegradationKind kind_ = DegradationKind::Blur;
  ConvKernel kernel_;
  BinaryMask mask_;
  Image y_;
  double nu_ = 1.0;
  int scale_ = 1;
};

inline double eval_f(const DegradationModel& m, const Image& x) { return m.eval_f(x); }
inline Image grad_f(const DegradationModel& m, const Image& x) { return m.grad_f(x); }
inline double lipschitz_f(const DegradationModel& m) { return m.lipschitz_f(); }
inline Image prox_f(const DegradationModel& m, double tau_lambda, const Image& x) {
  return m.prox_f(tau_lambda, x);
}

}  // namespace pnp
