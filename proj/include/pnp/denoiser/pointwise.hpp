#pragma once

#include <cmath>

#include "pnp/denoiser/contract.hpp"

namespace pnp {

// Separable nonconvex potential applied per entry:
//
//   g(x) = sum_i psi(x_i),  psi(t) = L s^2 (1 - cos(t/s)).
//
// psi'' = L cos(t/s) is bounded by L in magnitude, so grad_g is exactly
// L-Lipschitz, and psi'' takes negative values, so g (hence phi) is genuinely
// nonconvex. D(0) = 0 since psi'(0) = 0.
class PointwiseGSDenoiser final : public GradientStepDenoiser {
public:
  PointwiseGSDenoiser(double amplitude, double scale, double sigma)
      : amplitude_(amplitude), scale_(scale), sigma_(sigma) {
    if (!(amplitude > 0.0) || amplitude >= 1.0)
      throw ConfigError("amplitude must lie in (0,1)");
    if (!(scale > 0.0)) throw ConfigError("scale must be positive");
    if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  }

  double sigma() const override { return sigma_; }
  double lipschitz_bound() const override { return amplitude_; }
  double lower_bound() const override { return 0.0; }

  double eval_g(const Image& x) const override {
    return (amplitude_ * scale_ * scale_) * (1.0 - (x.array() / scale_).cos()).sum();
  }

  Image grad_g(const Image& x) const override {
    Image out = like(x);
    out.array() = (amplitude_ * scale_) * (x.array() / scale_).sin();
    return out;
  }

  bool has_analytic_hessian() const override { return true; }
  Image hessian_apply(const Image& x, const Image& v) const override {
    if (!x.same_shape(v)) throw DimensionError("hessian_apply: shape mismatch");
    Image out = like(x);
    out.array() = amplitude_ * (x.array() / scale_).cos() * v.array();
    return out;
  }

  double amplitude() const { return amplitude_; }
  double scale() const { return scale_; }

private:
  double amplitude_;
  double scale_;
  double sigma_;
};

}  // namespace pnp
