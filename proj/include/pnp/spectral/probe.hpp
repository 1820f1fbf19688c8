#pragma once

#include <functional>
#include <utility>

#include "pnp/denoiser/contract.hpp"

namespace pnp {

// Matrix-free view of the residual Jacobian J_(Id-D) = grad^2 g at a point.
// Linear denoisers expose it exactly; otherwise a central finite difference
// of grad_g gives a second-order-accurate Jacobian-vector product.
struct JacobianProbe {
  Eigen::Index height = 0, width = 0, channels = 1;
  std::function<Image(const Image&)> apply;

  Image operator()(const Image& v) const { return apply(v); }
};

inline JacobianProbe analytic_probe(const GradientStepDenoiser& d, Image at) {
  if (!d.has_analytic_hessian())
    throw UnsupportedOperation("denoiser exposes no analytic Hessian; use finite differences");
  JacobianProbe p;
  p.height = at.height();
  p.width = at.width();
  p.channels = at.channels();
  p.apply = [&d, at = std::move(at)](const Image& v) { return d.hessian_apply(at, v); };
  return p;
}

inline JacobianProbe finite_difference_probe(const GradientStepDenoiser& d, Image at,
                                             double step = 1e-4) {
  if (!(step > 0)) throw ConfigError("finite-difference step must be positive");
  JacobianProbe p;
  p.height = at.height();
  p.width = at.width();
  p.channels = at.channels();
  p.apply = [&d, at = std::move(at), step](const Image& v) {
    return (1.0 / (2.0 * step)) * (d.grad_g(at + step * v) - d.grad_g(at - step * v));
  };
  return p;
}

inline JacobianProbe custom_probe(Eigen::Index h, Eigen::Index w, Eigen::Index c,
                                  std::function<Image(const Image&)> fn) {
  return JacobianProbe{h, w, c, std::move(fn)};
}

}  // namespace pnp
