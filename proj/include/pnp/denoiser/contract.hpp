#pragma once

#include <memory>

#include "pnp/core/image.hpp"

namespace pnp {

// Gradient-step denoiser contract: the denoiser is D(x) = x - grad_g(x) for a
// smooth potential g whose gradient is L-Lipschitz with L < 1. Under that
// bound, h(x) = ||x||^2/2 - g(x) is (1-L)-strongly convex, D = grad h is
// injective, and D is the proximal operator of an explicitly computable
// (possibly nonconvex) function phi; see phi.hpp.
//
// Instances are immutable after construction and safe to share across
// threads. Channels are treated jointly as one flat vector.
class GradientStepDenoiser {
public:
  virtual ~GradientStepDenoiser() = default;

  virtual double sigma() const = 0;

  // Certified bound on the Lipschitz constant of grad_g; always < 1.
  virtual double lipschitz_bound() const = 0;

  // Declared lower bound of g (0 for the provided instances).
  virtual double lower_bound() const = 0;

  virtual double eval_g(const Image& x) const = 0;
  virtual Image grad_g(const Image& x) const = 0;

  // Hessian-vector product of g at x, when available in closed form.
  virtual bool has_analytic_hessian() const { return false; }
  virtual Image hessian_apply(const Image& x, const Image& v) const {
    (void)x;
    (void)v;
    throw UnsupportedOperation("no analytic Hessian for this denoiser");
  }

  // D(x) = x - grad_g(x)
  Image apply(const Image& x) const {
    Image out = x - grad_g(x);
    if (!out.all_finite()) throw NumericError("denoiser produced non-finite values");
    return out;
  }
};

inline Image apply_denoiser(const GradientStepDenoiser& d, const Image& x) {
  return d.apply(x);
}

// Relaxed denoiser alpha*D + (1-alpha)*Id = Id - alpha*grad_g. This is again
// a gradient-step denoiser, with potential alpha*g and bound alpha*L, so the
// whole phi machinery applies with L replaced by alpha*L.
class RelaxedGSDenoiser final : public GradientStepDenoiser {
public:
  RelaxedGSDenoiser(std::shared_ptr<const GradientStepDenoiser> base, double alpha)
      : base_(std::move(base)), alpha_(alpha) {
    if (!base_) throw ConfigError("relaxed denoiser needs a base instance");
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("relaxation alpha must lie in (0,1]");
    if (alpha * base_->lipschitz_bound() >= 1.0)
      throw ConfigError("relaxed Lipschitz bound must stay below 1");
  }

  double sigma() const override { return base_->sigma(); }
  double lipschitz_bound() const override { return alpha_ * base_->lipschitz_bound(); }
  double lower_bound() const override { return alpha_ * base_->lower_bound(); }
  double eval_g(const Image& x) const override { return alpha_ * base_->eval_g(x); }
  Image grad_g(const Image& x) const override { return alpha_ * base_->grad_g(x); }
  bool has_analytic_hessian() const override { return base_->has_analytic_hessian(); }
  Image hessian_apply(const Image& x, const Image& v) const override {
    return alpha_ * base_->hessian_apply(x, v);
  }

  double alpha() const { return alpha_; }
  const GradientStepDenoiser& base() const { return *base_; }

private:
  std::shared_ptr<const GradientStepDenoiser> base_;
  double alpha_;
};

inline RelaxedGSDenoiser relax(std::shared_ptr<const GradientStepDenoiser> base, double alpha) {
  return RelaxedGSDenoiser(std::move(base), alpha);
}

// One-shot relaxed application: alpha*D(x) + (1-alpha)*x.
inline Image apply_relaxed(const GradientStepDenoiser& d, double alpha, const Image& x) {
  if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("relaxation alpha must lie in (0,1]");
  return x - alpha * d.grad_g(x);
}

}  // namespace pnp
