#pragma once

#include <algorithm>
#include <cmath>
#include <memory>

#include "pnp/denoiser/contract.hpp"

namespace pnp {

// Coercivity penalty p(x) = rho(||x-a||^2 - r) with rho(t) = t^3 for t > 0
// and 0 otherwise, centered at a = (1/2,...,1/2) with r = sqrt(n). The cubic
// junction makes p twice continuously differentiable; p vanishes wherever
// ||x-a||^2 <= r, which covers the nominal [0,1]^n iterate range.
struct CoercivityPenalty {
  double gamma = 0.0;

  explicit CoercivityPenalty(double strength) : gamma(strength) {
    if (strength < 0) throw ConfigError("penalty strength must be nonnegative");
  }

  static double excess(const Image& x) {  // ||x-a||^2 - r
    const double n = double(x.size());
    return (x.array() - 0.5).square().sum() - std::sqrt(n);
  }

  double eval(const Image& x) const {
    const double t = excess(x);
    return t > 0 ? gamma * t * t * t : 0.0;
  }

  Image grad(const Image& x) const {
    const double t = std::max(0.0, excess(x));
    Image out = like(x);
    out.array() = (6.0 * gamma * t * t) * (x.array() - 0.5);
    return out;
  }

  // sup ||grad^2 (gamma p)|| over the ball ||x-a|| <= radius.
  // grad^2 p = 6 t^2 I + 24 t (x-a)(x-a)^T for t = ||x-a||^2 - r > 0.
  double curvature_bound(double radius, Eigen::Index n) const {
    const double t = std::max(0.0, radius * radius - std::sqrt(double(n)));
    return gamma * (6.0 * t * t + 24.0 * t * radius * radius);
  }
};

inline double eval_penalty(const CoercivityPenalty& p, const Image& x) { return p.eval(x); }
inline Image grad_penalty(const CoercivityPenalty& p, const Image& x) { return p.grad(x); }

// Denoiser with potential g + gamma * p. The certified bound is re-derived by
// adding the penalty curvature over a declared operating radius and must stay
// below 1. With the default radius the penalty is inactive on the nominal
// range and D coincides with the base denoiser there.
class PenalizedGSDenoiser final : public GradientStepDenoiser {
public:
  PenalizedGSDenoiser(std::shared_ptr<const GradientStepDenoiser> base, double gamma,
                      double operating_radius, Eigen::Index n)
      : base_(std::move(base)), penalty_(gamma), radius_(operating_radius) {
    if (!base_) throw ConfigError("penalized denoiser needs a base instance");
    if (!(operating_radius > 0)) throw ConfigError("operating radius must be positive");
    lipschitz_ = base_->lipschitz_bound() + penalty_.curvature_bound(operating_radius, n);
    if (lipschitz_ >= 1.0)
      throw ConfigError("penalized Lipschitz bound reaches 1; reduce gamma or the radius");
  }

  double sigma() const override { return base_->sigma(); }
  double lipschitz_bound() const override { return lipschitz_; }
  double lower_bound() const override { return base_->lower_bound(); }
  double eval_g(const Image& x) const override { return base_->eval_g(x) + penalty_.eval(x); }
  Image grad_g(const Image& x) const override { return base_->grad_g(x) + penalty_.grad(x); }

  const CoercivityPenalty& penalty() const { return penalty_; }

private:
  std::shared_ptr<const GradientStepDenoiser> base_;
  CoercivityPenalty penalty_;
  double radius_;
  double lipschitz_ = 0;
};

}  // namespace pnp
