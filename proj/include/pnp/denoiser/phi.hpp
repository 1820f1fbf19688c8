#pragma once

#include <cmath>

#include "pnp/denoiser/contract.hpp"

namespace pnp {

struct InversionResult {
  Image preimage;
  double residual = 0;  // ||D(u) - y|| at exit
  int iterations = 0;
  bool converged = false;
};

inline constexpr double kInvertTol = 1e-10;
inline constexpr int kInvertMaxIter = 10000;

// Solve D(u) = y for u by the fixed-point iteration u <- y + grad_g(u),
// a contraction with rate L < 1 (it is gradient descent with unit step on the
// (1-L)-strongly convex map u -> h(u) - <y,u>). Success within the budget is
// the practical evidence that y lies in Im(D); failure is surfaced with the
// residual, never silently mapped to +inf.
inline InversionResult try_invert_denoiser(const GradientStepDenoiser& d, const Image& y,
                                           double tol = kInvertTol,
                                           int max_iter = kInvertMaxIter) {
  InversionResult r;
  r.preimage = y;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const Image residual_vec = d.apply(r.preimage) - y;  // D(u) - y
    r.residual = residual_vec.norm();
    if (!std::isfinite(r.residual)) return r;
    if (r.residual <= tol) {
      r.converged = true;
      return r;
    }
    r.preimage -= residual_vec;  // u <- u - (D(u) - y) = y + grad_g(u)
  }
  r.residual = (d.apply(r.preimage) - y).norm();
  r.converged = r.residual <= tol;
  return r;
}

inline Image invert_denoiser(const GradientStepDenoiser& d, const Image& y,
                             double tol = kInvertTol, int max_iter = kInvertMaxIter) {
  InversionResult r = try_invert_denoiser(d, y, tol, max_iter);
  if (!r.converged)
    throw ConvergenceError("denoiser inversion did not reach tolerance", r.residual);
  return std::move(r.preimage);
}

// phi at a point whose preimage under D is already known (u with D(u) = x):
//   phi(x) = g(u) - 1/2 ||u - x||^2.
// Solvers use this inversion-free form, since every point where phi is needed
// during iteration was just produced by D.
inline double phi_from_preimage(const GradientStepDenoiser& d, const Image& preimage,
                                const Image& x) {
  return d.eval_g(preimage) - 0.5 * (preimage - x).squared_norm();
}

// phi(x) for x in Im(D), via inversion. Satisfies phi(x) >= g(x), with
// equality at fixed points of D.
inline double eval_phi(const GradientStepDenoiser& d, const Image& x, double tol = kInvertTol,
                       int max_iter = kInvertMaxIter) {
  return phi_from_preimage(d, invert_denoiser(d, x, tol, max_iter), x);
}

// grad phi(x) = D^{-1}(x) - x = grad_g(D^{-1}(x)).
inline Image grad_phi(const GradientStepDenoiser& d, const Image& x, double tol = kInvertTol,
                      int max_iter = kInvertMaxIter) {
  return invert_denoiser(d, x, tol, max_iter) - x;
}

}  // namespace pnp
