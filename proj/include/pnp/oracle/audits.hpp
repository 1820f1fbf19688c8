#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pnp/denoiser/phi.hpp"
#include "pnp/solver/pnp.hpp"

namespace pnp {
namespace oracle {

// Max relative error between grad_fn and central finite differences of fn
// over the given points. Tolerances compose: expect ~1e-9 for linear maps,
// ~1e-5 for smooth potentials, looser when an inversion sits inside grad_fn.
inline double finite_diff_check(const std::function<double(const Image&)>& fn,
                                const std::function<Image(const Image&)>& grad_fn,
                                const std::vector<Image>& points, double h = 1e-5) {
  if (!(h > 0)) throw ConfigError("finite-difference step must be positive");
  double worst = 0;
  for (const Image& x : points) {
    const Image g = grad_fn(x);
    Image fd = like(x);
    Image xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double orig = xp.array()[i];
      xp.array()[i] = orig + h;
      const double fplus = fn(xp);
      xp.array()[i] = orig - h;
      const double fminus = fn(xp);
      xp.array()[i] = orig;
      fd.array()[i] = (fplus - fminus) / (2.0 * h);
    }
    const double scale = std::max(1.0, g.norm());
    worst = std::max(worst, (fd - g).norm() / scale);
  }
  return worst;
}

// Least-squares slope of log(value) vs log(k) over the final decade of the
// run, i.e. k in [K/10, K]. A synthetic 1/k series gives slope -1.
inline double loglog_slope_final_decade(const std::vector<int>& ks,
                                        const std::vector<double>& values) {
  if (ks.size() != values.size()) throw DimensionError("slope: length mismatch");
  if (ks.empty()) throw ConfigError("slope: empty series");
  const int kmax = *std::max_element(ks.begin(), ks.end());
  const int kmin = std::max(1, kmax / 10);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < kmin || values[i] <= 0 || !std::isfinite(values[i])) continue;
    const double lx = std::log(double(ks[i])), ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw NumericError("slope: fewer than two usable points in the final decade");
  const double denom = double(n) * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) return 0.0;  // all points at the same k
  return (double(n) * sxy - sx * sy) / denom;
}

struct DescentReport {
  bool monotone = true;
  double worst_violation = 0;  // beyond the floating-point tolerance
  double slope = 0;
  bool slope_pass = false;
  int records_checked = 0;
  // sum of ||x_{k+1}-x_k|| over the run: circumstantial evidence of finite
  // iterate length (the KL-based convergence of iterates is not
  // runtime-checkable)
  double residual_norm_sum = 0;
  bool pass() const { return monotone && slope_pass; }
};

// Verifies the two runtime-checkable convergence guarantees on a finished
// trace: the monitored series (envelope when present, otherwise F) is
// nonincreasing within 1e-9*(1+|value|), and the running-min squared
// residual decays with log-log slope at most -0.9 over the final decade
// (-0.9 rather than -1 absorbs pre-asymptotic transients).
inline DescentReport descent_audit(const ConvergenceTrace& trace, double slope_threshold = -0.9) {
  DescentReport rep;
  double prev = kNaN;
  for (const auto& r : trace.records) {
    const double v = std::isnan(r.envelope) ? r.objective : r.envelope;
    if (std::isnan(v)) continue;
    ++rep.records_checked;
    if (!std::isnan(prev)) {
      const double tol = 1e-9 * (1.0 + std::abs(prev));
      if (v > prev + tol) {
        rep.monotone = false;
        rep.worst_violation = std::max(rep.worst_violation, v - prev - tol);
      }
    }
    prev = v;
  }
  std::vector<int> ks;
  std::vector<double> vals;
  for (const auto& r : trace.records)
    if (r.k >= 1 && !std::isnan(r.min_residual_sq)) {
      ks.push_back(r.k);
      vals.push_back(r.min_residual_sq);
      if (!std::isnan(r.residual_sq)) rep.residual_norm_sum += std::sqrt(r.residual_sq);
    }
  rep.slope = loglog_slope_final_decade(ks, vals);
  rep.slope_pass = rep.slope <= slope_threshold;
  return rep;
}

struct StationarityReport {
  double residual_norm = 0;   // ||lambda grad_f(x*) + grad_phi(x*)|| / (1 + ||x*||)
  double fixed_point_gap = 0; // ||T(x*) - x*||, T = D o (Id - lambda grad_f)
};

// First-order stationarity of F = lambda f + phi at a solver output. The two
// readouts agree through the identity grad_phi(D(v)) = v - D(v): a vanishing
// gradient sum is exactly a fixed point of the PnP operator.
inline StationarityReport stationarity_audit(const Image& x_star, const SolverConfig& cfg,
                                             const GradientStepDenoiser& base,
                                             const DegradationModel& m) {
  if (!m.differentiable())
    throw UnsupportedOperation("stationarity audit needs a differentiable data term");
  const auto dp = detail::effective_denoiser(cfg, base, x_star.size());
  const GradientStepDenoiser& d = *dp;
  StationarityReport rep;
  const Image grad_sum = cfg.lambda * m.grad_f(x_star) + grad_phi(d, x_star);
  rep.residual_norm = grad_sum.norm() / (1.0 + x_star.norm());
  rep.fixed_point_gap = (pgd_operator(d, m, cfg.lambda, x_star) - x_star).norm();
  return rep;
}

struct EquivalenceReport {
  double max_deviation = std::numeric_limits<double>::infinity();
  bool structural_ok = false;  // same retained length, nonempty
  bool pass = false;
};

// Per-iteration deviation between an ADMM run and a prox-first DRS run under
// the variable correspondence x = z + u. Both runs must retain snapshots.
inline EquivalenceReport equivalence_audit(const SolveResult& admm, const SolveResult& drs,
                                           double tol = 1e-9) {
  EquivalenceReport rep;
  const auto& a = admm.trace.snapshots;
  const auto& s = drs.trace.snapshots;
  if (a.y.empty() || a.u.size() != a.z.size() || a.y.size() != s.y.size() ||
      a.z.size() != s.z.size())
    return rep;
  rep.structural_ok = true;
  rep.max_deviation = 0;
  for (size_t k = 0; k < a.y.size(); ++k) {
    rep.max_deviation =
        std::max(rep.max_deviation, (a.y[k] - s.y[k]).array().abs().maxCoeff());
    rep.max_deviation =
        std::max(rep.max_deviation, (a.z[k] - s.z[k]).array().abs().maxCoeff());
    const Image mapped_x = a.z[k] + a.u[k];
    rep.max_deviation =
        std::max(rep.max_deviation, (mapped_x - s.x[k + 1]).array().abs().maxCoeff());
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

// The retained ADMM triples must satisfy the self-consistent scaled-dual
// recursion; this is the mathematical (rather than structural) half of the
// ADMM/DRS equivalence evidence.
inline double admm_recursion_residual(const SolveResult& admm, const SolverConfig& cfg,
                                      const GradientStepDenoiser& base,
                                      const DegradationModel& m) {
  const auto& s = admm.trace.snapshots;
  if (s.y.size() < 2 || s.u.size() != s.y.size() || s.z.size() != s.y.size())
    throw ConfigError("admm run did not retain snapshots");
  const auto dp = detail::effective_denoiser(cfg, base, s.y[0].size());
  const GradientStepDenoiser& d = *dp;
  double worst = 0;
  for (size_t k = 0; k + 1 < s.y.size(); ++k) {
    const Image y_next = m.prox_f(cfg.lambda, s.z[k] + s.u[k]);
    const Image u_next = s.u[k] + s.z[k] - y_next;
    const Image z_next = d.apply(y_next - u_next);
    worst = std::max(worst, (y_next - s.y[k + 1]).array().abs().maxCoeff());
    worst = std::max(worst, (u_next - s.u[k + 1]).array().abs().maxCoeff());
    worst = std::max(worst, (z_next - s.z[k + 1]).array().abs().maxCoeff());
  }
  return worst;
}

}  // namespace oracle
}  // namespace pnp
