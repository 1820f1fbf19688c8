#pragma once

#include <chrono>
#include <cmath>
#include <memory>

#include "pnp/core/metrics.hpp"
#include "pnp/denoiser/penalty.hpp"
#include "pnp/denoiser/phi.hpp"
#include "pnp/fidelity/model.hpp"
#include "pnp/solver/config.hpp"
#include "pnp/solver/trace.hpp"
#include "pnp/solver/validate.hpp"

namespace pnp {

struct SolveOptions {
  const Image* ground_truth = nullptr;
  bool retain_snapshots = false;
};

struct SolveResult {
  Image x;  // final estimate (always a denoiser output, hence in Im(D))
  ConvergenceTrace trace;
};

// Relative-objective stopping rule: stop once
// |F_k - F_{k-1}| / (|F_{k-1}| + delta) < rel_tol, or k reaches max_iter.
inline bool stopping_rule(const ConvergenceTrace& t, double rel_tol, int max_iter) {
  constexpr double kGuard = 1e-12;
  if (t.iterations() >= max_iter) return true;
  if (t.records.size() < 2 || rel_tol <= 0) return false;
  const double fk = t.records[t.records.size() - 1].objective;
  const double fp = t.records[t.records.size() - 2].objective;
  if (std::isnan(fk) || std::isnan(fp)) return false;
  return std::abs(fk - fp) / (std::abs(fp) + kGuard) < rel_tol;
}

inline bool stopping_rule(const ConvergenceTrace& t, const SolverConfig& cfg) {
  return stopping_rule(t, cfg.rel_tol, cfg.max_iter);
}

// The PnP fixed-point operator T = D o (Id - lambda grad f).
inline Image pgd_operator(const GradientStepDenoiser& d, const DegradationModel& m,
                          double lambda, const Image& x) {
  return d.apply(x - lambda * m.grad_f(x));
}

// DR envelope of the prox-first scheme, evaluated from the state alone by
// re-running the two half-updates. phi at the denoiser output is available
// inversion-free because its preimage is the denoiser input.
inline double dr_envelope_diff(const GradientStepDenoiser& d, const DegradationModel& m,
                               double lambda, const Image& x) {
  const Image y = m.prox_f(lambda, x);
  const Image w = 2.0 * y - x;
  const Image z = d.apply(w);
  return phi_from_preimage(d, w, z) + lambda * m.eval_f(y) + dot(y - x, y - z) +
         0.5 * (y - z).squared_norm();
}

// DR envelope of the denoiser-first scheme (non-differentiable f allowed;
// f is evaluated at the prox output, where it is finite by construction).
inline double dr_envelope_inverted(const GradientStepDenoiser& d, const DegradationModel& m,
                                   double lambda, const Image& x) {
  const Image y = d.apply(x);
  const Image z = m.prox_f(lambda, 2.0 * y - x);
  return phi_from_preimage(d, x, y) + lambda * m.eval_f(z) + dot(y - x, y - z) +
         0.5 * (y - z).squared_norm();
}

namespace detail {

// Base denoiser composed with the configured penalty and relaxation. The
// returned pointer may alias `d` without owning it.
inline std::shared_ptr<const GradientStepDenoiser> effective_denoiser(
    const SolverConfig& cfg, const GradientStepDenoiser& d, Eigen::Index n) {
  std::shared_ptr<const GradientStepDenoiser> p(std::shared_ptr<void>(), &d);
  if (cfg.penalty_gamma > 0)
    p = std::make_shared<PenalizedGSDenoiser>(p, cfg.penalty_gamma, cfg.penalty_radius, n);
  if (cfg.alpha < 1.0) p = std::make_shared<RelaxedGSDenoiser>(p, cfg.alpha);
  return p;
}

inline void require_hypotheses(const SolverConfig& cfg, const GradientStepDenoiser& d,
                               const DegradationModel& m) {
  if (cfg.override_hypotheses) return;
  const HypothesisReport rep = validate(cfg, d, m);
  if (!rep.passed()) {
    std::string what = "convergence hypotheses failed:";
    for (const auto& it : rep.items)
      if (!it.assumed && !it.pass) what += " " + it.name;
    throw HypothesisError(what);
  }
}

struct RunClock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

inline double psnr_opt(const Image& est, const Image* gt) {
  return gt ? psnr(est, *gt) : kNaN;
}

// Objective at the initial point: one upfront inversion (the only place the
// solver ever inverts; every later phi value reuses a known preimage).
inline double initial_objective(const GradientStepDenoiser& d, const DegradationModel& m,
                                double lambda, const Image& x0) {
  const double fx = m.eval_f(x0);
  if (!std::isfinite(fx)) return kNaN;
  const InversionResult inv = try_invert_denoiser(d, x0);
  if (!inv.converged) return kNaN;
  return lambda * fx + phi_from_preimage(d, inv.preimage, x0);
}

inline void push_record(ConvergenceTrace& t, TraceRecord r, const RunClock& clock) {
  r.wall_clock = clock.seconds();
  if (!t.records.empty() && !std::isnan(t.records.back().min_residual_sq))
    r.min_residual_sq = std::isnan(r.residual_sq)
                            ? t.records.back().min_residual_sq
                            : std::min(r.residual_sq, t.records.back().min_residual_sq);
  else
    r.min_residual_sq = r.residual_sq;
  t.records.push_back(r);
}

}  // namespace detail

// PnP proximal gradient descent:
//   z_{k+1} = x_k - lambda grad_f(x_k),  x_{k+1} = D(z_{k+1}).
// Every iterate past x_0 lies in Im(D) with known preimage z, so the
// objective F(x_k) = lambda f(x_k) + g(z_k) - ||z_k - x_k||^2/2 is exact and
// inversion-free.
inline SolveResult pnp_pgd(const SolverConfig& cfg, const GradientStepDenoiser& base,
                           const DegradationModel& m, const Image& x0,
                           const SolveOptions& opts = {}) {
  if (!m.differentiable())
    throw UnsupportedOperation("pnp_pgd needs a differentiable data term");
  if (!x0.all_finite()) throw NumericError("pnp_pgd: non-finite initial point");
  detail::require_hypotheses(cfg, base, m);
  const auto dp = detail::effective_denoiser(cfg, base, x0.size());
  const GradientStepDenoiser& d = *dp;
  const detail::RunClock clock;

  ConvergenceTrace trace;
  trace.algorithm = algorithm_name(Algorithm::PGD);
  Image x = x0;
  detail::push_record(trace,
                      {0, detail::initial_objective(d, m, cfg.lambda, x0), kNaN, kNaN, kNaN,
                       kNaN, detail::psnr_opt(x0, opts.ground_truth), 0},
                      clock);
  if (opts.retain_snapshots) trace.snapshots.x.push_back(x);

  trace.stop_reason = "max-iter";
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Image z, xn;
    try {
      z = x - cfg.lambda * m.grad_f(x);
      xn = d.apply(z);
    } catch (const NumericError&) {
      trace.stop_reason = "numeric-abort";
      break;
    }
    if (!xn.all_finite()) {
      trace.stop_reason = "numeric-abort";
      break;
    }
    const double objective = cfg.lambda * m.eval_f(xn) + phi_from_preimage(d, z, xn);
    detail::push_record(trace,
                        {k, objective, kNaN, (xn - x).squared_norm(), kNaN, kNaN,
                         detail::psnr_opt(xn, opts.ground_truth), 0},
                        clock);
    x = std::move(xn);
    if (opts.retain_snapshots) trace.snapshots.x.push_back(x);
    if (!std::isfinite(objective)) {
      trace.stop_reason = "numeric-abort";
      break;
    }
    if (stopping_rule(trace, cfg)) {
      trace.stop_reason = k >= cfg.max_iter ? "max-iter" : "converged";
      break;
    }
  }
  trace.elapsed_seconds = clock.seconds();
  return {std::move(x), std::move(trace)};
}

namespace detail {

enum class DrsOrder { ProxFirst, DenoiserFirst };

// Shared Douglas-Rachford core. ProxFirst is the differentiable-f scheme;
// DenoiserFirst inverts the two half-steps and accepts any proper lsc f.
// ADMM runs the ProxFirst core and additionally exposes its iterates under
// the ADMM naming through the dual u_k = x_k - z_k (see pnp_admm).
inline SolveResult run_drs(const SolverConfig& cfg, const GradientStepDenoiser& base,
                           const DegradationModel& m, const Image& x0, const SolveOptions& opts,
                           DrsOrder order, bool admm_adapter) {
  if (!x0.all_finite()) throw NumericError("drs: non-finite initial point");
  require_hypotheses(cfg, base, m);
  const auto dp = effective_denoiser(cfg, base, x0.size());
  const GradientStepDenoiser& d = *dp;
  const RunClock clock;

  ConvergenceTrace trace;
  trace.algorithm =
      algorithm_name(admm_adapter ? Algorithm::ADMM
                                  : (order == DrsOrder::ProxFirst ? Algorithm::DRSdiff
                                                                  : Algorithm::DRS));
  Image x = x0;
  push_record(trace,
              {0, initial_objective(d, m, cfg.lambda, x0), kNaN, kNaN, kNaN, kNaN,
               psnr_opt(x0, opts.ground_truth), 0},
              clock);
  if (opts.retain_snapshots) trace.snapshots.x.push_back(x);

  Image estimate = x0;
  trace.stop_reason = "max-iter";
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Image y, z;
    double phi_val = 0, f_env = 0, objective = 0;
    try {
      if (order == DrsOrder::ProxFirst) {
        y = m.prox_f(cfg.lambda, x);
        const Image w = 2.0 * y - x;
        z = d.apply(w);
        phi_val = phi_from_preimage(d, w, z);  // preimage of z is w
        f_env = m.eval_f(y);
        objective = cfg.lambda * m.eval_f(z) + phi_val;  // F at the denoiser output
        estimate = z;
      } else {
        y = d.apply(x);
        z = m.prox_f(cfg.lambda, 2.0 * y - x);
        phi_val = phi_from_preimage(d, x, y);  // preimage of y is x
        // f at the prox output, where it is finite even for the indicator
        f_env = m.eval_f(z);
        objective = cfg.lambda * f_env + phi_val;
        estimate = y;
      }
    } catch (const NumericError&) {
      trace.stop_reason = "numeric-abort";
      break;
    }
    const Image gap = y - z;
    const double gap_sq = gap.squared_norm();
    const double envelope =
        phi_val + cfg.lambda * f_env + dot(y - x, gap) + 0.5 * gap_sq;
    x += (z - y);
    if (!x.all_finite()) {
      trace.stop_reason = "numeric-abort";
      break;
    }
    push_record(trace,
                {k, objective, envelope, gap_sq, kNaN, gap_sq,
                 psnr_opt(estimate, opts.ground_truth), 0},
                clock);
    if (opts.retain_snapshots) {
      trace.snapshots.x.push_back(x);
      trace.snapshots.y.push_back(y);
      trace.snapshots.z.push_back(z);
      if (admm_adapter) trace.snapshots.u.push_back(x - z);
    }
    if (!std::isfinite(objective) || !std::isfinite(envelope)) {
      trace.stop_reason = "numeric-abort";
      break;
    }
    if (stopping_rule(trace, cfg)) {
      trace.stop_reason = k >= cfg.max_iter ? "max-iter" : "converged";
      break;
    }
  }
  trace.elapsed_seconds = clock.seconds();
  return {std::move(estimate), std::move(trace)};
}

}  // namespace detail

// Prox-first DRS (differentiable f, lambda * L_f < 1):
//   y_{k+1} = prox_{lambda f}(x_k)
//   z_{k+1} = D(2 y_{k+1} - x_k)
//   x_{k+1} = x_k + (z_{k+1} - y_{k+1})
inline SolveResult pnp_drs_diff(const SolverConfig& cfg, const GradientStepDenoiser& d,
                                const DegradationModel& m, const Image& x0,
                                const SolveOptions& opts = {}) {
  if (!m.differentiable())
    throw UnsupportedOperation("pnp_drs_diff needs a differentiable data term");
  return detail::run_drs(cfg, d, m, x0, opts, detail::DrsOrder::ProxFirst, false);
}

// Denoiser-first DRS (any proper lsc f, unconstrained lambda, needs
// alpha * L < 1/2):
//   y_{k+1} = D(x_k)
//   z_{k+1} = prox_{lambda f}(2 y_{k+1} - x_k)
//   x_{k+1} = x_k + (z_{k+1} - y_{k+1})
inline SolveResult pnp_drs(const SolverConfig& cfg, const GradientStepDenoiser& d,
                           const DegradationModel& m, const Image& x0,
                           const SolveOptions& opts = {}) {
  return detail::run_drs(cfg, d, m, x0, opts, detail::DrsOrder::DenoiserFirst, false);
}

// PnP-ADMM with unit stepsize. The iterate sequence is, variable renaming
// aside, the prox-first DRS sequence: with the scaled dual u_k = x_k - z_k,
// the retained (y, z, u) triples satisfy the self-consistent ADMM recursion
//   y_{k+1} = prox_{lambda f}(z_k + u_k)
//   u_{k+1} = u_k + z_k - y_{k+1}
//   z_{k+1} = D(y_{k+1} - u_{k+1}),
// which is what the equivalence audit verifies numerically.
inline SolveResult pnp_admm(const SolverConfig& cfg, const GradientStepDenoiser& d,
                            const DegradationModel& m, const Image& x0,
                            const SolveOptions& opts = {}) {
  if (!m.differentiable())
    throw UnsupportedOperation("pnp_admm needs a differentiable data term");
  return detail::run_drs(cfg, d, m, x0, opts, detail::DrsOrder::ProxFirst, true);
}

inline SolveResult run_solver(const SolverConfig& cfg, const GradientStepDenoiser& d,
                              const DegradationModel& m, const Image& x0,
                              const SolveOptions& opts = {}) {
  switch (cfg.algorithm) {
    case Algorithm::PGD: return pnp_pgd(cfg, d, m, x0, opts);
    case Algorithm::DRSdiff: return pnp_drs_diff(cfg, d, m, x0, opts);
    case Algorithm::DRS: return pnp_drs(cfg, d, m, x0, opts);
    case Algorithm::ADMM: return pnp_admm(cfg, d, m, x0, opts);
  }
  throw ConfigError("bad algorithm");
}

}  // namespace pnp
