#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pnp/denoiser/contract.hpp"
#include "pnp/denoiser/penalty.hpp"
#include "pnp/fidelity/model.hpp"
#include "pnp/solver/config.hpp"

namespace pnp {

struct HypothesisItem {
  std::string name;
  std::string requirement;
  double computed = kNaN;  // NaN when not a numeric check
  bool pass = true;
  bool assumed = false;  // not runtime-checkable; recorded as an assumption
};

struct HypothesisReport {
  std::vector<HypothesisItem> items;

  bool passed() const {
    for (const auto& it : items)
      if (!it.assumed && !it.pass) return false;
    return true;
  }
};

inline nlohmann::json to_json(const HypothesisReport& r) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : r.items) {
    nlohmann::json j{{"name", it.name},
                     {"requirement", it.requirement},
                     {"pass", it.pass},
                     {"assumed", it.assumed}};
    if (!std::isnan(it.computed)) j["computed"] = it.computed;
    items.push_back(j);
  }
  return nlohmann::json{{"items", items}, {"passed", r.passed()}};
}

// Checks every runtime-verifiable convergence hypothesis for the configured
// algorithm and flags the unverifiable ones (KL property, convexity of the
// denoiser image) as assumptions. Solvers refuse to run on a failing report
// unless the config sets override_hypotheses.
inline HypothesisReport validate(const SolverConfig& cfg, const GradientStepDenoiser& d,
                                 const DegradationModel& m) {
  cfg.check();
  HypothesisReport rep;
  double base_l = d.lipschitz_bound();
  if (cfg.penalty_gamma > 0) {
    const Eigen::Index n = m.high_height() * m.high_width() * m.observation().channels();
    base_l += CoercivityPenalty(cfg.penalty_gamma).curvature_bound(cfg.penalty_radius, n);
  }
  const double eff_l = cfg.alpha * base_l;

  rep.items.push_back({"residual_contraction", "alpha * L < 1", eff_l, eff_l < 1.0, false});
  rep.items.push_back({"g_bounded_below", "g admits a declared lower bound", d.lower_bound(),
                       true, false});

  const bool needs_grad_f =
      cfg.algorithm == Algorithm::PGD || cfg.algorithm == Algorithm::DRSdiff ||
      cfg.algorithm == Algorithm::ADMM;
  if (needs_grad_f) {
    if (!m.differentiable()) {
      rep.items.push_back(
          {"f_differentiable", "data term differentiable with Lipschitz gradient", kNaN, false,
           false});
    } else {
      const double lf = m.lipschitz_f();
      rep.items.push_back({"lambda_lf", "lambda * L_f < 1", cfg.lambda * lf,
                           cfg.lambda * lf < 1.0, false});
    }
  } else {  // DRS with inverted order: lambda unconstrained, but alpha*L < 1/2
    rep.items.push_back(
        {"drs_contraction", "alpha * L < 1/2", eff_l, eff_l < 0.5, false});
    rep.items.push_back({"image_convexity", "Im(D) convex (not runtime-checkable)", kNaN, true,
                         true});
  }
  rep.items.push_back({"kl_property", "objective satisfies KL (not runtime-checkable)", kNaN,
                       true, true});
  return rep;
}

}  // namespace pnp
