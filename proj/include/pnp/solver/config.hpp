#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "pnp/errors.hpp"

namespace pnp {

enum class Algorithm { PGD, DRSdiff, DRS, ADMM };

inline std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::PGD: return "pgd";
    case Algorithm::DRSdiff: return "drsdiff";
    case Algorithm::DRS: return "drs";
    case Algorithm::ADMM: return "admm";
  }
  throw ConfigError("bad algorithm");
}

inline Algorithm algorithm_from_name(const std::string& s) {
  if (s == "pgd") return Algorithm::PGD;
  if (s == "drsdiff") return Algorithm::DRSdiff;
  if (s == "drs") return Algorithm::DRS;
  if (s == "admm") return Algorithm::ADMM;
  throw ConfigError("unknown algorithm: " + s);
}

// Stepsize is fixed to tau = 1 in every scheme; lambda is the tuned knob.
struct SolverConfig {
  Algorithm algorithm = Algorithm::PGD;
  double lambda = 1.0;
  double sigma = 0.0;
  double alpha = 1.0;           // denoiser relaxation, (0,1]
  int max_iter = 1000;          // K
  double rel_tol = 1e-8;        // epsilon of the relative-objective stopping rule
  double penalty_gamma = 0.0;   // coercivity penalty strength (off by default)
  double penalty_radius = 32.0; // operating radius for the penalty curvature bound
  std::uint64_t seed = 0;
  bool override_hypotheses = false;

  void check() const {
    if (!(lambda > 0)) throw ConfigError("lambda must be positive");
    if (sigma < 0) throw ConfigError("sigma must be nonnegative");
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("alpha must lie in (0,1]");
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (rel_tol < 0) throw ConfigError("rel_tol must be nonnegative");
    if (penalty_gamma < 0) throw ConfigError("penalty strength must be nonnegative");
  }
};

inline void to_json(nlohmann::json& j, const SolverConfig& c) {
  j = nlohmann::json{{"algorithm", algorithm_name(c.algorithm)},
                     {"lambda", c.lambda},
                     {"sigma", c.sigma},
                     {"alpha", c.alpha},
                     {"max_iter", c.max_iter},
                     {"rel_tol", c.rel_tol},
                     {"penalty_gamma", c.penalty_gamma},
                     {"penalty_radius", c.penalty_radius},
                     {"seed", c.seed},
                     {"override_hypotheses", c.override_hypotheses}};
}

inline void from_json(const nlohmann::json& j, SolverConfig& c) {
  c.algorithm = algorithm_from_name(j.value("algorithm", std::string("pgd")));
  c.lambda = j.value("lambda", 1.0);
  c.sigma = j.value("sigma", 0.0);
  c.alpha = j.value("alpha", 1.0);
  c.max_iter = j.value("max_iter", 1000);
  c.rel_tol = j.value("rel_tol", 1e-8);
  c.penalty_gamma = j.value("penalty_gamma", 0.0);
  c.penalty_radius = j.value("penalty_radius", 32.0);
  c.seed = j.value("seed", std::uint64_t(0));
  c.override_hypotheses = j.value("override_hypotheses", false);
}

}  // namespace pnp
