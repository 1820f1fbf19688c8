#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>
#include <string>
#include <vector>

#include "pnp/core/noise.hpp"
#include "pnp/spectral/probe.hpp"

namespace pnp {

struct PowerResult {
  double estimate = 0;
  int iterations = 0;
  bool converged = false;  // successive Rayleigh quotients within tolerance
};

// Spectral-norm estimate of the (self-adjoint) probe operator J. Iterating
// with J^2 keeps the quadratic form positive semidefinite, so the Rayleigh
// readout sqrt(||J v|| / ||v||-normalized) is nondecreasing and never
// overshoots the true norm. One iteration applies J twice.
inline PowerResult power_iteration(const JacobianProbe& probe, int max_iters,
                                   std::uint64_t seed, double rayleigh_tol = 1e-10) {
  if (max_iters < 1) throw ConfigError("power iteration needs at least one iteration");
  if (!probe.apply) throw ConfigError("degenerate probe");

  Image v(probe.height, probe.width, probe.channels);
  GaussianSampler g(seed);
  for (int attempt = 0; attempt < 8; ++attempt) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v.array()[i] = g();
    if (v.norm() > 0) break;
  }
  const double nv = v.norm();
  if (!(nv > 0)) throw NumericError("could not draw a nonzero start vector");
  v *= 1.0 / nv;

  PowerResult r;
  double prev = -1;
  for (r.iterations = 1; r.iterations <= max_iters; ++r.iterations) {
    const Image jv = probe(v);
    if (!jv.all_finite()) throw NumericError("probe produced non-finite values");
    const double njv = jv.norm();
    r.estimate = njv;  // = sqrt(v^T J^2 v) for unit v
    if (njv <= 0) {    // v in the kernel of a (near-)zero operator
      r.converged = true;
      return r;
    }
    if (prev >= 0 && std::abs(r.estimate - prev) < rayleigh_tol * std::max(1.0, r.estimate)) {
      r.converged = true;
      return r;
    }
    prev = r.estimate;
    Image jjv = probe(jv);
    const double n2 = jjv.norm();
    if (n2 <= 0) {
      r.converged = true;
      return r;
    }
    v = (1.0 / n2) * jjv;
  }
  r.iterations = max_iters;
  return r;
}

// Table of max ||grad^2 g|| over a noisy corpus, one column per noise level.
// Mirrors the measurement protocol used to audit trained denoisers; for the
// certified analytic instances every entry must stay below the declared L.
struct SpectralRow {
  std::string variant;
  std::vector<double> max_estimate;  // aligned with the sigma grid
};

struct SpectralTable {
  std::vector<double> sigmas;
  std::vector<SpectralRow> rows;
};

enum class ProbeMode { Analytic, FiniteDifference };

inline JacobianProbe make_probe(const GradientStepDenoiser& d, const Image& at, ProbeMode mode,
                                double fd_step = 1e-4) {
  return mode == ProbeMode::Analytic ? analytic_probe(d, at)
                                     : finite_difference_probe(d, at, fd_step);
}

inline SpectralRow max_spectral_over_corpus(const GradientStepDenoiser& d,
                                            const std::string& variant,
                                            const std::vector<Image>& images,
                                            const std::vector<double>& noise_levels, int iters,
                                            std::uint64_t seed,
                                            ProbeMode mode = ProbeMode::Analytic) {
  if (images.empty()) throw ConfigError("empty corpus");
  SpectralRow row;
  row.variant = variant;
  // one estimate per (level, image) pair with its own seed stream; pairs are
  // independent, so they fan out across worker threads
  const size_t pairs = noise_levels.size() * images.size();
  std::vector<double> estimates(pairs, 0.0);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t p = next.fetch_add(1); p < pairs; p = next.fetch_add(1)) {
      const size_t li = p / images.size(), ii = p % images.size();
      const Image noisy = add_gaussian_noise(images[ii], noise_levels[li], seed + 2 * p);
      estimates[p] = power_iteration(make_probe(d, noisy, mode), iters, seed + 2 * p + 1).estimate;
    }
  };
  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), unsigned(pairs)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (size_t li = 0; li < noise_levels.size(); ++li) {
    double best = 0;
    for (size_t ii = 0; ii < images.size(); ++ii)
      best = std::max(best, estimates[li * images.size() + ii]);
    row.max_estimate.push_back(best);
  }
  return row;
}

inline void write_spectral_csv(std::ostream& os, const SpectralTable& t) {
  os << "variant";
  char buf[40];
  for (const double s : t.sigmas) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    os << ",sigma=" << buf;
  }
  os << '\n';
  for (const auto& row : t.rows) {
    os << row.variant;
    for (const double v : row.max_estimate) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

// Max spectral estimate over retained solver iterates; the standing L < 1
// hypothesis demands it stay below 1 wherever the denoiser was evaluated.
struct TrajectoryReport {
  double max_estimate = 0;
  int points = 0;
  bool no_data = false;
  bool pass = true;
};

inline TrajectoryReport along_trajectory_check(
    const std::vector<Image>& snapshots,
    const std::function<JacobianProbe(const Image&)>& probe_factory, int iters,
    std::uint64_t seed = 7) {
  TrajectoryReport rep;
  rep.points = int(snapshots.size());
  if (snapshots.empty()) {
    rep.no_data = true;  // vacuous pass, flagged
    return rep;
  }
  std::uint64_t stream = seed;
  for (const Image& x : snapshots)
    rep.max_estimate =
        std::max(rep.max_estimate, power_iteration(probe_factory(x), iters, stream++).estimate);
  rep.pass = rep.max_estimate < 1.0;
  return rep;
}

inline TrajectoryReport along_trajectory_check(const std::vector<Image>& snapshots,
                                               const GradientStepDenoiser& d, int iters,
                                               ProbeMode mode = ProbeMode::Analytic,
                                               std::uint64_t seed = 7) {
  return along_trajectory_check(
      snapshots, [&](const Image& x) { return make_probe(d, x, mode); }, iters, seed);
}

}  // namespace pnp
