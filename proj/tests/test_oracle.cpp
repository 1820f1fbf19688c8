#include <doctest.h>

#include <random>

#include "pnp/denoiser/linear.hpp"
#include "pnp/denoiser/phi.hpp"
#include "pnp/denoiser/pointwise.hpp"
#include "pnp/experiment/phantom.hpp"
#include "pnp/oracle/audits.hpp"
#include "pnp/oracle/grid.hpp"

using namespace pnp;

namespace {

Image coords(std::span<const double> z) {
  Image img(1, Eigen::Index(z.size()), 1);
  for (size_t i = 0; i < z.size(); ++i) img.array()[Eigen::Index(i)] = z[i];
  return img;
}

std::function<std::optional<double>(std::span<const double>)> phi_fn(
    const GradientStepDenoiser& d) {
  return [&d](std::span<const double> z) -> std::optional<double> {
    const InversionResult inv = try_invert_denoiser(d, coords(z));
    if (!inv.converged) return std::nullopt;  // treated as +inf by the oracle
    return phi_from_preimage(d, inv.preimage, coords(z));
  };
}

}  // namespace

TEST_CASE("grid spec guards") {
  CHECK_THROWS_AS(GridSpec(4, {0, 0, 0}, {1, 1, 1}, 0.1), ConfigError);
  CHECK_THROWS_AS(GridSpec(1, {0, 0, 0}, {-1, 0, 0}, 0.1), ConfigError);
  CHECK_THROWS_AS(GridSpec(3, {0, 0, 0}, {1, 1, 1}, 1e-4), ConfigError);  // 1e12 points
  CHECK_NOTHROW(GridSpec(2, {0, 0, 0}, {1, 1, 0}, 1e-3));
}

TEST_CASE("brute-force prox against the denoisers") {
  // scalar quadratic a = 0.5, y = 1: argmin at 0.5 within the resolution
  const LinearGSDenoiser q = scalar_quadratic_denoiser(0.5);
  const double y1 = 1.0;
  const auto m1 = brute_force_prox(phi_fn(q), std::span<const double>(&y1, 1),
                                   GridSpec(1, {-2, 0, 0}, {2, 0, 0}, 1e-4));
  CHECK(std::abs(m1[0] - 0.5) <= 1e-4 + 1e-12);

  // g == 0: prox is the identity
  const LinearGSDenoiser id = identity_denoiser();
  const double y2 = 0.37;
  const auto m2 = brute_force_prox(phi_fn(id), std::span<const double>(&y2, 1),
                                   GridSpec(1, {-1, 0, 0}, {1, 0, 0}, 1e-4));
  CHECK(std::abs(m2[0] - y2) <= 1e-4 + 1e-12);

  // pointwise instance, n = 2: matches D within delta*sqrt(2)
  const PointwiseGSDenoiser pw(0.8, 0.3, 0.1);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int t = 0; t < 3; ++t) {
    const std::array<double, 2> yv{dist(rng), dist(rng)};
    const Image dy = pw.apply(coords(std::span<const double>(yv.data(), 2)));
    const GridSpec grid(2, {dy.array()[0] - 0.25, dy.array()[1] - 0.25, 0},
                        {dy.array()[0] + 0.25, dy.array()[1] + 0.25, 0}, 1e-3);
    const auto m = brute_force_prox(phi_fn(pw), std::span<const double>(yv.data(), 2), grid);
    const double err = std::hypot(m[0] - dy.array()[0], m[1] - dy.array()[1]);
    CHECK(err <= 1e-3 * std::sqrt(2.0) + 1e-12);
  }

  // every grid point infeasible
  auto never = [](std::span<const double>) -> std::optional<double> { return std::nullopt; };
  CHECK_THROWS_AS(
      brute_force_prox(never, std::span<const double>(&y1, 1),
                       GridSpec(1, {0, 0, 0}, {1, 0, 0}, 0.01)),
      NumericError);

  // argmin on the box boundary is rejected
  const double y_far = 10.0;
  CHECK_THROWS_AS(
      brute_force_prox(phi_fn(id), std::span<const double>(&y_far, 1),
                       GridSpec(1, {0, 0, 0}, {1, 0, 0}, 0.01)),
      NumericError);
}

TEST_CASE("finite_diff_check") {
  // linear map: round-off level
  const LinearGSDenoiser q = scalar_quadratic_denoiser(0.3);
  const double lin_err = oracle::finite_diff_check(
      [&](const Image& x) { return dot(x, x); },
      [&](const Image& x) { return 2.0 * x; }, {make_phantom(5, 5)});
  CHECK(lin_err < 1e-9);

  // pointwise potential: second-order accuracy
  const PointwiseGSDenoiser pw(0.9, 0.2, 0.1);
  const double g_err = oracle::finite_diff_check(
      [&](const Image& x) { return pw.eval_g(x); },
      [&](const Image& x) { return pw.grad_g(x); }, {make_phantom(5, 6), make_phantom(6, 5, 1, 1)});
  CHECK(g_err < 1e-5);

  // grad_phi stacks the inversion tolerance: looser bound
  const double phi_err = oracle::finite_diff_check(
      [&](const Image& x) { return eval_phi(pw, x); },
      [&](const Image& x) { return grad_phi(pw, x); }, {make_phantom(4, 4)});
  CHECK(phi_err < 1e-4);
}

TEST_CASE("descent audit on synthetic traces") {
  // residual 1/k: slope -1 within 0.05, monotone flat objective passes
  ConvergenceTrace power_law;
  power_law.records.push_back({0, 1.0, kNaN, kNaN, kNaN, kNaN, kNaN});
  for (int k = 1; k <= 300; ++k)
    power_law.records.push_back({k, 1.0, kNaN, 1.0 / k, 1.0 / k, kNaN, kNaN});
  const auto rep = oracle::descent_audit(power_law);
  CHECK(rep.monotone);
  CHECK(rep.slope == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(rep.slope_pass);

  // increasing objective: monotonicity failure flagged
  ConvergenceTrace rising = power_law;
  rising.records[200].objective = 2.0;
  const auto bad = oracle::descent_audit(rising);
  CHECK(!bad.monotone);
  CHECK(bad.worst_violation > 0.5);

  // flat residual: slope 0 fails the rate check
  ConvergenceTrace flat;
  flat.records.push_back({0, 1.0, kNaN, kNaN, kNaN, kNaN, kNaN});
  for (int k = 1; k <= 100; ++k)
    flat.records.push_back({k, 1.0, kNaN, 0.5, 0.5, kNaN, kNaN});
  CHECK(!oracle::descent_audit(flat).slope_pass);
}

TEST_CASE("stationarity audit") {
  // converged scalar PGD instance
  Image y(1, 1, 1);
  y.array()[0] = 0.9;
  const auto m = DegradationModel::blur(delta_kernel(), y, 1.0);
  const LinearGSDenoiser d = scalar_quadratic_denoiser(0.5);
  SolverConfig cfg;
  cfg.lambda = 0.5;
  cfg.rel_tol = 1e-14;
  const SolveResult r = pnp_pgd(cfg, d, m, y);
  const auto st = oracle::stationarity_audit(r.x, cfg, d, m);
  CHECK(st.residual_norm <= 1e-6);
  CHECK(st.fixed_point_gap <= 1e-6);

  // perturbation strictly increases the residual
  Image perturbed = r.x;
  perturbed.array()[0] += 0.01;
  const auto worse = oracle::stationarity_audit(perturbed, cfg, d, m);
  CHECK(worse.residual_norm > st.residual_norm);

  // g == 0 at the minimizer of f
  const Image big_y = make_phantom(8, 8);
  const auto mb = DegradationModel::blur(delta_kernel(), big_y, 0.5);
  SolverConfig cfg2;
  cfg2.lambda = 0.1;
  const auto st2 = oracle::stationarity_audit(big_y, cfg2, identity_denoiser(), mb);
  CHECK(st2.residual_norm <= 1e-8);
}

TEST_CASE("equivalence audit structural failure") {
  SolveResult a, b;
  a.trace.snapshots.y.push_back(make_phantom(4, 4));
  a.trace.snapshots.z.push_back(make_phantom(4, 4));
  a.trace.snapshots.u.push_back(Image(4, 4, 1));
  a.trace.snapshots.x.push_back(make_phantom(4, 4));
  // b retained nothing: length mismatch
  const auto rep = oracle::equivalence_audit(a, b);
  CHECK(!rep.structural_ok);
  CHECK(!rep.pass);
}
