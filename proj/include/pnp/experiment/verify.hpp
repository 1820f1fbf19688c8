#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "pnp/denoiser/linear.hpp"
#include "pnp/denoiser/pointwise.hpp"
#include "pnp/experiment/phantom.hpp"
#include "pnp/oracle/audits.hpp"
#include "pnp/oracle/grid.hpp"
#include "pnp/spectral/power.hpp"

#include <Eigen/Eigenvalues>

namespace pnp {

namespace detail {

inline Image image_from_coords(std::span<const double> z) {
  Image img(1, Eigen::Index(z.size()), 1);
  for (size_t i = 0; i < z.size(); ++i) img.array()[Eigen::Index(i)] = z[i];
  return img;
}

}  // namespace detail

// Compact oracle sweep used by the `verify` CLI subcommand: quick, desk-scale
// instances of every independently checkable identity. The acceptance suite
// runs the full-size versions of the same checks. Results land both on the
// stream and, when requested, in a JSON report with the numeric evidence.
inline bool run_verify_suite(std::ostream& os, nlohmann::json* report = nullptr) {
  int failures = 0;
  nlohmann::json items = nlohmann::json::array();
  auto check = [&](const std::string& name, bool ok, double evidence) {
    os << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << evidence << ")\n";
    items.push_back({{"name", name}, {"pass", ok}, {"evidence", evidence}});
    if (!ok) ++failures;
    return ok;
  };

  // prox characterization on a grid, scalar quadratic
  {
    const LinearGSDenoiser d = scalar_quadratic_denoiser(0.5);
    auto phi = [&](std::span<const double> z) -> std::optional<double> {
      return eval_phi(d, detail::image_from_coords(z));
    };
    const double y = 1.0;
    const auto argmin = brute_force_prox(phi, std::span<const double>(&y, 1),
                                         GridSpec(1, {-2, 0, 0}, {2, 0, 0}, 1e-4));
    check("grid prox matches D (scalar quadratic)", std::abs(argmin[0] - 0.5) <= 2e-4,
          argmin[0]);
  }

  // prox characterization, pointwise instance in two dimensions
  {
    const PointwiseGSDenoiser d(0.8, 0.3, 0.1);
    auto phi = [&](std::span<const double> z) -> std::optional<double> {
      return eval_phi(d, detail::image_from_coords(z));
    };
    Image y(1, 2, 1);
    y.array() << 0.4, 0.8;
    const Image dy = d.apply(y);
    const std::array<double, 2> yv{0.4, 0.8};
    const auto argmin = brute_force_prox(
        phi, std::span<const double>(yv.data(), 2),
        GridSpec(2, {dy.array()[0] - 0.3, dy.array()[1] - 0.3, 0},
                 {dy.array()[0] + 0.3, dy.array()[1] + 0.3, 0}, 1e-3));
    const double err = std::hypot(argmin[0] - dy.array()[0], argmin[1] - dy.array()[1]);
    check("grid prox matches D (pointwise, n=2)", err <= 1e-3 * std::sqrt(2.0) * 1.5, err);
  }

  // closed-form phi of the scalar quadratic
  {
    const LinearGSDenoiser d = scalar_quadratic_denoiser(0.5);
    const Image x = make_phantom(4, 4);
    const double err = std::abs(eval_phi(d, x) - 0.5 * x.squared_norm());
    check("closed-form phi (a=0.5)", err <= 1e-8, err);
  }

  // Moreau identity grad_phi(D(x)) = x - D(x)
  {
    const PointwiseGSDenoiser d(0.9, 0.2, 0.1);
    const Image x = make_phantom(16, 16, 1, 2);
    const Image dx = d.apply(x);
    const double err = (grad_phi(d, dx) + dx - x).norm();
    check("Moreau identity (pointwise)", err <= 1e-6 * (1.0 + x.norm()), err);
  }

  // gradient consistency by finite differences
  {
    const PointwiseGSDenoiser d(0.9, 0.2, 0.1);
    const double err = oracle::finite_diff_check(
        [&](const Image& x) { return d.eval_g(x); },
        [&](const Image& x) { return d.grad_g(x); }, {make_phantom(6, 5)});
    check("grad_g finite differences", err <= 1e-5, err);
  }

  // one small validated PGD deblurring run: descent + rate + stationarity
  {
    const Image gt = make_phantom(32, 32);
    const ConvKernel kernel = uniform_kernel(9);
    const double nu = 0.03;
    const Image y = add_gaussian_noise(conv_circular(gt, kernel), nu, 11);
    const DegradationModel m = DegradationModel::blur(kernel, y, nu);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::PGD;
    cfg.lambda = 0.99 / m.lipschitz_f();
    cfg.sigma = 0.5 * nu;
    const PointwiseGSDenoiser d(0.9, cfg.sigma, cfg.sigma);
    const SolveResult r = pnp_pgd(cfg, d, m, y);
    const auto audit = oracle::descent_audit(r.trace);
    check("pgd descent audit", audit.pass(), audit.slope);
    const auto st = oracle::stationarity_audit(r.x, cfg, d, m);
    check("pgd stationarity", st.residual_norm <= 1e-5, st.residual_norm);

    // ADMM matches prox-first DRS through the variable mapping
    SolverConfig cfg50 = cfg;
    cfg50.max_iter = 20;
    cfg50.rel_tol = 0;
    SolveOptions opts;
    opts.retain_snapshots = true;
    const SolveResult admm = pnp_admm(cfg50, d, m, y, opts);
    const SolveResult drs = pnp_drs_diff(cfg50, d, m, y, opts);
    const auto eq = oracle::equivalence_audit(admm, drs);
    check("admm/drs equivalence", eq.pass, eq.max_deviation);
    const double rec = oracle::admm_recursion_residual(admm, cfg50, d, m);
    check("admm recursion residual", rec <= 1e-9, rec);
  }

  // power iteration against a dense eigensolver on an 8x8 grid
  {
    const LinearGSDenoiser d =
        LinearGSDenoiser::with_target_lipschitz(uniform_kernel(3), 0.9, 0.1);
    const Image at = make_phantom(8, 8);
    const Eigen::Index n = at.size();
    Eigen::MatrixXd dense(n, n);
    Image e = like(at);
    for (Eigen::Index i = 0; i < n; ++i) {
      e.array().setZero();
      e.array()[i] = 1.0;
      dense.col(i) = d.hessian_apply(at, e).array().matrix();
    }
    const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense)
                             .eigenvalues()
                             .cwiseAbs()
                             .maxCoeff();
    const double est = power_iteration(analytic_probe(d, at), 5000, 3).estimate;
    check("power iteration vs dense eigensolver", std::abs(est - exact) <= 1e-6 && est <= exact + 1e-8,
          est - exact);
  }

  os << (failures == 0 ? "verify: all checks passed\n"
                       : "verify: " + std::to_string(failures) + " check(s) failed\n");
  if (report) *report = {{"items", items}, {"passed", failures == 0}};
  return failures == 0;
}

}  // namespace pnp
