#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "pnp/core/io.hpp"
#include "pnp/core/metrics.hpp"
#include "pnp/core/noise.hpp"
#include "pnp/denoiser/serialize.hpp"
#include "pnp/experiment/phantom.hpp"
#include "pnp/experiment/spec.hpp"
#include "pnp/fidelity/model.hpp"
#include "pnp/solver/pnp.hpp"
#include "pnp/spectral/power.hpp"

namespace pnp {

// Exit codes shared by the library runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitHypothesisFail = 2;
inline constexpr int kExitNumericAbort = 3;

struct ExperimentOutcome {
  int exit_code = kExitOk;
  std::string message;
  nlohmann::json summary;
};

// Kernel documents accept either explicit taps or a named family:
//   {"type":"uniform","size":9} {"type":"gaussian","std":1.6,"size":25}
//   {"type":"delta"} {"size":3,"taps":[...]}
inline ConvKernel kernel_from_spec(const nlohmann::json& j) {
  if (j.contains("taps")) return kernel_from_json(j);
  const std::string type = j.value("type", std::string("uniform"));
  if (type == "uniform") return uniform_kernel(j.value("size", Eigen::Index(9)));
  if (type == "gaussian")
    return gaussian_kernel(j.value("std", 1.6), j.value("size", Eigen::Index(25)));
  if (type == "delta") return delta_kernel();
  throw ConfigError("unknown kernel type: " + type);
}

namespace detail {

inline nlohmann::json default_degradation(Task task) {
  switch (task) {
    case Task::Deblur:
      return {{"variant", "blur"}, {"kernel", {{"type", "uniform"}, {"size", 9}}}, {"nu", 0.03}};
    case Task::SR:
      return {{"variant", "downsample"},
              {"kernel", {{"type", "gaussian"}, {"std", 1.6}, {"size", 25}}},
              {"scale", 2},
              {"nu", 0.01}};
    case Task::Inpaint:
      return {{"variant", "mask"}, {"p", 0.5}, {"nu", 0.0}};
    case Task::DenoiseCheck:
      return {{"variant", "blur"}, {"kernel", {{"type", "delta"}}}, {"nu", 0.03}};
  }
  throw ConfigError("bad task");
}

// Pixel-separable potentials cannot propagate information across pixels, so
// inpainting defaults to the filter-based instance; the quadratic data terms
// default to the pointwise one.
inline nlohmann::json default_denoiser(Task task) {
  if (task == Task::Inpaint) {
    nlohmann::json j = denoiser_to_json(
        LinearGSDenoiser::with_target_lipschitz(gaussian_kernel(1.6, 7), 0.9, 0.0));
    j.erase("sigma");
    j.erase("lipschitz");
    return j;
  }
  return {{"kind", "pointwise"}, {"amplitude", 0.9}, {"scale_from_sigma", true}};
}

struct ResolvedDegradation {
  nlohmann::json doc;          // fully resolved parameters
  std::string variant;
  ConvKernel kernel;
  int scale = 1;
  double nu = 0;
  BinaryMask mask;             // mask variant only
};

inline ResolvedDegradation resolve_degradation(const ExperimentSpec& spec,
                                               Eigen::Index obs_h, Eigen::Index obs_w) {
  nlohmann::json doc = spec.degradation.is_object() && !spec.degradation.empty()
                           ? spec.degradation
                           : default_degradation(spec.task);
  ResolvedDegradation r;
  r.variant = doc.value("variant", std::string("blur"));
  if (!doc.contains("nu")) doc["nu"] = default_degradation(spec.task).value("nu", 0.0);
  r.nu = doc.at("nu").get<double>();
  if (r.variant == "blur" || r.variant == "downsample") {
    if (!doc.contains("kernel")) doc["kernel"] = default_degradation(spec.task).at("kernel");
    r.kernel = kernel_from_spec(doc.at("kernel")).normalized();
    doc["kernel"] = kernel_to_json(r.kernel);
    if (r.variant == "downsample") r.scale = doc.value("scale", 2);
  } else if (r.variant == "mask") {
    if (doc.contains("mask_path")) {
      r.mask = read_mask(doc.at("mask_path").get<std::string>());
    } else {
      // Bernoulli mask drawn from the spec seed; the observation grid is the
      // (possibly pre-degraded) input grid
      r.mask = bernoulli_mask(obs_h, obs_w, doc.value("p", 0.5), spec.seed + 0x9e3779b9ULL);
    }
  } else {
    throw ConfigError("unknown degradation variant: " + r.variant);
  }
  doc["seed"] = spec.seed;
  r.doc = std::move(doc);
  return r;
}

inline Algorithm default_algorithm(Task task) {
  return task == Task::Inpaint ? Algorithm::DRS : Algorithm::PGD;
}

struct ResolvedSolver {
  SolverConfig cfg;
  bool used_defaults = false;   // lambda or sigma came from the table
  bool defaults_exact = true;   // false when interpolated in nu
};

// Defaults fill only the fields the document leaves unset; the fully
// resolved configuration is echoed into the run summary.
inline ResolvedSolver resolve_solver(const ExperimentSpec& spec, double nu) {
  const nlohmann::json& j = spec.solver;
  ResolvedSolver out;
  SolverConfig& cfg = out.cfg;
  cfg.algorithm = j.contains("algorithm")
                      ? algorithm_from_name(j.at("algorithm").get<std::string>())
                      : default_algorithm(spec.task);
  // denoise-check never runs a solver; lambda only has to pass validation
  DefaultParams dp{1.0, nu > 0 ? nu : 0.03, true};
  if (spec.task != Task::DenoiseCheck)
    dp = default_params(cfg.algorithm, nu > 0 ? nu : 0.03, spec.task);
  out.used_defaults = !j.contains("lambda") || !j.contains("sigma");
  out.defaults_exact = dp.exact;
  cfg.lambda = j.value("lambda", dp.lambda);
  cfg.sigma = j.value("sigma", dp.sigma);
  cfg.alpha = j.value("alpha", cfg.algorithm == Algorithm::DRS ? 0.5 : 1.0);
  cfg.max_iter = j.value("max_iter", spec.task == Task::Inpaint ? 200 : 1000);
  cfg.rel_tol = j.value("rel_tol", 1e-8);
  cfg.penalty_gamma = j.value("penalty_gamma", 0.0);
  cfg.penalty_radius = j.value("penalty_radius", 32.0);
  cfg.seed = spec.seed;
  cfg.override_hypotheses = j.value("override_hypotheses", false);
  cfg.check();
  return out;
}

inline nlohmann::json resolve_denoiser_doc(const ExperimentSpec& spec, double sigma) {
  nlohmann::json doc = spec.denoiser.is_object() && !spec.denoiser.empty()
                           ? spec.denoiser
                           : default_denoiser(spec.task);
  if (!doc.contains("sigma")) doc["sigma"] = sigma;
  return doc;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
}

}  // namespace detail

struct DegradeResult {
  Image ground_truth;
  Image observation;
  detail::ResolvedDegradation degradation;
};

// Forward synthesis y = A x (+ noise for the quadratic variants; the mask
// variant observes exact pixel values).
inline DegradeResult synthesize_degradation(const ExperimentSpec& spec, const Image& gt) {
  DegradeResult r;
  r.ground_truth = gt;
  r.degradation = detail::resolve_degradation(spec, gt.height(), gt.width());
  const auto& d = r.degradation;
  if (d.variant == "blur") {
    r.observation = add_gaussian_noise(conv_circular(gt, d.kernel), d.nu, spec.seed);
  } else if (d.variant == "downsample") {
    r.observation =
        add_gaussian_noise(decimate(conv_circular(gt, d.kernel), d.scale), d.nu, spec.seed);
  } else {
    r.observation = apply_mask_operator(gt, d.mask);
    if (d.nu > 0) {
      r.observation = apply_mask_operator(add_gaussian_noise(r.observation, d.nu, spec.seed),
                                          d.mask);
    }
  }
  return r;
}

inline DegradationModel build_model(const detail::ResolvedDegradation& d, Image observation) {
  if (d.variant == "blur") return DegradationModel::blur(d.kernel, std::move(observation), d.nu);
  if (d.variant == "downsample")
    return DegradationModel::downsample(d.kernel, d.scale, std::move(observation), d.nu);
  return DegradationModel::mask(d.mask, std::move(observation), d.nu);
}

// Full experiment: synthesize (or accept) the degraded observation, run the
// configured solver, emit images, the CSV trace and a self-describing
// summary. Deterministic for a fixed spec.
inline ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  spec.validate_paths();
  fs::create_directories(spec.output_dir);
  const auto out_path = [&](const std::string& f) { return (fs::path(spec.output_dir) / f).string(); };

  ExperimentOutcome outcome;
  nlohmann::json& summary = outcome.summary;

  const Image input = read_image(spec.input_path);
  Image observation;
  const Image* gt = nullptr;
  Image gt_storage;
  detail::ResolvedDegradation degradation;

  if (spec.pre_degraded) {
    degradation = detail::resolve_degradation(spec, input.height(), input.width());
    observation = input;
  } else {
    DegradeResult synth = synthesize_degradation(spec, input);
    degradation = std::move(synth.degradation);
    observation = std::move(synth.observation);
    gt_storage = std::move(synth.ground_truth);
    gt = &gt_storage;
  }
  write_image(out_path("degraded.png"), observation);
  if (degradation.variant == "mask") {
    write_mask(out_path("mask.png"), degradation.mask);
    degradation.doc["mask_path"] = out_path("mask.png");
  }

  const detail::ResolvedSolver resolved = detail::resolve_solver(spec, degradation.nu);
  const SolverConfig& cfg = resolved.cfg;
  const nlohmann::json denoiser_doc = detail::resolve_denoiser_doc(spec, cfg.sigma);
  const auto denoiser = denoiser_from_json(denoiser_doc);

  summary["spec"] = spec;
  summary["resolved"] = {{"solver", cfg},
                         {"denoiser", denoiser_doc},
                         {"degradation", degradation.doc}};
  if (resolved.used_defaults)
    summary["resolved"]["defaults_interpolated"] = !resolved.defaults_exact;

  // denoise-check: no solver, just one denoiser application plus the
  // certified-bound measurement at the noisy point
  if (spec.task == Task::DenoiseCheck) {
    const Image denoised = denoiser->apply(observation);
    write_image(out_path("restored.png"), denoised);
    summary["psnr_degraded"] = gt ? psnr(observation, *gt) : kNaN;
    summary["psnr_restored"] = gt ? psnr(denoised, *gt) : kNaN;
    summary["spectral_estimate"] =
        power_iteration(make_probe(*denoiser, observation,
                                   denoiser->has_analytic_hessian()
                                       ? ProbeMode::Analytic
                                       : ProbeMode::FiniteDifference),
                        200, spec.seed)
            .estimate;
    summary["certified_lipschitz"] = denoiser->lipschitz_bound();
    detail::write_text_file(out_path("summary.json"), summary.dump(2) + "\n");
    return outcome;
  }

  const DegradationModel model = build_model(degradation, observation);

  const HypothesisReport hyp = validate(cfg, *denoiser, model);
  summary["hypotheses"] = to_json(hyp);
  if (!hyp.passed() && !cfg.override_hypotheses) {
    outcome.exit_code = kExitHypothesisFail;
    outcome.message = "convergence hypotheses failed; rerun with an override to force";
    summary["error"] = outcome.message;
    detail::write_text_file(out_path("summary.json"), summary.dump(2) + "\n");
    return outcome;
  }

  // initialization: observed image for deblurring, nearest-neighbor
  // upsampling for SR, short high-sigma warm-up run for inpainting
  Image x0 = observation;
  if (spec.task == Task::SR) x0 = upsample_nearest(observation, degradation.scale);
  if (spec.task == Task::Inpaint) {
    nlohmann::json warm_doc = denoiser_doc;
    warm_doc["sigma"] = 50.0 / 255.0;
    warm_doc.erase("lipschitz");
    const auto warm_denoiser = denoiser_from_json(warm_doc);
    SolverConfig warm_cfg = cfg;
    warm_cfg.max_iter = 10;
    warm_cfg.rel_tol = 0;
    SolveOptions warm_opts;
    warm_opts.retain_snapshots = true;
    const SolveResult warm = run_solver(warm_cfg, *warm_denoiser, model, x0, warm_opts);
    if (!warm.trace.aborted() && !warm.trace.snapshots.x.empty())
      x0 = warm.trace.snapshots.x.back();
    summary["warmup_iterations"] = warm.trace.iterations();
  }

  SolveOptions opts;
  opts.ground_truth = gt;
  const SolveResult result = run_solver(cfg, *denoiser, model, x0, opts);

  {
    std::ofstream csv(out_path("trace.csv"), std::ios::binary);
    write_trace_csv(csv, result.trace);
  }
  write_image(out_path("restored.png"), result.x);

  summary["iterations"] = result.trace.iterations();
  summary["stop_reason"] = result.trace.stop_reason;
  summary["final_objective"] = result.trace.records.empty() ? kNaN : result.trace.last().objective;
  summary["elapsed_seconds"] = result.trace.elapsed_seconds;
  if (gt) {
    const Image comparable = spec.task == Task::SR ? upsample_nearest(observation, degradation.scale)
                                                   : observation;
    summary["psnr_degraded"] = psnr(comparable, *gt);
    summary["psnr_restored"] = psnr(result.x, *gt);
  }
  detail::write_text_file(out_path("summary.json"), summary.dump(2) + "\n");

  if (result.trace.aborted()) {
    outcome.exit_code = kExitNumericAbort;
    outcome.message = "solver aborted on non-finite values";
  }
  return outcome;
}

// Fan independent experiments out across worker threads; outputs land under
// output_root/<name>. Returns the worst exit code.
inline int run_batch(std::vector<ExperimentSpec> specs, const std::string& output_root,
                     unsigned threads = 0) {
  namespace fs = std::filesystem;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  for (auto& s : specs)
    s.output_dir = (fs::path(output_root) / s.name).string();
  std::vector<int> codes(specs.size(), 0);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1)) {
      try {
        codes[i] = run_experiment(specs[i]).exit_code;
      } catch (const std::exception&) {
        codes[i] = kExitUsage;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<size_t>(threads, specs.size()); ++t)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int worst = 0;
  for (const int c : codes) worst = std::max(worst, c);
  return worst;
}

}  // namespace pnp
