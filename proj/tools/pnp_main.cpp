// Command-line driver: synthesize degradations, run PnP restorations, and
// emit traces, images and verification reports.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pnp/experiment/run.hpp"
#include "pnp/experiment/verify.hpp"

namespace fs = std::filesystem;

namespace {

std::string default_output_root() {
  if (const char* env = std::getenv("PNP_OUTPUT_ROOT")) return env;
  return "pnp-out";
}

pnp::Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pnp::IoError("cannot open " + path);
  pnp::Json j;
  in >> j;
  return j;
}

struct CommonFlags {
  std::string input;
  std::string output_dir;
  std::string spec_file;
  std::string denoiser_file;
  std::string degradation_file;
  std::string task = "deblur";
  std::string algorithm;
  double nu = -1, lambda = -1, sigma = -1, alpha = -1, rel_tol = -1;
  double mask_p = -1;
  int max_iter = -1, sr_scale = -1;
  std::string kernel;
  double kernel_std = -1;
  std::uint64_t seed = 0;
  bool pre_degraded = false;
  bool override_hypotheses = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--input", f.input, "input image (ground truth, or observation with --pre-degraded)");
  cmd->add_option("--output-dir", f.output_dir, "output directory");
  cmd->add_option("--spec", f.spec_file, "experiment spec JSON; overrides flags");
  cmd->add_option("--denoiser-json", f.denoiser_file, "denoiser document");
  cmd->add_option("--degradation-json", f.degradation_file, "degradation document");
  cmd->add_option("--task", f.task, "deblur | sr | inpaint | denoise-check");
  cmd->add_option("--algorithm", f.algorithm, "pgd | drsdiff | drs | admm");
  cmd->add_option("--nu", f.nu, "observation noise level");
  cmd->add_option("--lambda", f.lambda, "regularization weight (default: per-noise table)");
  cmd->add_option("--sigma", f.sigma, "denoiser level (default: per-noise table)");
  cmd->add_option("--alpha", f.alpha, "denoiser relaxation in (0,1]");
  cmd->add_option("--rel-tol", f.rel_tol, "relative objective stopping tolerance");
  cmd->add_option("--max-iter", f.max_iter, "iteration cap");
  cmd->add_option("--kernel", f.kernel, "uniform<k> | gaussian | delta (e.g. uniform9)");
  cmd->add_option("--kernel-std", f.kernel_std, "gaussian kernel std");
  cmd->add_option("--sr-scale", f.sr_scale, "downsampling factor");
  cmd->add_option("--mask-p", f.mask_p, "Bernoulli observation probability");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_flag("--pre-degraded", f.pre_degraded, "treat the input as the observation");
  cmd->add_flag("--override-hypotheses", f.override_hypotheses,
                "run even if a convergence hypothesis fails (exit 2 otherwise)");
}

pnp::Json kernel_json_from_flag(const CommonFlags& f) {
  if (f.kernel.rfind("uniform", 0) == 0) {
    const std::string num = f.kernel.substr(7);
    return {{"type", "uniform"}, {"size", num.empty() ? 9 : std::stoi(num)}};
  }
  if (f.kernel == "gaussian")
    return {{"type", "gaussian"}, {"std", f.kernel_std > 0 ? f.kernel_std : 1.6}, {"size", 25}};
  if (f.kernel == "delta") return {{"type", "delta"}};
  throw pnp::ConfigError("unknown kernel name: " + f.kernel);
}

// Precedence: defaults < flags < spec file.
pnp::ExperimentSpec build_spec(const CommonFlags& f) {
  pnp::ExperimentSpec spec;
  spec.task = pnp::task_from_name(f.task);
  spec.input_path = f.input;
  spec.output_dir = f.output_dir.empty()
                        ? (fs::path(default_output_root()) / f.task).string()
                        : f.output_dir;
  spec.seed = f.seed;
  spec.pre_degraded = f.pre_degraded;

  pnp::Json& solver = spec.solver;
  if (!f.algorithm.empty()) solver["algorithm"] = f.algorithm;
  if (f.lambda >= 0) solver["lambda"] = f.lambda;
  if (f.sigma >= 0) solver["sigma"] = f.sigma;
  if (f.alpha >= 0) solver["alpha"] = f.alpha;
  if (f.rel_tol >= 0) solver["rel_tol"] = f.rel_tol;
  if (f.max_iter >= 0) solver["max_iter"] = f.max_iter;
  if (f.override_hypotheses) solver["override_hypotheses"] = true;

  pnp::Json& degr = spec.degradation;
  if (spec.task == pnp::Task::Inpaint) {
    degr["variant"] = "mask";
    if (f.mask_p >= 0) degr["p"] = f.mask_p;
    if (f.nu >= 0) degr["nu"] = f.nu;
  } else {
    degr["variant"] = spec.task == pnp::Task::SR ? "downsample" : "blur";
    if (!f.kernel.empty()) degr["kernel"] = kernel_json_from_flag(f);
    if (spec.task == pnp::Task::SR) degr["scale"] = f.sr_scale > 0 ? f.sr_scale : 2;
    if (f.nu >= 0) degr["nu"] = f.nu;
  }
  if (degr.size() == 1 && spec.task != pnp::Task::Inpaint && f.nu < 0 && f.kernel.empty())
    degr = pnp::Json::object();  // fall back to task defaults wholesale

  if (!f.denoiser_file.empty()) spec.denoiser = load_json_file(f.denoiser_file);
  if (!f.degradation_file.empty()) spec.degradation = load_json_file(f.degradation_file);
  if (!f.spec_file.empty()) {
    const pnp::Json file = load_json_file(f.spec_file);
    pnp::Json merged = pnp::Json(spec);
    merged.merge_patch(file);
    spec = merged.get<pnp::ExperimentSpec>();
  }
  return spec;
}

int log_resolved_and_run(const pnp::ExperimentSpec& spec) {
  const pnp::ExperimentOutcome outcome = pnp::run_experiment(spec);
  if (outcome.summary.contains("resolved"))
    std::cout << "resolved: " << outcome.summary.at("resolved").dump() << "\n";
  if (!outcome.message.empty()) std::cerr << outcome.message << "\n";
  std::cout << "outputs in " << spec.output_dir << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plug-and-play restoration with proximal gradient-step denoisers"};
  app.require_subcommand(1);

  CommonFlags restore_flags, degrade_flags;
  std::string verify_dir;
  std::string spectral_dir;
  int spectral_iters = 200;
  std::string batch_file;
  std::string batch_root = default_output_root();
  unsigned batch_threads = 0;

  CLI::App* degrade = app.add_subcommand("degrade", "synthesize a degraded observation");
  add_common_flags(degrade, degrade_flags);

  CLI::App* restore = app.add_subcommand("restore", "degrade (unless --pre-degraded) and restore");
  add_common_flags(restore, restore_flags);

  CLI::App* verify = app.add_subcommand("verify", "run the oracle verification suite");
  verify->add_option("--output-dir", verify_dir, "where to write the report");

  CLI::App* spectral = app.add_subcommand("spectral-report",
                                          "max residual-Jacobian spectral norms over a corpus");
  spectral->add_option("--output-dir", spectral_dir, "output directory");
  spectral->add_option("--iters", spectral_iters, "power iterations per estimate");

  CLI::App* batch = app.add_subcommand("batch", "run a JSON array of experiment specs");
  batch->add_option("--specs", batch_file, "JSON file with an array of specs")->required();
  batch->add_option("--output-root", batch_root, "root directory for per-spec outputs");
  batch->add_option("--threads", batch_threads, "worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pnp::kExitUsage;
  }

  try {
    if (degrade->parsed()) {
      pnp::ExperimentSpec spec = build_spec(degrade_flags);
      spec.validate_paths();
      fs::create_directories(spec.output_dir);
      const pnp::Image gt = pnp::read_image(spec.input_path);
      pnp::DegradeResult r = pnp::synthesize_degradation(spec, gt);
      const std::string img_path = (fs::path(spec.output_dir) / "degraded.png").string();
      pnp::write_image(img_path, r.observation);
      if (r.degradation.variant == "mask") {
        const std::string mask_path = (fs::path(spec.output_dir) / "mask.png").string();
        pnp::write_mask(mask_path, r.degradation.mask);
        r.degradation.doc["mask_path"] = mask_path;
      }
      std::ofstream out(fs::path(spec.output_dir) / "degradation.json");
      out << r.degradation.doc.dump(2) << "\n";
      std::cout << "wrote " << img_path << "\n";
      return pnp::kExitOk;
    }
    if (restore->parsed()) return log_resolved_and_run(build_spec(restore_flags));
    if (verify->parsed()) {
      pnp::Json report;
      bool ok_all;
      if (!verify_dir.empty()) {
        fs::create_directories(verify_dir);
        std::ofstream out(fs::path(verify_dir) / "verify.txt");
        ok_all = pnp::run_verify_suite(out, &report);
        std::ofstream jout(fs::path(verify_dir) / "verify.json");
        jout << report.dump(2) << "\n";
        std::cout << (ok_all ? "verify passed\n" : "verify failed\n");
      } else {
        ok_all = pnp::run_verify_suite(std::cout, &report);
      }
      return ok_all ? pnp::kExitOk : pnp::kExitNumericAbort;
    }
    if (spectral->parsed()) {
      const auto corpus = pnp::make_phantom_corpus(4, 32, 32);
      pnp::SpectralTable table;
      for (const double s : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0}) table.sigmas.push_back(s / 255.0);
      const pnp::LinearGSDenoiser linear =
          pnp::LinearGSDenoiser::with_target_lipschitz(pnp::gaussian_kernel(1.0, 5), 0.9, 0.1);
      const pnp::PointwiseGSDenoiser pointwise(0.9, 0.1, 0.1);
      table.rows.push_back(pnp::max_spectral_over_corpus(linear, "linear", corpus, table.sigmas,
                                                         spectral_iters, 1));
      table.rows.push_back(pnp::max_spectral_over_corpus(pointwise, "pointwise", corpus,
                                                         table.sigmas, spectral_iters, 2));
      const std::string dir = spectral_dir.empty() ? default_output_root() : spectral_dir;
      fs::create_directories(dir);
      std::ofstream out(fs::path(dir) / "spectral_report.csv", std::ios::binary);
      pnp::write_spectral_csv(out, table);
      std::cout << "wrote " << (fs::path(dir) / "spectral_report.csv").string() << "\n";
      return pnp::kExitOk;
    }
    if (batch->parsed()) {
      const pnp::Json arr = load_json_file(batch_file);
      if (!arr.is_array()) throw pnp::ConfigError("batch spec file must hold a JSON array");
      std::vector<pnp::ExperimentSpec> specs;
      for (const auto& j : arr) specs.push_back(j.get<pnp::ExperimentSpec>());
      return pnp::run_batch(std::move(specs), batch_root, batch_threads);
    }
  } catch (const pnp::HypothesisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pnp::kExitHypothesisFail;
  } catch (const pnp::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pnp::kExitNumericAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pnp::kExitUsage;
  }
  return pnp::kExitUsage;
}
