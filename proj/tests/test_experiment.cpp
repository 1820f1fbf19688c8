#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pnp/core/io.hpp"
#include "pnp/experiment/run.hpp"
#include "pnp/experiment/verify.hpp"

using namespace pnp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentSpec quick_deblur_spec(const fs::path& root, const std::string& name) {
  const fs::path input = root / "input.png";
  if (!fs::exists(input)) write_image(input.string(), make_phantom(32, 32), 16);
  ExperimentSpec spec;
  spec.task = Task::Deblur;
  spec.name = name;
  spec.input_path = input.string();
  spec.output_dir = (root / name).string();
  spec.seed = 5;
  spec.solver["max_iter"] = 60;
  return spec;
}

}  // namespace

TEST_CASE("default parameter table") {
  const double nu1 = 2.55 / 255.0, nu2 = 7.65 / 255.0, nu3 = 12.75 / 255.0;

  auto p = default_params(Algorithm::PGD, nu2);
  CHECK(p.exact);
  CHECK(p.lambda == doctest::Approx(0.99 * nu2 * nu2).epsilon(1e-12));
  CHECK(p.sigma == doctest::Approx(0.5 * nu2).epsilon(1e-12));

  p = default_params(Algorithm::PGD, nu1);
  CHECK(p.sigma == doctest::Approx(0.75 * nu1).epsilon(1e-12));

  p = default_params(Algorithm::DRS, nu3);
  CHECK(p.lambda == doctest::Approx(0.75 * nu3 * nu3).epsilon(1e-12));
  CHECK(p.sigma == doctest::Approx(0.5 * nu3).epsilon(1e-12));

  p = default_params(Algorithm::DRS, nu1);
  CHECK(p.lambda == doctest::Approx(5.0 * nu1 * nu1).epsilon(1e-12));
  CHECK(p.sigma == doctest::Approx(2.0 * nu1).epsilon(1e-12));

  // ADMM shares the PGD/DRSdiff row
  CHECK(default_params(Algorithm::ADMM, nu2).lambda ==
        doctest::Approx(default_params(Algorithm::DRSdiff, nu2).lambda));

  // off-anchor noise levels interpolate and are flagged
  p = default_params(Algorithm::DRS, 0.02);
  CHECK(!p.exact);
  CHECK(p.lambda / (0.02 * 0.02) > 1.5);
  CHECK(p.lambda / (0.02 * 0.02) < 5.0);

  // inpainting: fixed values, not nu-scaled
  p = default_params(Algorithm::DRS, 0.0, Task::Inpaint);
  CHECK(p.lambda == 2.0);
  CHECK(p.sigma == doctest::Approx(15.0 / 255.0));
  CHECK_THROWS_AS(default_params(Algorithm::PGD, 0.01, Task::Inpaint), ConfigError);
  CHECK_THROWS_AS(default_params(Algorithm::PGD, 0.0), ConfigError);
}

TEST_CASE("experiment spec round trip") {
  ExperimentSpec spec;
  spec.task = Task::SR;
  spec.name = "sr-test";
  spec.input_path = "in.png";
  spec.pre_degraded = true;
  spec.denoiser = {{"kind", "pointwise"}, {"amplitude", 0.7}, {"scale", 0.2}};
  spec.degradation = {{"variant", "downsample"}, {"scale", 2}, {"nu", 0.01}};
  spec.solver = {{"algorithm", "drs"}, {"lambda", 0.1}, {"alpha", 0.5}};
  spec.output_dir = "out";
  spec.seed = 77;

  const nlohmann::json j = spec;
  const ExperimentSpec back = j.get<ExperimentSpec>();
  CHECK(nlohmann::json(back) == j);  // lossless round trip
}

TEST_CASE("deblur experiment end to end") {
  TempDir tmp("pnp_exp_deblur");
  const ExperimentSpec spec = quick_deblur_spec(tmp.path, "run1");
  const ExperimentOutcome out = run_experiment(spec);
  CHECK(out.exit_code == kExitOk);

  CHECK(fs::exists(tmp.path / "run1" / "degraded.png"));
  CHECK(fs::exists(tmp.path / "run1" / "restored.png"));
  CHECK(fs::exists(tmp.path / "run1" / "trace.csv"));
  CHECK(fs::exists(tmp.path / "run1" / "summary.json"));

  // summary embeds the fully resolved spec and the hypothesis report
  const nlohmann::json summary = nlohmann::json::parse(slurp(tmp.path / "run1" / "summary.json"));
  CHECK(summary.contains("spec"));
  CHECK(summary.at("hypotheses").at("passed").get<bool>());
  const double lambda = summary.at("resolved").at("solver").at("lambda").get<double>();
  const double nu = 0.03;
  CHECK(lambda == doctest::Approx(0.99 * nu * nu).epsilon(1e-12));
  CHECK(summary.at("resolved").at("defaults_interpolated").get<bool>() == false);
  CHECK(summary.at("psnr_restored").get<double>() > 0.0);

  // determinism: identical spec, byte-identical artifacts
  ExperimentSpec again = spec;
  again.output_dir = (tmp.path / "run2").string();
  CHECK(run_experiment(again).exit_code == kExitOk);
  CHECK(slurp(tmp.path / "run1" / "trace.csv") == slurp(tmp.path / "run2" / "trace.csv"));
  CHECK(slurp(tmp.path / "run1" / "restored.png") == slurp(tmp.path / "run2" / "restored.png"));
  CHECK(slurp(tmp.path / "run1" / "degraded.png") == slurp(tmp.path / "run2" / "degraded.png"));
}

TEST_CASE("hypothesis failure and override exit codes") {
  TempDir tmp("pnp_exp_hyp");
  ExperimentSpec spec = quick_deblur_spec(tmp.path, "bad");
  spec.solver["lambda"] = 10.0;  // lambda * L_f far above 1
  CHECK(run_experiment(spec).exit_code == kExitHypothesisFail);

  spec.name = "forced";
  spec.output_dir = (tmp.path / "forced").string();
  spec.solver["override_hypotheses"] = true;
  spec.solver["max_iter"] = 300;
  const ExperimentOutcome forced = run_experiment(spec);
  CHECK(forced.exit_code == kExitNumericAbort);  // the forced run diverges
}

TEST_CASE("sr and inpaint and denoise-check tasks") {
  TempDir tmp("pnp_exp_tasks");
  const fs::path input = tmp.path / "input.png";
  write_image(input.string(), make_phantom(32, 32), 16);

  ExperimentSpec sr;
  sr.task = Task::SR;
  sr.name = "sr";
  sr.input_path = input.string();
  sr.output_dir = (tmp.path / "sr").string();
  sr.solver["max_iter"] = 40;
  const ExperimentOutcome sr_out = run_experiment(sr);
  CHECK(sr_out.exit_code == kExitOk);
  // restored image recovers the high-resolution grid and beats the
  // nearest-neighbor baseline
  CHECK(read_image((tmp.path / "sr" / "restored.png").string()).height() == 32);
  CHECK(read_image((tmp.path / "sr" / "degraded.png").string()).height() == 16);
  CHECK(sr_out.summary.at("psnr_restored").get<double>() >
        sr_out.summary.at("psnr_degraded").get<double>());

  ExperimentSpec inp;
  inp.task = Task::Inpaint;
  inp.name = "inpaint";
  inp.input_path = input.string();
  inp.output_dir = (tmp.path / "inpaint").string();
  inp.solver["max_iter"] = 50;
  const ExperimentOutcome io = run_experiment(inp);
  CHECK(io.exit_code == kExitOk);
  CHECK(fs::exists(tmp.path / "inpaint" / "mask.png"));
  const nlohmann::json summary =
      nlohmann::json::parse(slurp(tmp.path / "inpaint" / "summary.json"));
  CHECK(summary.at("warmup_iterations").get<int>() == 10);
  CHECK(summary.at("psnr_restored").get<double>() >
        summary.at("psnr_degraded").get<double>());

  ExperimentSpec dc;
  dc.task = Task::DenoiseCheck;
  dc.name = "denoise";
  dc.input_path = input.string();
  dc.output_dir = (tmp.path / "denoise").string();
  dc.solver["sigma"] = 0.05;
  dc.denoiser = {{"kind", "pointwise"}, {"amplitude", 0.9}, {"scale", 0.05}};
  CHECK(run_experiment(dc).exit_code == kExitOk);
  const nlohmann::json ds = nlohmann::json::parse(slurp(tmp.path / "denoise" / "summary.json"));
  CHECK(ds.at("spectral_estimate").get<double>() <= 0.9 * (1 + 1e-4));
}

TEST_CASE("pre-degraded input path") {
  TempDir tmp("pnp_exp_prede");
  // degrade first, then restore from the observation alone
  const fs::path input = tmp.path / "gt.png";
  write_image(input.string(), make_phantom(24, 24), 16);
  ExperimentSpec degr = quick_deblur_spec(tmp.path, "synth");
  degr.input_path = input.string();
  const DegradeResult dr = synthesize_degradation(degr, read_image(input.string()));
  const fs::path obs = tmp.path / "obs.png";
  write_image(obs.string(), dr.observation, 16);

  ExperimentSpec spec = quick_deblur_spec(tmp.path, "blind");
  spec.input_path = obs.string();
  spec.pre_degraded = true;
  const ExperimentOutcome out = run_experiment(spec);
  CHECK(out.exit_code == kExitOk);
  const nlohmann::json summary =
      nlohmann::json::parse(slurp(tmp.path / "blind" / "summary.json"));
  CHECK(!summary.contains("psnr_restored"));  // no ground truth to compare
}

TEST_CASE("batch runs are deterministic") {
  TempDir tmp("pnp_exp_batch");
  std::vector<ExperimentSpec> specs;
  specs.push_back(quick_deblur_spec(tmp.path, "a"));
  specs.push_back(quick_deblur_spec(tmp.path, "b"));
  specs[1].seed = 9;
  CHECK(run_batch(specs, (tmp.path / "batch1").string(), 2) == 0);
  CHECK(run_batch(specs, (tmp.path / "batch2").string(), 1) == 0);
  for (const char* name : {"a", "b"})
    CHECK(slurp(tmp.path / "batch1" / name / "trace.csv") ==
          slurp(tmp.path / "batch2" / name / "trace.csv"));
}

TEST_CASE("verify suite") {
  std::ostringstream quiet;
  CHECK(run_verify_suite(quiet));
  CHECK(quiet.str().find("[FAIL]") == std::string::npos);
}
