#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "pnp/solver/config.hpp"

namespace pnp {

enum class Task { Deblur, SR, Inpaint, DenoiseCheck };

inline std::string task_name(Task t) {
  switch (t) {
    case Task::Deblur: return "deblur";
    case Task::SR: return "sr";
    case Task::Inpaint: return "inpaint";
    case Task::DenoiseCheck: return "denoise-check";
  }
  throw ConfigError("bad task");
}

inline Task task_from_name(const std::string& s) {
  if (s == "deblur") return Task::Deblur;
  if (s == "sr") return Task::SR;
  if (s == "inpaint") return Task::Inpaint;
  if (s == "denoise-check") return Task::DenoiseCheck;
  throw ConfigError("unknown task: " + s);
}

struct DefaultParams {
  double lambda = 0;
  double sigma = 0;
  bool exact = true;  // false when linearly interpolated/extended in nu
};

// Per-noise-level defaults for (lambda, sigma), anchored at
// nu in {2.55, 7.65, 12.75}/255 and scaled by nu^2 and nu respectively.
// Outside the anchors the ratios are interpolated linearly in nu and the
// result is flagged. Inpainting uses fixed values instead of nu scaling.
inline DefaultParams default_params(Algorithm algo, double nu, Task task = Task::Deblur) {
  if (task == Task::Inpaint) {
    if (algo != Algorithm::DRS)
      throw ConfigError("inpainting defaults exist only for the drs algorithm");
    return {2.0, 15.0 / 255.0, true};
  }
  if (!(nu > 0)) throw ConfigError("defaults need a positive noise level");

  static constexpr std::array<double, 3> anchors = {2.55 / 255.0, 7.65 / 255.0, 12.75 / 255.0};
  struct Row {
    std::array<double, 3> lambda_over_nu2, sigma_over_nu;
  };
  Row row;
  switch (algo) {
    case Algorithm::PGD:
    case Algorithm::DRSdiff:
    case Algorithm::ADMM:
      row = {{0.99, 0.99, 0.99}, {0.75, 0.5, 0.5}};
      break;
    case Algorithm::DRS:
      row = {{5.0, 1.5, 0.75}, {2.0, 1.0, 0.5}};
      break;
    default:
      throw ConfigError("unsupported algorithm for defaults");
  }

  auto at = [&](int i) {
    return DefaultParams{row.lambda_over_nu2[size_t(i)] * nu * nu,
                         row.sigma_over_nu[size_t(i)] * nu, true};
  };
  for (int i = 0; i < 3; ++i)
    if (std::abs(nu - anchors[size_t(i)]) <= 1e-9) return at(i);

  // linear interpolation in nu of the ratio tables, extended at the ends
  int seg = nu < anchors[1] ? 0 : 1;
  const double t = (nu - anchors[size_t(seg)]) / (anchors[size_t(seg) + 1] - anchors[size_t(seg)]);
  const double l_ratio = row.lambda_over_nu2[size_t(seg)] +
                         t * (row.lambda_over_nu2[size_t(seg) + 1] - row.lambda_over_nu2[size_t(seg)]);
  const double s_ratio = row.sigma_over_nu[size_t(seg)] +
                         t * (row.sigma_over_nu[size_t(seg) + 1] - row.sigma_over_nu[size_t(seg)]);
  return {l_ratio * nu * nu, s_ratio * nu, false};
}

// One reproducible experiment: degradation synthesis, solver run, outputs.
struct ExperimentSpec {
  Task task = Task::Deblur;
  std::string name = "experiment";
  std::string input_path;        // ground truth, or pre-degraded when set below
  bool pre_degraded = false;
  nlohmann::json denoiser;       // denoiser document; empty -> task default
  nlohmann::json degradation;    // degradation parameters; empty -> task default
  nlohmann::json solver;         // raw solver fields; defaults filled at run time
  std::string output_dir;
  std::uint64_t seed = 0;

  void validate_paths() const {
    namespace fs = std::filesystem;
    if (input_path.empty() || !fs::exists(input_path))
      throw ConfigError("input image does not exist: " + input_path);
    if (output_dir.empty()) throw ConfigError("output directory not set");
  }
};

inline void to_json(nlohmann::json& j, const ExperimentSpec& s) {
  j = nlohmann::json{{"task", task_name(s.task)},
                     {"name", s.name},
                     {"input", s.input_path},
                     {"pre_degraded", s.pre_degraded},
                     {"denoiser", s.denoiser},
                     {"degradation", s.degradation},
                     {"solver", s.solver},
                     {"output_dir", s.output_dir},
                     {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, ExperimentSpec& s) {
  s.task = task_from_name(j.value("task", std::string("deblur")));
  s.name = j.value("name", std::string("experiment"));
  s.input_path = j.value("input", std::string());
  s.pre_degraded = j.value("pre_degraded", false);
  s.denoiser = j.value("denoiser", nlohmann::json::object());
  s.degradation = j.value("degradation", nlohmann::json::object());
  s.solver = j.value("solver", nlohmann::json::object());
  s.output_dir = j.value("output_dir", std::string());
  s.seed = j.value("seed", std::uint64_t(0));
}

}  // namespace pnp
