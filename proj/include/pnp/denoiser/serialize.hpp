#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnp/denoiser/linear.hpp"
#include "pnp/denoiser/pointwise.hpp"

namespace pnp {

using Json = nlohmann::json;

inline Json kernel_to_json(const ConvKernel& k) {
  std::vector<double> taps(k.taps().data(), k.taps().data() + k.taps().size());
  return Json{{"size", k.size()}, {"taps", taps}};
}

inline ConvKernel kernel_from_json(const Json& j) {
  const Eigen::Index size = j.at("size").get<Eigen::Index>();
  const auto taps = j.at("taps").get<std::vector<double>>();
  if (Eigen::Index(taps.size()) != size * size)
    throw ConfigError("kernel taps length does not match size");
  ConvKernel::TapArray t(size, size);
  for (Eigen::Index i = 0; i < size * size; ++i) t.data()[i] = taps[size_t(i)];
  return ConvKernel(std::move(t));
}

// Denoiser specs serialize with their certified bound so runs are
// reproducible and auditable; loading recomputes the bound and rejects a
// stale document.
inline Json denoiser_to_json(const LinearGSDenoiser& d) {
  return Json{{"kind", "linear"},
              {"sigma", d.sigma()},
              {"lipschitz", d.lipschitz_bound()},
              {"kernel", kernel_to_json(d.filter())},
              {"scale", d.scale()}};
}

inline Json denoiser_to_json(const PointwiseGSDenoiser& d) {
  return Json{{"kind", "pointwise"},
              {"sigma", d.sigma()},
              {"lipschitz", d.lipschitz_bound()},
              {"amplitude", d.amplitude()},
              {"scale", d.scale()}};
}

inline Json denoiser_to_json(const GradientStepDenoiser& d) {
  if (auto* l = dynamic_cast<const LinearGSDenoiser*>(&d)) return denoiser_to_json(*l);
  if (auto* p = dynamic_cast<const PointwiseGSDenoiser*>(&d)) return denoiser_to_json(*p);
  if (auto* r = dynamic_cast<const RelaxedGSDenoiser*>(&d))
    return Json{{"kind", "relaxed"}, {"alpha", r->alpha()}, {"base", denoiser_to_json(r->base())}};
  throw ConfigError("denoiser kind is not serializable");
}

inline std::shared_ptr<GradientStepDenoiser> denoiser_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double sigma = j.value("sigma", 0.0);
  std::shared_ptr<GradientStepDenoiser> d;
  if (kind == "linear") {
    d = std::make_shared<LinearGSDenoiser>(kernel_from_json(j.at("kernel")),
                                           j.at("scale").get<double>(), sigma);
  } else if (kind == "pointwise") {
    double scale = j.value("scale_from_sigma", false) ? sigma : j.at("scale").get<double>();
    if (!(scale > 0)) throw ConfigError("pointwise scale resolved to a nonpositive value");
    d = std::make_shared<PointwiseGSDenoiser>(j.at("amplitude").get<double>(), scale, sigma);
  } else if (kind == "relaxed") {
    d = std::make_shared<RelaxedGSDenoiser>(denoiser_from_json(j.at("base")),
                                            j.at("alpha").get<double>());
  } else {
    throw ConfigError("unknown denoiser kind: " + kind);
  }
  if (j.contains("lipschitz")) {
    const double declared = j.at("lipschitz").get<double>();
    if (std::abs(declared - d->lipschitz_bound()) > 1e-9 * (1.0 + std::abs(declared)))
      throw ConfigError("stored Lipschitz bound disagrees with the recomputed one");
  }
  return d;
}

}  // namespace pnp
