#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "pnp/core/image.hpp"

namespace pnp {

namespace detail {

// Uniform double in (0,1] from the top 53 bits; never exactly zero so the
// Box-Muller log stays finite.
inline double uniform_unit(std::mt19937_64& rng) {
  return double((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

// Deterministic Gaussian sampler. Box-Muller on explicit mt19937_64 draws,
// so a fixed seed gives bit-identical streams.
class GaussianSampler {
public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = detail::uniform_unit(rng_);
    const double u2 = detail::uniform_unit(rng_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

private:
  std::mt19937_64 rng_;
  double spare_ = 0;
  bool have_spare_ = false;
};

template <typename Scalar>
ImageT<Scalar> add_gaussian_noise(const ImageT<Scalar>& img, double nu, std::uint64_t seed) {
  if (nu < 0) throw ConfigError("noise level must be nonnegative");
  ImageT<Scalar> out = img;
  if (nu == 0) return out;
  GaussianSampler g(seed);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.array()[i] += Scalar(nu * g());
  return out;
}

inline BinaryMask bernoulli_mask(Eigen::Index height, Eigen::Index width, double p,
                                 std::uint64_t seed) {
  if (p < 0 || p > 1) throw ConfigError("mask probability must lie in [0,1]");
  BinaryMask m(height, width);
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < height * width; ++i)
    m.bits[i] = detail::uniform_unit(rng) <= p ? 1 : 0;
  return m;
}

}  // namespace pnp
