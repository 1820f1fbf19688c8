#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "pnp/errors.hpp"

namespace pnp {

// Regular grid over a small box, dimension at most 3. Used only by the
// brute-force prox oracle; the point budget keeps runtimes bounded.
struct GridSpec {
  int dim = 1;
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  double delta = 1e-3;

  GridSpec(int d, std::array<double, 3> low, std::array<double, 3> high, double step)
      : dim(d), lo(low), hi(high), delta(step) {
    if (d < 1 || d > 3) throw ConfigError("grid dimension must be 1, 2 or 3");
    if (!(step > 0)) throw ConfigError("grid resolution must be positive");
    double total = 1;
    for (int i = 0; i < d; ++i) {
      if (!(high[i] > low[i])) throw ConfigError("grid bounds must be increasing");
      total *= std::floor((high[i] - low[i]) / step) + 1;
    }
    if (total > 1e7) throw ConfigError("grid exceeds the 1e7 point budget");
  }

  std::vector<std::int64_t> counts() const {
    std::vector<std::int64_t> c(static_cast<size_t>(dim), 0);
    for (int i = 0; i < dim; ++i)
      c[size_t(i)] = std::int64_t(std::floor((hi[i] - lo[i]) / delta)) + 1;
    return c;
  }
};

// Grid argmin of 1/2||y - z||^2 + phi(z). phi returns nullopt where it is
// not evaluable (treated as +inf). By prox-regularity the minimizer is unique
// within the resolution; an argmin on the box boundary means the box missed
// it and is rejected. Evaluation parallelizes across slabs of the first axis.
inline std::vector<double> brute_force_prox(
    const std::function<std::optional<double>(std::span<const double>)>& phi,
    std::span<const double> y, const GridSpec& grid) {
  if (std::int64_t(y.size()) != grid.dim) throw DimensionError("query dimension mismatch");
  const auto counts = grid.counts();
  std::int64_t total = 1;
  for (const auto c : counts) total *= c;

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::int64_t index = -1;
  };

  auto point_at = [&](std::int64_t flat, std::array<double, 3>& z) {
    for (int d = grid.dim - 1; d >= 0; --d) {
      const std::int64_t c = counts[size_t(d)];
      z[size_t(d)] = grid.lo[size_t(d)] + double(flat % c) * grid.delta;
      flat /= c;
    }
  };

  auto scan = [&](std::int64_t begin, std::int64_t end) {
    Best best;
    std::array<double, 3> z{};
    for (std::int64_t i = begin; i < end; ++i) {
      point_at(i, z);
      const auto pv = phi(std::span<const double>(z.data(), size_t(grid.dim)));
      if (!pv) continue;
      double obj = *pv;
      for (int d = 0; d < grid.dim; ++d) obj += 0.5 * (y[size_t(d)] - z[size_t(d)]) * (y[size_t(d)] - z[size_t(d)]);
      if (obj < best.value) best = {obj, i};
    }
    return best;
  };

  const unsigned n_workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::vector<std::future<Best>> futures;
  const std::int64_t chunk = (total + n_workers - 1) / n_workers;
  for (unsigned w = 0; w < n_workers; ++w) {
    const std::int64_t b = std::int64_t(w) * chunk;
    if (b >= total) break;
    futures.push_back(
        std::async(std::launch::async, scan, b, std::min(total, b + chunk)));
  }
  Best best;
  for (auto& f : futures) {
    const Best b = f.get();
    if (b.index >= 0 && b.value < best.value) best = b;
  }
  if (best.index < 0) throw NumericError("no feasible grid point");

  std::array<double, 3> z{};
  point_at(best.index, z);
  // boundary hit means the box did not contain the minimizer
  std::int64_t flat = best.index;
  for (int d = grid.dim - 1; d >= 0; --d) {
    const std::int64_t c = counts[size_t(d)];
    const std::int64_t idx = flat % c;
    flat /= c;
    if (idx == 0 || idx == c - 1)
      throw NumericError("grid argmin on the box boundary; enlarge the bounds");
  }
  return std::vector<double>(z.begin(), z.begin() + grid.dim);
}

}  // namespace pnp
