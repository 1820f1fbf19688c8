#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "pnp/core/image.hpp"

namespace pnp {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TraceRecord {
  int k = 0;
  double objective = kNaN;        // F = lambda f + phi at the current iterate
  double envelope = kNaN;         // DR envelope (DRS variants only)
  double residual_sq = kNaN;      // ||x_k - x_{k-1}||^2
  double min_residual_sq = kNaN;  // running min of residual_sq
  double yz_gap_sq = kNaN;        // ||y_k - z_k||^2 (DRS variants only)
  double psnr = kNaN;             // vs ground truth when available
  double wall_clock = 0;          // seconds since the run started; not in the CSV
};

// Optional per-iteration state kept for audits (envelope recomputation,
// spectral along-trajectory checks, ADMM equivalence).
struct IterateSnapshots {
  std::vector<Image> x;  // driver state
  std::vector<Image> y;
  std::vector<Image> z;
  std::vector<Image> u;  // ADMM dual
};

struct ConvergenceTrace {
  std::string algorithm;
  std::vector<TraceRecord> records;
  std::string stop_reason;  // "converged" | "max-iter" | "numeric-abort"
  double elapsed_seconds = 0;
  IterateSnapshots snapshots;  // empty unless retention was requested

  bool aborted() const { return stop_reason == "numeric-abort"; }
  int iterations() const { return records.empty() ? 0 : records.back().k; }

  const TraceRecord& last() const {
    if (records.empty()) throw NumericError("empty trace");
    return records.back();
  }

  std::vector<double> column(double TraceRecord::* field) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.*field);
    return out;
  }
};

namespace detail {
inline std::string format_cell(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

// Deterministic CSV: identical runs produce byte-identical files.
inline void write_trace_csv(std::ostream& os, const ConvergenceTrace& t) {
  os << "k,F,envelope,residual_sq,min_residual_sq,yz_gap_sq,psnr\n";
  for (const auto& r : t.records) {
    os << r.k << ',' << detail::format_cell(r.objective) << ',' << detail::format_cell(r.envelope)
       << ',' << detail::format_cell(r.residual_sq) << ','
       << detail::format_cell(r.min_residual_sq) << ',' << detail::format_cell(r.yz_gap_sq) << ','
       << detail::format_cell(r.psnr) << '\n';
  }
}

}  // namespace pnp
