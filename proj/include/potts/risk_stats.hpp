// include/potts/risk_stats.hpp
//
// Ensemble statistics of default counts: mean, upper semivariance (the
// downside-risk proxy for unexpected losses) and fixed-width histograms.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "potts/model.hpp"

namespace potts {

/// Histogram keyed by bin lower edge b*w, counting values in [b*w, (b+1)*w).
using Histogram = std::map<NdCount, NdCount>;

inline double mean_nd(std::span<const NdCount> nd_values) {
  if (nd_values.empty()) throw std::invalid_argument("mean_nd: empty sample");
  double sum = 0.0;
  for (NdCount v : nd_values) sum += static_cast<double>(v);
  return sum / static_cast<double>(nd_values.size());
}

/// (1/(K-1)) * sum over ND_k > mean of (ND_k - mean)^2.
inline double upper_semivariance(std::span<const NdCount> nd_values) {
  if (nd_values.size() < 2) throw std::invalid_argument("upper_semivariance: need at least two values");
  const double mean = mean_nd(nd_values);
  double sum = 0.0;
  for (NdCount v : nd_values) {
    const double d = static_cast<double>(v) - mean;
    if (d > 0.0) sum += d * d;
  }
  return sum / static_cast<double>(nd_values.size() - 1);
}

inline Histogram histogram(std::span<const NdCount> nd_values, NdCount bin_width = 1) {
  if (bin_width < 1) throw std::invalid_argument("histogram: bin width must be >= 1");
  Histogram h;
  for (NdCount v : nd_values) {
    NdCount bin = v / bin_width;
    if (v < 0 && v % bin_width != 0) --bin;  // floor for negatives
    ++h[bin * bin_width];
  }
  return h;
}

struct EnsembleStats {
  std::vector<NdCount> nd_values;
  double mean_nd = 0.0;
  /// Absent when fewer than two realizations were run.
  std::optional<double> semivariance_plus;
  NdCount bin_width = 1;
  Histogram histogram;

  friend bool operator==(const EnsembleStats&, const EnsembleStats&) = default;
};

inline EnsembleStats summarize(std::vector<NdCount> nd_values, NdCount bin_width = 1) {
  EnsembleStats s;
  s.mean_nd = mean_nd(nd_values);
  if (nd_values.size() >= 2) s.semivariance_plus = upper_semivariance(nd_values);
  s.bin_width = bin_width;
  s.histogram = histogram(nd_values, bin_width);
  s.nd_values = std::move(nd_values);
  return s;
}

}  // namespace potts
