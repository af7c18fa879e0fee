// include/potts/mean_field.hpp
//
// Mean-field theory of the f == 0 model: the self-consistency map for the
// up/down probabilities, its fixed points and their stability, the phase
// classification, and the expected default fraction after a finite horizon.
//
// Two routes to the default fraction are provided. nd_oracle() propagates the
// exact (r_max + 1)-state Markov chain of a single independent firm;
// nd_polynomial() evaluates the closed-form degree-8 polynomial for the
// standard horizon (steps = 8, r_max = 7). The chain is the reference.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "potts/model.hpp"

namespace potts {

/// Exponent scale of the self-consistency map.
///   j0n  : beta = J0 * N, which puts the ordering transition at J0 = 3/N.
///   bare : beta = J0.
enum class BetaScaling { j0n, bare };

inline std::string_view to_string(BetaScaling s) noexcept { return s == BetaScaling::j0n ? "j0n" : "bare"; }

inline BetaScaling parse_beta_scaling(std::string_view text) {
  if (text == "j0n") return BetaScaling::j0n;
  if (text == "bare") return BetaScaling::bare;
  throw std::invalid_argument("unknown beta scaling '" + std::string(text) + "'");
}

inline double effective_beta(double j0, std::size_t n_firms, BetaScaling scaling) noexcept {
  return scaling == BetaScaling::j0n ? j0 * static_cast<double>(n_firms) : j0;
}

struct UpDown {
  double p_up = 1.0 / 3.0;
  double q_down = 1.0 / 3.0;
};

struct MeanFieldPoint {
  double p_up = 1.0 / 3.0;
  double q_down = 1.0 / 3.0;
  double beta = 0.0;
  bool stable = false;
};

/// One application of the self-consistency map at coupling beta.
inline UpDown mf_map(double p_up, double q_down, double beta) {
  const double rest = 1.0 - p_up - q_down;
  const std::array<double, 3> x{beta * p_up, beta * q_down, beta * rest};
  const double shift = std::max({x[0], x[1], x[2]});
  const double e_up = std::exp(x[0] - shift);
  const double e_down = std::exp(x[1] - shift);
  const double e_rest = std::exp(x[2] - shift);
  const double z = e_up + e_down + e_rest;
  return {e_up / z, e_down / z};
}

inline UpDown mf_map(const MeanFieldPoint& point) { return mf_map(point.p_up, point.q_down, point.beta); }

inline double mf_residual(double p_up, double q_down, double beta) {
  const UpDown next = mf_map(p_up, q_down, beta);
  return std::hypot(next.p_up - p_up, next.q_down - q_down);
}

/// Row-major 2x2 Jacobian d(p', q')/d(p, q) by central differences.
inline std::array<double, 4> mf_jacobian(double p_up, double q_down, double beta, double h = 1e-6) {
  const UpDown pp = mf_map(p_up + h, q_down, beta);
  const UpDown pm = mf_map(p_up - h, q_down, beta);
  const UpDown qp = mf_map(p_up, q_down + h, beta);
  const UpDown qm = mf_map(p_up, q_down - h, beta);
  return {(pp.p_up - pm.p_up) / (2 * h), (qp.p_up - qm.p_up) / (2 * h),
          (pp.q_down - pm.q_down) / (2 * h), (qp.q_down - qm.q_down) / (2 * h)};
}

inline double spectral_radius(const std::array<double, 4>& m) {
  const double tr = m[0] + m[3];
  const double det = m[0] * m[3] - m[1] * m[2];
  const double disc = tr * tr / 4.0 - det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return std::max(std::abs(tr / 2.0 + s), std::abs(tr / 2.0 - s));
  }
  return std::sqrt(det);  // complex pair, |lambda|^2 = det
}

/// Spectral radius of the map's Jacobian at the symmetric point (1/3, 1/3).
inline double symmetric_point_radius(double beta) { return spectral_radius(mf_jacobian(1.0 / 3.0, 1.0 / 3.0, beta)); }

/// Beta at which the symmetric point loses stability, by bisection of
/// symmetric_point_radius(beta) - 1 on [lo, hi].
inline double critical_beta(double lo = 0.0, double hi = 10.0, double tol = 1e-9) {
  if (symmetric_point_radius(lo) >= 1.0 || symmetric_point_radius(hi) <= 1.0)
    throw std::invalid_argument("critical_beta: bracket does not straddle the instability");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (symmetric_point_radius(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct FixedPointOptions {
  double damping = 0.5;
  double tolerance = 1e-10;
  long max_iterations = 100000;
  /// Starts are (i, j) / grid_divisions with i + j <= grid_divisions.
  int grid_divisions = 6;
  double dedup_distance = 1e-6;
};

struct FixedPointSearch {
  std::vector<MeanFieldPoint> points;
  /// Starting points that did not reach the residual tolerance.
  std::vector<UpDown> non_converged;
};

/// Multi-start damped iteration over a lattice of starting points on the
/// simplex; converged points are deduplicated and classified by Jacobian
/// spectral radius.
inline FixedPointSearch mf_fixed_points(double beta, const FixedPointOptions& opt = {}) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");
  FixedPointSearch out;
  const int g = opt.grid_divisions;
  for (int i = 0; i <= g; ++i) {
    for (int j = 0; i + j <= g; ++j) {
      double p = static_cast<double>(i) / g;
      double q = static_cast<double>(j) / g;
      const UpDown start{p, q};
      bool converged = false;
      for (long it = 0; it < opt.max_iterations; ++it) {
        if (mf_residual(p, q, beta) < opt.tolerance) {
          converged = true;
          break;
        }
        const UpDown next = mf_map(p, q, beta);
        p = (1.0 - opt.damping) * p + opt.damping * next.p_up;
        q = (1.0 - opt.damping) * q + opt.damping * next.q_down;
      }
      if (!converged) {
        out.non_converged.push_back(start);
        continue;
      }
      const bool seen = std::any_of(out.points.begin(), out.points.end(), [&](const MeanFieldPoint& m) {
        return std::hypot(m.p_up - p, m.q_down - q) < opt.dedup_distance;
      });
      if (!seen) out.points.push_back({p, q, beta, spectral_radius(mf_jacobian(p, q, beta)) < 1.0});
    }
  }
  std::sort(out.points.begin(), out.points.end(), [](const MeanFieldPoint& a, const MeanFieldPoint& b) {
    return a.p_up != b.p_up ? a.p_up < b.p_up : a.q_down < b.q_down;
  });
  return out;
}

/// Single-firm transition matrix (row-major, row = from): up with p_up,
/// down with q_down, absorbing at 0, reflecting at r_max.
inline std::vector<double> transition_matrix(double p_up, double q_down, int r_max) {
  const auto n = static_cast<std::size_t>(r_max) + 1;
  std::vector<double> t(n * n, 0.0);
  t[0] = 1.0;
  for (int r = 1; r <= r_max; ++r) {
    const auto from = static_cast<std::size_t>(r);
    const int up = r == r_max ? r_max : r + 1;
    t[from * n + static_cast<std::size_t>(up)] += p_up;
    t[from * n + from - 1] += q_down;
    t[from * n + from] += 1.0 - p_up - q_down;
  }
  return t;
}

/// Distribution over ratings 0..r_max after `steps` steps from a start
/// uniform on {1..r_max}.
inline std::vector<double> rating_distribution(double p_up, double q_down, int steps, int r_max) {
  if (!(p_up >= 0.0) || !(q_down >= 0.0) || p_up + q_down > 1.0 + 1e-12)
    throw std::invalid_argument("need p_up, q_down >= 0 and p_up + q_down <= 1");
  if (steps < 0 || r_max < 1) throw std::invalid_argument("need steps >= 0 and r_max >= 1");
  const auto n = static_cast<std::size_t>(r_max) + 1;
  const auto t = transition_matrix(p_up, q_down, r_max);
  std::vector<double> dist(n, 1.0 / r_max);
  dist[0] = 0.0;
  std::vector<double> next(n);
  for (int s = 0; s < steps; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t from = 0; from < n; ++from)
      for (std::size_t to = 0; to < n; ++to) next[to] += dist[from] * t[from * n + to];
    dist.swap(next);
  }
  return dist;
}

/// Expected default fraction of independent firms after `steps` steps.
inline double nd_oracle(double p_up, double q_down, int steps = 8, int r_max = 7) {
  return rating_distribution(p_up, q_down, steps, r_max)[0];
}

/// Closed-form default fraction for steps = 8, r_max = 7.
///
/// The polynomial is written with the decrease probability as its first
/// variable: it evaluates to 1 at (down = 1, up = 0) and to 0 whenever
/// down = 0. Callers holding a mean-field (p_up, q_down) pass (q_down, p_up).
inline double nd_polynomial(double down, double up) {
  const double p = down;
  const double q = up;
  const double p2 = p * p, p3 = p2 * p, p4 = p3 * p, p5 = p4 * p, p6 = p5 * p, p7 = p6 * p, p8 = p7 * p;
  const double q2 = q * q, q3 = q2 * q, q4 = q3 * q, q5 = q4 * q, q6 = q5 * q, q7 = q6 * q;
  const double bracket = p * q7 + (p - 14 * p2) * q6 + (12 * p2 + p) * q5 +
                         (70 * p4 - 80 * p3 + 10 * p2 + p) * q4 +
                         (70 * p5 - 120 * p4 + 40 * p3 + 8 * p2 + p) * q3 +
                         (30 * p5 - 60 * p4 + 24 * p3 + 6 * p2 + p) * q2 +
                         (-21 * p7 + 80 * p6 - 102 * p5 + 32 * p4 + 12 * p3 + 4 * p2 + p) * q +
                         (-7 * p8 + 21 * p7 - 24 * p6 + 2 * p5 + 8 * p4 + 4 * p3 + 2 * p2 + p);
  return bracket / 7.0;
}

enum class NdRoute { oracle, polynomial };

/// Average default fraction over the three ordered states (0,0), (1,0), (0,1).
inline double nd_ferromagnetic_average(int steps = 8, int r_max = 7, NdRoute route = NdRoute::oracle) {
  if (route == NdRoute::polynomial) {
    if (steps != 8 || r_max != 7) throw std::invalid_argument("closed-form polynomial only covers steps=8, r_max=7");
    return (nd_polynomial(0, 0) + nd_polynomial(0, 1) + nd_polynomial(1, 0)) / 3.0;
  }
  return (nd_oracle(0, 0, steps, r_max) + nd_oracle(1, 0, steps, r_max) + nd_oracle(0, 1, steps, r_max)) / 3.0;
}

struct DeviationCell {
  double p_up = 0.0;
  double q_down = 0.0;
  double oracle = 0.0;
  double polynomial = 0.0;
  double deviation() const noexcept { return polynomial - oracle; }
};

/// Polynomial-vs-chain comparison on the lattice {(i, j) * step : i + j <= 1/step}.
inline std::vector<DeviationCell> nd_deviation_grid(double step = 0.1) {
  if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("grid step must lie in (0, 1]");
  const int m = static_cast<int>(std::lround(1.0 / step));
  std::vector<DeviationCell> cells;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; i + j <= m; ++j) {
      const double p = static_cast<double>(i) / m;
      const double q = static_cast<double>(j) / m;
      cells.push_back({p, q, nd_oracle(p, q), nd_polynomial(q, p)});
    }
  }
  return cells;
}

/// Default fraction averaged over the stable fixed points at beta.
inline double predicted_nd_fraction(const FixedPointSearch& search, int steps = 8, int r_max = 7) {
  double sum = 0.0;
  int count = 0;
  for (const auto& pt : search.points) {
    if (!pt.stable) continue;
    sum += nd_oracle(pt.p_up, std::min(pt.q_down, 1.0 - pt.p_up), steps, r_max);
    ++count;
  }
  if (count == 0) throw std::runtime_error("no stable fixed point found");
  return sum / count;
}

enum class Regime { paramagnetic, ferromagnetic, spin_glass };

inline std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::paramagnetic: return "paramagnetic";
    case Regime::ferromagnetic: return "ferromagnetic";
    case Regime::spin_glass: return "spin_glass";
  }
  return "unknown";
}

inline Regime parse_regime(std::string_view text) {
  if (text == "paramagnetic") return Regime::paramagnetic;
  if (text == "ferromagnetic") return Regime::ferromagnetic;
  if (text == "spin_glass") return Regime::spin_glass;
  throw std::invalid_argument("unknown regime '" + std::string(text) + "'");
}

struct PhasePrediction {
  double j_critical = 0.0;
  double sigma_glass = 0.0;
  Regime regime = Regime::paramagnetic;

  friend bool operator==(const PhasePrediction&, const PhasePrediction&) = default;
};

/// J_c = 3/N, glass threshold 3/sqrt(N).
inline PhasePrediction phase_predict(const ModelParams& params) {
  params.validate();
  const auto n = static_cast<double>(params.n_firms);
  PhasePrediction out{3.0 / n, 3.0 / std::sqrt(n), Regime::paramagnetic};
  if (params.sigma_j >= out.sigma_glass)
    out.regime = Regime::spin_glass;
  else if (params.j0 > out.j_critical)
    out.regime = Regime::ferromagnetic;
  return out;
}

}  // namespace potts
