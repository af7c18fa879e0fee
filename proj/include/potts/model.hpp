// include/potts/model.hpp
//
// Firm-rating Potts model: parameters, coupling matrix, per-realization state
// and the single-site heat-bath dynamics with an absorbing default barrier at
// R = 0 and a reflecting barrier at R = r_max.
//
// Everything here is templated on the random engine so a realization can be
// driven by any UniformRandomBitGenerator; run_realization() fixes the engine
// to std::mt19937_64 so results are a pure function of (params, seed).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace potts {

/// Rating-change variable of one firm.
enum class Spin : std::int8_t { down = -1, stay = 0, up = 1 };

inline constexpr std::array<Spin, 3> kSpins = {Spin::down, Spin::stay, Spin::up};

constexpr int spin_value(Spin s) noexcept { return static_cast<int>(s); }
constexpr std::size_t spin_index(Spin s) noexcept { return static_cast<std::size_t>(spin_value(s) + 1); }
constexpr Spin spin_from_index(std::size_t idx) noexcept { return kSpins[idx]; }

using NdCount = std::int64_t;

/// Order in which firms are visited during one time step.
enum class Selection { with_replacement, permutation };

inline std::string_view to_string(Selection s) noexcept {
  return s == Selection::with_replacement ? "with_replacement" : "permutation";
}

inline Selection parse_selection(std::string_view text) {
  if (text == "with_replacement") return Selection::with_replacement;
  if (text == "permutation") return Selection::permutation;
  throw std::invalid_argument("unknown selection mode '" + std::string(text) + "'");
}

/// Individual-dynamics term f(s), indexed by spin_index(). R-independent.
struct FTable {
  std::array<double, 3> values{0.0, 0.0, 0.0};

  static FTable zero() noexcept { return {}; }

  /// f(s) = log(w_s). Weights need not be normalized; a zero weight forbids
  /// the move.
  static FTable from_weights(double down, double stay, double up) {
    for (double w : {down, stay, up}) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("f weights must be finite and non-negative");
    }
    if (down + stay + up <= 0.0) throw std::invalid_argument("at least one f weight must be positive");
    return FTable{{std::log(down), std::log(stay), std::log(up)}};
  }

  double operator[](Spin s) const noexcept { return values[spin_index(s)]; }
  bool is_zero() const noexcept { return values == std::array<double, 3>{0.0, 0.0, 0.0}; }

  friend bool operator==(const FTable&, const FTable&) = default;
};

struct ModelParams {
  std::size_t n_firms = 1000;
  int r_max = 7;
  double j0 = 0.0;
  double sigma_j = 0.0;
  FTable f_table{};
  int steps = 8;
  Selection selection = Selection::with_replacement;

  void validate() const {
    if (n_firms < 1) throw std::invalid_argument("n_firms must be >= 1");
    if (r_max < 1) throw std::invalid_argument("r_max must be >= 1");
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (!std::isfinite(j0)) throw std::invalid_argument("j0 must be finite");
    if (!(sigma_j >= 0.0) || !std::isfinite(sigma_j)) throw std::invalid_argument("sigma_j must be finite and >= 0");
    bool any_finite = false;
    for (double f : f_table.values) {
      if (std::isnan(f) || f == std::numeric_limits<double>::infinity())
        throw std::invalid_argument("f_table entries must be finite or -inf");
      any_finite = any_finite || std::isfinite(f);
    }
    if (!any_finite) throw std::invalid_argument("f_table must allow at least one spin value");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Dense symmetric N x N coupling matrix with zero diagonal. The only mutator
/// writes both (i, j) and (j, i), so symmetry holds by construction.
class CouplingMatrix {
 public:
  CouplingMatrix() = default;
  explicit CouplingMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }

  void set(std::size_t i, std::size_t j, double value) {
    if (i >= n_ || j >= n_) throw std::out_of_range("coupling index out of range");
    if (i == j) throw std::invalid_argument("diagonal couplings are fixed at zero");
    entries_[i * n_ + j] = value;
    entries_[j * n_ + i] = value;
  }

  /// Row i, i.e. J_ij for all j (equal to column i).
  std::span<const double> row(std::size_t i) const noexcept { return {entries_.data() + i * n_, n_}; }

  std::span<const double> entries() const noexcept { return entries_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

/// Upper triangle i.i.d. N(j0, sigma_j^2), mirrored into the lower triangle.
template <class Urbg>
CouplingMatrix sample_couplings(const ModelParams& params, Urbg& rng) {
  params.validate();
  const std::size_t n = params.n_firms;
  CouplingMatrix couplings(n);
  if (params.sigma_j == 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) couplings.set(i, j, params.j0);
    return couplings;
  }
  std::normal_distribution<double> gauss(params.j0, params.sigma_j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) couplings.set(i, j, gauss(rng));
  return couplings;
}

/// Normalized heat-bath distribution over {-1, 0, +1}.
///
/// `z_norm` is the normalizer of the shifted weights exp(x_v - shift) with
/// shift = max_v x_v, so it lies in [1, 3]; the unshifted Z is
/// exp(log_z()).
struct LocalDistribution {
  std::array<double, 3> probs{};
  double z_norm = 1.0;
  double shift = 0.0;

  double operator[](Spin s) const noexcept { return probs[spin_index(s)]; }
  double log_z() const noexcept { return shift + std::log(z_norm); }
};

/// Softmax of the three exponents h(v) + f(v) with log-sum-exp shift.
inline LocalDistribution softmax3(const std::array<double, 3>& exponents) {
  LocalDistribution dist;
  dist.shift = *std::max_element(exponents.begin(), exponents.end());
  double z = 0.0;
  for (std::size_t v = 0; v < 3; ++v) {
    dist.probs[v] = std::exp(exponents[v] - dist.shift);
    z += dist.probs[v];
  }
  for (double& p : dist.probs) p /= z;
  dist.z_norm = z;
  return dist;
}

/// Ratings, spins and cached local fields h_i(v) = sum_{j != i} J_ij delta(v, s_j).
class EnsembleState {
 public:
  EnsembleState() = default;

  EnsembleState(std::vector<int> ratings, std::vector<Spin> spins, const CouplingMatrix& couplings)
      : ratings_(std::move(ratings)), spins_(std::move(spins)) {
    if (ratings_.size() != spins_.size() || ratings_.size() != couplings.size())
      throw std::invalid_argument("state and coupling sizes differ");
    recompute_fields(couplings);
  }

  std::size_t size() const noexcept { return ratings_.size(); }

  std::span<const int> ratings() const noexcept { return ratings_; }
  std::span<const Spin> spins() const noexcept { return spins_; }
  int rating(std::size_t i) const noexcept { return ratings_[i]; }
  Spin spin(std::size_t i) const noexcept { return spins_[i]; }

  double field(std::size_t i, Spin v) const noexcept { return fields_[i * 3 + spin_index(v)]; }
  std::span<const double> local_fields() const noexcept { return fields_; }

  NdCount defaults() const noexcept {
    return static_cast<NdCount>(std::count(ratings_.begin(), ratings_.end(), 0));
  }

  void set_rating(std::size_t i, int r) noexcept { ratings_[i] = r; }

  /// Changes s_i and patches every cached field in one O(N) pass over row i.
  void set_spin(std::size_t i, Spin s, const CouplingMatrix& couplings) noexcept {
    const Spin old = spins_[i];
    if (old == s) return;
    spins_[i] = s;
    const std::size_t from = spin_index(old);
    const std::size_t to = spin_index(s);
    const auto row = couplings.row(i);
    double* f = fields_.data();
    for (std::size_t j = 0; j < row.size(); ++j, f += 3) {
      f[from] -= row[j];
      f[to] += row[j];
    }
  }

  void recompute_fields(const CouplingMatrix& couplings) {
    fields_ = brute_force_fields(couplings);
  }

  /// From-scratch fields, independent of the incremental cache.
  std::vector<double> brute_force_fields(const CouplingMatrix& couplings) const {
    const std::size_t n = size();
    std::vector<double> out(n * 3, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) out[i * 3 + spin_index(spins_[j])] += couplings(i, j);
    return out;
  }

  /// Largest |cached - recomputed| over all firms and spin values.
  double field_cache_error(const CouplingMatrix& couplings) const {
    const auto fresh = brute_force_fields(couplings);
    double worst = 0.0;
    for (std::size_t k = 0; k < fresh.size(); ++k) worst = std::max(worst, std::abs(fresh[k] - fields_[k]));
    return worst;
  }

  friend bool operator==(const EnsembleState& a, const EnsembleState& b) {
    return a.ratings_ == b.ratings_ && a.spins_ == b.spins_ && a.fields_ == b.fields_;
  }

 private:
  std::vector<int> ratings_;
  std::vector<Spin> spins_;
  std::vector<double> fields_;
};

/// Ratings uniform on {1..r_max} (nobody starts in default), spins uniform
/// on {-1, 0, +1}.
template <class Urbg>
EnsembleState init_state(const ModelParams& params, const CouplingMatrix& couplings, Urbg& rng) {
  params.validate();
  if (couplings.size() != params.n_firms) throw std::invalid_argument("coupling matrix size does not match n_firms");
  std::uniform_int_distribution<int> rating_dist(1, params.r_max);
  std::uniform_int_distribution<int> spin_dist(0, 2);
  std::vector<int> ratings(params.n_firms);
  std::vector<Spin> spins(params.n_firms);
  for (std::size_t i = 0; i < params.n_firms; ++i) {
    ratings[i] = rating_dist(rng);
    spins[i] = spin_from_index(static_cast<std::size_t>(spin_dist(rng)));
  }
  return EnsembleState(std::move(ratings), std::move(spins), couplings);
}

/// Heat-bath conditional of firm `firm` given the current spins of all others.
inline LocalDistribution conditional_distribution(const EnsembleState& state, std::size_t firm, const FTable& f) {
  if (firm >= state.size()) throw std::out_of_range("firm index out of range");
  std::array<double, 3> x{};
  for (Spin v : kSpins) x[spin_index(v)] = state.field(firm, v) + f[v];
  return softmax3(x);
}

/// R(t) = R(t-1) + s + eta(R(t-1), s): absorbing at 0, reflecting at r_max.
constexpr int apply_barrier(int r_prev, Spin s, int r_max) noexcept {
  if (r_prev == 0) return 0;
  if (r_prev == r_max && s == Spin::up) return r_max;
  return r_prev + spin_value(s);
}

template <class Urbg>
Spin sample_spin(const LocalDistribution& dist, Urbg& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < dist.probs[0]) return Spin::down;
  if (u < dist.probs[0] + dist.probs[1]) return Spin::stay;
  return Spin::up;
}

/// Resample s_firm from its conditional, then move R_firm through the barrier.
/// Defaulted firms keep updating their spin; only their rating is frozen.
template <class Urbg>
void micro_update(EnsembleState& state, const CouplingMatrix& couplings, std::size_t firm, const ModelParams& params,
                  Urbg& rng) {
  const Spin s = sample_spin(conditional_distribution(state, firm, params.f_table), rng);
  state.set_spin(firm, s, couplings);
  state.set_rating(firm, apply_barrier(state.rating(firm), s, params.r_max));
}

/// N micro-updates. With-replacement selection draws each firm uniformly;
/// permutation selection visits every firm once in shuffled order.
template <class Urbg>
void time_step(EnsembleState& state, const CouplingMatrix& couplings, const ModelParams& params, Urbg& rng) {
  const std::size_t n = state.size();
  if (params.selection == Selection::with_replacement) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t k = 0; k < n; ++k) micro_update(state, couplings, pick(rng), params, rng);
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t firm : order) micro_update(state, couplings, firm, params, rng);
  }
}

struct RealizationOutcome {
  NdCount nd = 0;
  /// Default count after each step, starting with the initial state (steps + 1 entries).
  std::vector<NdCount> nd_trajectory;
  EnsembleState final_state;
};

using Engine = std::mt19937_64;

/// One realization: fresh couplings, fresh initial state, `steps` time steps.
inline RealizationOutcome run_realization(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  Engine rng(seed);
  const CouplingMatrix couplings = sample_couplings(params, rng);
  EnsembleState state = init_state(params, couplings, rng);
  RealizationOutcome out;
  out.nd_trajectory.reserve(static_cast<std::size_t>(params.steps) + 1);
  out.nd_trajectory.push_back(state.defaults());
  for (int t = 0; t < params.steps; ++t) {
    time_step(state, couplings, params, rng);
    out.nd_trajectory.push_back(state.defaults());
  }
  out.nd = out.nd_trajectory.back();
  out.final_state = std::move(state);
  return out;
}

}  // namespace potts
