// include/potts/experiment.hpp
//
// Seeded ensemble execution and parameter sweeps.
//
// Realization k of an ensemble is seeded with derive_seed(master, k), so the
// outcome of every realization is fixed before any thread picks it up.
// Workers write into slot k of a preallocated result vector and the
// reduction runs afterwards in index order; the thread count therefore never
// changes the output.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <new>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "potts/mean_field.hpp"
#include "potts/model.hpp"
#include "potts/risk_stats.hpp"

namespace potts {

inline constexpr std::string_view kVersion = "0.1.0";

/// SplitMix64 finalizer, a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of realization k. Injective in k for a fixed master: the mixed word
/// master + (k+1)*gamma is distinct for every k because gamma is odd, and
/// splitmix64 is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) noexcept {
  return splitmix64(master + (k + 1) * 0x9E3779B97F4A7C15ULL);
}

inline unsigned default_threads() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs body(k) for k in [0, count) on up to `threads` workers. The first
/// exception thrown by any worker is rethrown after all workers join.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) {
          try {
            body(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Default counts of K independent realizations, in realization order.
inline std::vector<NdCount> run_ensemble_nd(const ModelParams& params, std::size_t k_realizations,
                                            std::uint64_t master_seed, unsigned threads = default_threads()) {
  params.validate();
  if (k_realizations < 1) throw std::invalid_argument("need at least one realization");
  std::vector<NdCount> nd(k_realizations, 0);
  parallel_for(k_realizations, threads,
               [&](std::size_t k) { nd[k] = run_realization(params, derive_seed(master_seed, k)).nd; });
  return nd;
}

inline EnsembleStats run_ensemble(const ModelParams& params, std::size_t k_realizations, std::uint64_t master_seed,
                                  unsigned threads = default_threads(), NdCount bin_width = 1) {
  return summarize(run_ensemble_nd(params, k_realizations, master_seed, threads), bin_width);
}

enum class SweepVariable { j0, sigma_j };
enum class FMode { zero, constant_table };

inline std::string_view to_string(SweepVariable v) noexcept { return v == SweepVariable::j0 ? "j0" : "sigma_j"; }
inline std::string_view to_string(FMode m) noexcept { return m == FMode::zero ? "zero" : "constant_table"; }

inline SweepVariable parse_sweep_variable(std::string_view text) {
  if (text == "j0") return SweepVariable::j0;
  if (text == "sigma_j") return SweepVariable::sigma_j;
  throw std::invalid_argument("unknown sweep variable '" + std::string(text) + "'");
}

inline FMode parse_f_mode(std::string_view text) {
  if (text == "zero") return FMode::zero;
  if (text == "constant_table") return FMode::constant_table;
  throw std::invalid_argument("unknown f mode '" + std::string(text) + "'");
}

struct SweepSpec {
  ModelParams base{};
  SweepVariable sweep_variable = SweepVariable::j0;
  std::vector<double> values;
  std::size_t k_realizations = 1000;
  std::uint64_t master_seed = 1;
  FMode f_mode = FMode::zero;
  NdCount bin_width = 1;

  void validate() const {
    base.validate();
    if (values.empty()) throw std::invalid_argument("sweep values must be non-empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) throw std::invalid_argument("sweep values must be finite");
      if (i > 0 && !(values[i] > values[i - 1])) throw std::invalid_argument("sweep values must be strictly increasing");
    }
    if (sweep_variable == SweepVariable::sigma_j && values.front() < 0.0)
      throw std::invalid_argument("sigma_j sweep values must be >= 0");
    if (k_realizations < 1) throw std::invalid_argument("k_realizations must be >= 1");
    if (bin_width < 1) throw std::invalid_argument("bin width must be >= 1");
  }

  /// Parameters of sweep point `value`; f_mode == zero overrides the base table.
  ModelParams params_at(double value) const {
    ModelParams p = base;
    (sweep_variable == SweepVariable::j0 ? p.j0 : p.sigma_j) = value;
    if (f_mode == FMode::zero) p.f_table = FTable::zero();
    return p;
  }

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct SweepPoint {
  double value = 0.0;
  ModelParams params{};
  PhasePrediction phase{};
  std::optional<EnsembleStats> stats;
  /// Set when the point could not be computed.
  std::string error;

  bool ok() const noexcept { return stats.has_value(); }
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepResult {
  SweepSpec spec{};
  std::vector<SweepPoint> points;
  /// Index into points of the smallest mean ND among successful points.
  std::optional<std::size_t> argmin_mean_nd;
  std::string version{kVersion};
  double wall_time_seconds = 0.0;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Every sweep value reuses the master seed, so neighbouring points share
/// coupling and initial-state noise (common random numbers).
inline SweepResult run_sweep(const SweepSpec& spec, unsigned threads = default_threads(),
                             const std::function<void(std::size_t, const SweepPoint&)>& progress = {}) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult result;
  result.spec = spec;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    SweepPoint pt;
    pt.value = spec.values[i];
    pt.params = spec.params_at(pt.value);
    pt.phase = phase_predict(pt.params);
    try {
      pt.stats = run_ensemble(pt.params, spec.k_realizations, spec.master_seed, threads, spec.bin_width);
    } catch (const std::bad_alloc&) {
      pt.error = "resource exhaustion (allocation failed)";
    } catch (const std::length_error& e) {
      pt.error = std::string("resource exhaustion: ") + e.what();
    }
    if (progress) progress(i, pt);
    result.points.push_back(std::move(pt));
  }
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    if (!result.points[i].ok()) continue;
    if (!result.argmin_mean_nd || result.points[i].stats->mean_nd < result.points[*result.argmin_mean_nd].stats->mean_nd)
      result.argmin_mean_nd = i;
  }
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// `points` evenly spaced values on [lo, hi]; a single point yields {lo}.
inline std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points == 0) throw std::invalid_argument("need at least one point");
  if (points == 1) return {lo};
  if (!(hi > lo)) throw std::invalid_argument("range maximum must exceed minimum");
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return v;
}

/// Figure presets. Coupling means are given at the reference size N = 1000
/// and rescaled by 1000/N, so a preset run at a smaller N keeps its position
/// relative to J_c = 3/N.
struct FigurePreset {
  std::string_view name;
  std::string_view description;
  double sigma_j;
  FMode f_mode;
  double j0_min;
  double j0_max;
  std::size_t points;
};

inline constexpr std::array<FigurePreset, 6> kFigurePresets{{
    {"fig1", "ND distribution, paramagnetic (J0=0.0001, sigma_J=0.001)", 0.001, FMode::zero, 0.0001, 0.0001, 1},
    {"fig2", "ND distribution, ferromagnetic (J0=0.02, sigma_J=0.001)", 0.001, FMode::zero, 0.02, 0.02, 1},
    {"fig3-4", "mean ND and Var+ vs J0, f=0, sigma_J=0.001", 0.001, FMode::zero, 0.0, 0.01, 21},
    {"fig5", "ND/N vs J0 with phase levels, f=0, sigma_J=0.001", 0.001, FMode::zero, 0.0, 0.02, 21},
    {"fig6-7", "mean ND and Var+ vs J0, f=0, sigma_J=0.2", 0.2, FMode::zero, 0.0, 0.04, 21},
    {"fig8-9", "mean ND and Var+ vs J0, constant field exp(f)=(0.15,0.75,0.10)", 0.001, FMode::constant_table, 0.0,
     0.04, 20},
}};

inline const FigurePreset& find_preset(std::string_view name) {
  for (const auto& p : kFigurePresets)
    if (p.name == name) return p;
  throw std::invalid_argument("unknown figure preset '" + std::string(name) + "'");
}

inline FTable constant_field_table() { return FTable::from_weights(0.15, 0.75, 0.10); }

/// Preset spec at the full scale N = K = 1000, 8 steps, unless overridden.
inline SweepSpec preset_spec(const FigurePreset& preset, std::size_t n = 1000, std::size_t k = 1000,
                             std::uint64_t seed = 1) {
  SweepSpec spec;
  spec.base.n_firms = n;
  spec.base.sigma_j = preset.sigma_j;
  spec.base.f_table = preset.f_mode == FMode::constant_table ? constant_field_table() : FTable::zero();
  spec.f_mode = preset.f_mode;
  spec.k_realizations = k;
  spec.master_seed = seed;
  spec.sweep_variable = SweepVariable::j0;
  const double scale = n == 1000 ? 1.0 : 1000.0 / static_cast<double>(n);
  spec.values = linspace(preset.j0_min * scale, preset.j0_max * scale, preset.points);
  spec.base.j0 = spec.values.front();
  return spec;
}

}  // namespace potts
