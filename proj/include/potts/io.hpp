// include/potts/io.hpp
//
// CSV and JSON emission of sweep results.
//
// CSV has one row per sweep value with the fixed column set in kCsvHeader.
// JSON mirrors SweepResult losslessly (per-realization ND values and
// histograms included) and parses back with sweep_result_from_json().

#pragma once

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "potts/experiment.hpp"

namespace potts {

using json = nlohmann::json;

inline constexpr std::string_view kCsvHeader = "sweep_value,mean_nd,mean_nd_frac,semivar_plus,regime,k,n,steps,seed";

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

// -inf is a legal f entry (forbidden move) but has no JSON number form.
inline json f_entry_to_json(double f) {
  if (f == -std::numeric_limits<double>::infinity()) return "-inf";
  return f;
}

inline double f_entry_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("bad f_table entry " + j.dump());
  }
  return j.get<double>();
}

}  // namespace detail

inline json to_json(const ModelParams& p) {
  return json{{"n_firms", p.n_firms},
              {"r_max", p.r_max},
              {"j0", p.j0},
              {"sigma_j", p.sigma_j},
              {"f_table",
               json::array({detail::f_entry_to_json(p.f_table.values[0]), detail::f_entry_to_json(p.f_table.values[1]),
                            detail::f_entry_to_json(p.f_table.values[2])})},
              {"steps", p.steps},
              {"selection", to_string(p.selection)}};
}

inline ModelParams model_params_from_json(const json& j) {
  ModelParams p;
  p.n_firms = j.at("n_firms").get<std::size_t>();
  p.r_max = j.at("r_max").get<int>();
  p.j0 = j.at("j0").get<double>();
  p.sigma_j = j.at("sigma_j").get<double>();
  const auto& f = j.at("f_table");
  if (!f.is_array() || f.size() != 3) throw std::invalid_argument("f_table must have three entries");
  for (std::size_t v = 0; v < 3; ++v) p.f_table.values[v] = detail::f_entry_from_json(f[v]);
  p.steps = j.at("steps").get<int>();
  p.selection = parse_selection(j.at("selection").get<std::string>());
  return p;
}

inline json to_json(const EnsembleStats& s) {
  json hist = json::array();
  for (const auto& [edge, count] : s.histogram) hist.push_back(json::array({edge, count}));
  return json{{"nd_values", s.nd_values},
              {"mean_nd", s.mean_nd},
              {"semivariance_plus", s.semivariance_plus ? json(*s.semivariance_plus) : json(nullptr)},
              {"bin_width", s.bin_width},
              {"histogram", std::move(hist)}};
}

inline EnsembleStats ensemble_stats_from_json(const json& j) {
  EnsembleStats s;
  s.nd_values = j.at("nd_values").get<std::vector<NdCount>>();
  s.mean_nd = j.at("mean_nd").get<double>();
  if (!j.at("semivariance_plus").is_null()) s.semivariance_plus = j.at("semivariance_plus").get<double>();
  s.bin_width = j.at("bin_width").get<NdCount>();
  for (const auto& cell : j.at("histogram")) s.histogram[cell.at(0).get<NdCount>()] = cell.at(1).get<NdCount>();
  return s;
}

inline json to_json(const PhasePrediction& p) {
  return json{{"j_critical", p.j_critical}, {"sigma_glass", p.sigma_glass}, {"regime", to_string(p.regime)}};
}

inline PhasePrediction phase_prediction_from_json(const json& j) {
  return {j.at("j_critical").get<double>(), j.at("sigma_glass").get<double>(),
          parse_regime(j.at("regime").get<std::string>())};
}

inline json to_json(const SweepSpec& s) {
  return json{{"base", to_json(s.base)},
              {"sweep_variable", to_string(s.sweep_variable)},
              {"values", s.values},
              {"k_realizations", s.k_realizations},
              {"master_seed", s.master_seed},
              {"f_mode", to_string(s.f_mode)},
              {"bin_width", s.bin_width}};
}

inline SweepSpec sweep_spec_from_json(const json& j) {
  SweepSpec s;
  s.base = model_params_from_json(j.at("base"));
  s.sweep_variable = parse_sweep_variable(j.at("sweep_variable").get<std::string>());
  s.values = j.at("values").get<std::vector<double>>();
  s.k_realizations = j.at("k_realizations").get<std::size_t>();
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  s.f_mode = parse_f_mode(j.at("f_mode").get<std::string>());
  s.bin_width = j.at("bin_width").get<NdCount>();
  return s;
}

inline json to_json(const SweepResult& r) {
  json points = json::array();
  for (const auto& pt : r.points) {
    points.push_back(json{{"value", pt.value},
                          {"params", to_json(pt.params)},
                          {"phase", to_json(pt.phase)},
                          {"stats", pt.stats ? to_json(*pt.stats) : json(nullptr)},
                          {"error", pt.error}});
  }
  return json{{"version", r.version},
              {"spec", to_json(r.spec)},
              {"points", std::move(points)},
              {"argmin_mean_nd", r.argmin_mean_nd ? json(*r.argmin_mean_nd) : json(nullptr)},
              {"metadata", json{{"wall_time_seconds", r.wall_time_seconds}}}};
}

inline SweepResult sweep_result_from_json(const json& j) {
  SweepResult r;
  r.version = j.at("version").get<std::string>();
  r.spec = sweep_spec_from_json(j.at("spec"));
  for (const auto& pj : j.at("points")) {
    SweepPoint pt;
    pt.value = pj.at("value").get<double>();
    pt.params = model_params_from_json(pj.at("params"));
    pt.phase = phase_prediction_from_json(pj.at("phase"));
    if (!pj.at("stats").is_null()) pt.stats = ensemble_stats_from_json(pj.at("stats"));
    pt.error = pj.at("error").get<std::string>();
    r.points.push_back(std::move(pt));
  }
  if (!j.at("argmin_mean_nd").is_null()) r.argmin_mean_nd = j.at("argmin_mean_nd").get<std::size_t>();
  r.wall_time_seconds = j.at("metadata").at("wall_time_seconds").get<double>();
  return r;
}

inline void write_json(const SweepResult& r, std::ostream& os) { os << to_json(r).dump(2) << '\n'; }

inline void write_csv(const SweepResult& r, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& pt : r.points) {
    os << format_double(pt.value) << ',';
    if (pt.stats) {
      os << format_double(pt.stats->mean_nd) << ','
         << format_double(pt.stats->mean_nd / static_cast<double>(pt.params.n_firms)) << ','
         << (pt.stats->semivariance_plus ? format_double(*pt.stats->semivariance_plus) : std::string()) << ',';
    } else {
      os << ",,,";
    }
    os << to_string(pt.phase.regime) << ',' << r.spec.k_realizations << ',' << pt.params.n_firms << ','
       << pt.params.steps << ',' << r.spec.master_seed << '\n';
  }
}

enum class OutputFormat { csv, json };

inline OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown output format '" + std::string(text) + "'");
}

inline void write(const SweepResult& r, OutputFormat format, std::ostream& os) {
  format == OutputFormat::csv ? write_csv(r, os) : write_json(r, os);
}

/// Writes `r` to `path`; failures throw std::runtime_error naming the path and cause.
inline void emit(const SweepResult& r, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  write(r, format, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed: " + std::strerror(errno));
}

}  // namespace potts
