// tools/cli.hpp
//
// Command-line front end: run, sweep, meanfield, oracle, reproduce.
//
// Exit codes: 0 success, 1 configuration error (bad flag, bad value, invalid
// combination), 2 runtime failure. Data goes to stdout or --out; progress
// and timing go to stderr.

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "potts/experiment.hpp"
#include "potts/io.hpp"
#include "potts/mean_field.hpp"

namespace potts::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Configuration problem detected after parsing; maps to exit code 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ModelFlags {
  std::size_t n = 1000;
  std::size_t k = 1000;
  int steps = 8;
  int rmax = 7;
  double j0 = 0.0;
  double sigma_j = 0.0;
  std::string f_mode = "zero";
  double f_down = 0.15;
  double f_stay = 0.75;
  double f_up = 0.10;
  std::uint64_t seed = 1;
  std::string selection = "with_replacement";
  unsigned threads = default_threads();
  long bin_width = 1;
  CLI::Option* f_down_opt = nullptr;
  CLI::Option* f_stay_opt = nullptr;
  CLI::Option* f_up_opt = nullptr;
};

struct OutputFlags {
  std::string out;
  std::string format = "json";
};

inline void add_model_flags(CLI::App* app, ModelFlags& m, bool with_j0 = true) {
  app->add_option("--n", m.n, "number of firms")->check(CLI::PositiveNumber);
  app->add_option("--k", m.k, "number of realizations")->check(CLI::PositiveNumber);
  app->add_option("--steps", m.steps, "time steps per realization")->check(CLI::PositiveNumber);
  app->add_option("--rmax", m.rmax, "highest rating class")->check(CLI::PositiveNumber);
  if (with_j0) app->add_option("--j0", m.j0, "mean coupling");
  app->add_option("--sigma-j", m.sigma_j, "coupling standard deviation")->check(CLI::NonNegativeNumber);
  app->add_option("--f-mode", m.f_mode, "individual dynamics: zero | constant_table")
      ->check(CLI::IsMember({"zero", "constant_table"}));
  m.f_down_opt = app->add_option("--f-down", m.f_down, "exp(f) weight of a downgrade (constant_table)");
  m.f_stay_opt = app->add_option("--f-stay", m.f_stay, "exp(f) weight of no change (constant_table)");
  m.f_up_opt = app->add_option("--f-up", m.f_up, "exp(f) weight of an upgrade (constant_table)");
  app->add_option("--seed", m.seed, "master seed");
  app->add_option("--selection", m.selection, "firm selection: with_replacement | permutation")
      ->check(CLI::IsMember({"with_replacement", "permutation"}));
  app->add_option("--threads", m.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--bin-width", m.bin_width, "histogram bin width")->check(CLI::PositiveNumber);
}

inline void add_output_flags(CLI::App* app, OutputFlags& o) {
  app->add_option("--out", o.out, "output file (default: stdout)");
  app->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

inline ModelParams to_params(const ModelFlags& m) {
  const FMode mode = parse_f_mode(m.f_mode);
  if (mode == FMode::zero) {
    for (const CLI::Option* opt : {m.f_down_opt, m.f_stay_opt, m.f_up_opt})
      if (opt != nullptr && opt->count() > 0)
        throw ConfigError(opt->get_name() + " requires --f-mode constant_table");
  }
  ModelParams p;
  p.n_firms = m.n;
  p.r_max = m.rmax;
  p.steps = m.steps;
  p.j0 = m.j0;
  p.sigma_j = m.sigma_j;
  p.selection = parse_selection(m.selection);
  try {
    p.f_table = mode == FMode::zero ? FTable::zero() : FTable::from_weights(m.f_down, m.f_stay, m.f_up);
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

inline void write_output(const OutputFlags& o, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (o.out.empty()) {
    body(out);
    return;
  }
  std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + o.out + "' for writing: " + std::strerror(errno));
  body(file);
  file.flush();
  if (!file) throw std::runtime_error("write to '" + o.out + "' failed: " + std::strerror(errno));
}

inline void emit_result(const SweepResult& r, const OutputFlags& o, std::ostream& out) {
  const OutputFormat fmt = parse_output_format(o.format);
  if (o.out.empty())
    write(r, fmt, out);
  else
    emit(r, fmt, o.out);
}

inline void log_point(std::ostream& err, std::size_t i, std::size_t total, const SweepPoint& pt) {
  err << "[" << (i + 1) << "/" << total << "] value=" << format_double(pt.value);
  if (pt.stats)
    err << " mean_nd=" << format_double(pt.stats->mean_nd);
  else
    err << " failed: " << pt.error;
  err << '\n';
}

inline SweepResult run_logged(const SweepSpec& spec, unsigned threads, std::ostream& err) {
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  err << "running " << spec.values.size() << " value(s) x " << spec.k_realizations << " realization(s), N="
      << spec.base.n_firms << ", threads=" << threads << '\n';
  SweepResult r = run_sweep(spec, threads, [&](std::size_t i, const SweepPoint& pt) {
    log_point(err, i, spec.values.size(), pt);
  });
  err << "wall time " << r.wall_time_seconds << " s\n";
  return r;
}

inline json meanfield_json(const std::vector<double>& j0_values, std::size_t n, BetaScaling scaling, int steps,
                           int r_max) {
  json rows = json::array();
  for (double j0 : j0_values) {
    const double beta = effective_beta(j0, n, scaling);
    const FixedPointSearch fps = mf_fixed_points(beta);
    json pts = json::array();
    for (const auto& p : fps.points)
      pts.push_back(json{{"p_up", p.p_up}, {"q_down", p.q_down}, {"stable", p.stable}});
    json row{{"j0", j0},
             {"beta", beta},
             {"symmetric_radius", symmetric_point_radius(beta)},
             {"fixed_points", std::move(pts)},
             {"non_converged_starts", fps.non_converged.size()}};
    try {
      row["predicted_nd_fraction"] = predicted_nd_fraction(fps, steps, r_max);
    } catch (const std::runtime_error&) {
      row["predicted_nd_fraction"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  return json{{"n", n}, {"beta_scaling", to_string(scaling)}, {"steps", steps}, {"r_max", r_max},
              {"rows", std::move(rows)}};
}

/// Parses argv and runs the selected subcommand. Never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Firm-rating Potts model: Monte-Carlo ensembles, sweeps and mean-field theory", "potts"};
  app.require_subcommand(1);

  ModelFlags run_m;
  OutputFlags run_o;
  auto* run_cmd = app.add_subcommand("run", "single ensemble of K realizations");
  add_model_flags(run_cmd, run_m);
  add_output_flags(run_cmd, run_o);

  ModelFlags sw_m;
  OutputFlags sw_o;
  double j0_min = 0.0, j0_max = 0.0, sj_min = 0.0, sj_max = 0.0;
  std::size_t j0_points = 1, sj_points = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "ensemble statistics over a range of J0 or sigma_J");
  add_model_flags(sweep_cmd, sw_m);
  add_output_flags(sweep_cmd, sw_o);
  auto* j0_min_opt = sweep_cmd->add_option("--j0-min", j0_min, "first J0 value");
  auto* j0_max_opt = sweep_cmd->add_option("--j0-max", j0_max, "last J0 value");
  auto* j0_pts_opt = sweep_cmd->add_option("--j0-points", j0_points, "number of J0 values");
  auto* sj_min_opt = sweep_cmd->add_option("--sigma-j-min", sj_min, "first sigma_J value");
  auto* sj_max_opt = sweep_cmd->add_option("--sigma-j-max", sj_max, "last sigma_J value");
  auto* sj_pts_opt = sweep_cmd->add_option("--sigma-j-points", sj_points, "number of sigma_J values");

  std::size_t mf_n = 1000;
  double mf_j0_min = 0.0, mf_j0_max = 0.01;
  std::size_t mf_points = 21;
  std::string mf_scaling = "j0n";
  int mf_steps = 8, mf_rmax = 7;
  OutputFlags mf_o;
  auto* mf_cmd = app.add_subcommand("meanfield", "mean-field fixed points and predicted ND over a J0 range");
  mf_cmd->add_option("--n", mf_n, "number of firms")->check(CLI::PositiveNumber);
  mf_cmd->add_option("--j0-min", mf_j0_min, "first J0 value");
  mf_cmd->add_option("--j0-max", mf_j0_max, "last J0 value");
  mf_cmd->add_option("--j0-points", mf_points, "number of J0 values");
  mf_cmd->add_option("--beta-scaling", mf_scaling, "j0n | bare")->check(CLI::IsMember({"j0n", "bare"}));
  mf_cmd->add_option("--steps", mf_steps, "horizon")->check(CLI::NonNegativeNumber);
  mf_cmd->add_option("--rmax", mf_rmax, "highest rating class")->check(CLI::PositiveNumber);
  add_output_flags(mf_cmd, mf_o);

  double or_p = 0.0, or_q = 0.0, or_grid = 0.1;
  int or_steps = 8, or_rmax = 7;
  OutputFlags or_o;
  auto* or_cmd = app.add_subcommand("oracle", "exact chain vs closed-form default fraction");
  auto* p_opt = or_cmd->add_option("--p", or_p, "probability of an upgrade");
  auto* q_opt = or_cmd->add_option("--q", or_q, "probability of a downgrade");
  or_cmd->add_option("--steps", or_steps, "horizon")->check(CLI::NonNegativeNumber);
  or_cmd->add_option("--rmax", or_rmax, "highest rating class")->check(CLI::PositiveNumber);
  or_cmd->add_option("--grid-step", or_grid, "lattice step of the deviation grid");
  add_output_flags(or_cmd, or_o);

  std::string figure;
  ModelFlags rp_m;
  OutputFlags rp_o;
  auto* rp_cmd = app.add_subcommand("reproduce", "preset sweeps for each figure");
  std::vector<std::string> figure_names;
  for (const auto& p : kFigurePresets) figure_names.emplace_back(p.name);
  rp_cmd->add_option("figure", figure, "fig1 | fig2 | fig3-4 | fig5 | fig6-7 | fig8-9")
      ->required()
      ->check(CLI::IsMember(figure_names));
  rp_cmd->add_option("--n", rp_m.n, "number of firms (J0 values rescale by 1000/N)")->check(CLI::PositiveNumber);
  rp_cmd->add_option("--k", rp_m.k, "number of realizations")->check(CLI::PositiveNumber);
  rp_cmd->add_option("--steps", rp_m.steps, "time steps")->check(CLI::PositiveNumber);
  rp_cmd->add_option("--seed", rp_m.seed, "master seed");
  rp_cmd->add_option("--selection", rp_m.selection, "with_replacement | permutation")
      ->check(CLI::IsMember({"with_replacement", "permutation"}));
  rp_cmd->add_option("--threads", rp_m.threads, "worker threads")->check(CLI::PositiveNumber);
  add_output_flags(rp_cmd, rp_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      SweepSpec spec;
      spec.base = to_params(run_m);
      spec.f_mode = parse_f_mode(run_m.f_mode);
      spec.values = {run_m.j0};
      spec.k_realizations = run_m.k;
      spec.master_seed = run_m.seed;
      spec.bin_width = run_m.bin_width;
      emit_result(run_logged(spec, run_m.threads, err), run_o, out);
    } else if (sweep_cmd->parsed()) {
      const bool j0_range = j0_min_opt->count() + j0_max_opt->count() + j0_pts_opt->count() > 0;
      const bool sj_range = sj_min_opt->count() + sj_max_opt->count() + sj_pts_opt->count() > 0;
      if (j0_range && sj_range) throw ConfigError("--sigma-j-min/--sigma-j-max cannot be combined with --j0-min/--j0-max");
      if (!j0_range && !sj_range) throw ConfigError("sweep needs --j0-min/--j0-max or --sigma-j-min/--sigma-j-max");
      SweepSpec spec;
      spec.base = to_params(sw_m);
      spec.f_mode = parse_f_mode(sw_m.f_mode);
      spec.k_realizations = sw_m.k;
      spec.master_seed = sw_m.seed;
      spec.bin_width = sw_m.bin_width;
      try {
        if (j0_range) {
          if (j0_points > 1 && !(j0_max > j0_min)) throw ConfigError("--j0-max must exceed --j0-min");
          spec.sweep_variable = SweepVariable::j0;
          spec.values = linspace(j0_min, j0_max, j0_points);
        } else {
          if (sj_points > 1 && !(sj_max > sj_min)) throw ConfigError("--sigma-j-max must exceed --sigma-j-min");
          if (sj_min < 0.0) throw ConfigError("--sigma-j-min must be >= 0");
          spec.sweep_variable = SweepVariable::sigma_j;
          spec.values = linspace(sj_min, sj_max, sj_points);
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(j0_range ? "--j0-points: " : "--sigma-j-points: ") + e.what());
      }
      emit_result(run_logged(spec, sw_m.threads, err), sw_o, out);
    } else if (mf_cmd->parsed()) {
      if (mf_points > 1 && !(mf_j0_max > mf_j0_min)) throw ConfigError("--j0-max must exceed --j0-min");
      if (mf_points < 1) throw ConfigError("--j0-points must be >= 1");
      const BetaScaling scaling = parse_beta_scaling(mf_scaling);
      if (effective_beta(mf_j0_min, mf_n, scaling) < 0.0) throw ConfigError("--j0-min must be >= 0");
      const json doc = meanfield_json(linspace(mf_j0_min, mf_j0_max, mf_points), mf_n, scaling, mf_steps, mf_rmax);
      write_output(mf_o, out, [&](std::ostream& os) {
        if (mf_o.format == "json") {
          os << doc.dump(2) << '\n';
          return;
        }
        os << "j0,beta,symmetric_radius,stable_points,predicted_nd_fraction\n";
        for (const auto& row : doc["rows"]) {
          std::size_t stable = 0;
          for (const auto& p : row["fixed_points"]) stable += p["stable"].get<bool>() ? 1 : 0;
          os << format_double(row["j0"].get<double>()) << ',' << format_double(row["beta"].get<double>()) << ','
             << format_double(row["symmetric_radius"].get<double>()) << ',' << stable << ','
             << (row["predicted_nd_fraction"].is_null() ? std::string()
                                                         : format_double(row["predicted_nd_fraction"].get<double>()))
             << '\n';
        }
      });
    } else if (or_cmd->parsed()) {
      if ((p_opt->count() > 0) != (q_opt->count() > 0)) throw ConfigError("--p and --q must be given together");
      if (p_opt->count() > 0) {
        if (or_p < 0.0 || or_q < 0.0 || or_p + or_q > 1.0) throw ConfigError("--p/--q must be >= 0 with --p + --q <= 1");
        json doc{{"p_up", or_p}, {"q_down", or_q}, {"steps", or_steps}, {"r_max", or_rmax},
                 {"nd_oracle", nd_oracle(or_p, or_q, or_steps, or_rmax)}};
        doc["nd_polynomial"] = (or_steps == 8 && or_rmax == 7) ? json(nd_polynomial(or_q, or_p)) : json(nullptr);
        write_output(or_o, out, [&](std::ostream& os) {
          if (or_o.format == "json") {
            os << doc.dump(2) << '\n';
          } else {
            os << "p_up,q_down,nd_oracle,nd_polynomial\n"
               << format_double(or_p) << ',' << format_double(or_q) << ','
               << format_double(doc["nd_oracle"].get<double>()) << ','
               << (doc["nd_polynomial"].is_null() ? std::string() : format_double(doc["nd_polynomial"].get<double>()))
               << '\n';
          }
        });
      } else {
        if (!(or_grid > 0.0) || or_grid > 1.0) throw ConfigError("--grid-step must lie in (0, 1]");
        const auto cells = nd_deviation_grid(or_grid);
        double worst = 0.0;
        for (const auto& c : cells) worst = std::max(worst, std::abs(c.deviation()));
        err << "max |polynomial - oracle| over grid: " << worst << '\n';
        write_output(or_o, out, [&](std::ostream& os) {
          if (or_o.format == "json") {
            json rows = json::array();
            for (const auto& c : cells)
              rows.push_back(json{{"p_up", c.p_up}, {"q_down", c.q_down}, {"nd_oracle", c.oracle},
                                  {"nd_polynomial", c.polynomial}, {"deviation", c.deviation()}});
            os << json{{"grid_step", or_grid}, {"max_abs_deviation", worst}, {"cells", rows}}.dump(2) << '\n';
            return;
          }
          os << "p_up,q_down,nd_oracle,nd_polynomial,deviation\n";
          for (const auto& c : cells)
            os << format_double(c.p_up) << ',' << format_double(c.q_down) << ',' << format_double(c.oracle) << ','
               << format_double(c.polynomial) << ',' << format_double(c.deviation()) << '\n';
        });
      }
    } else if (rp_cmd->parsed()) {
      SweepSpec spec = preset_spec(find_preset(figure), rp_m.n, rp_m.k, rp_m.seed);
      spec.base.steps = rp_m.steps;
      spec.base.selection = parse_selection(rp_m.selection);
      err << "reproducing " << figure << ": " << find_preset(figure).description << '\n';
      emit_result(run_logged(spec, rp_m.threads, err), rp_o, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace potts::cli
