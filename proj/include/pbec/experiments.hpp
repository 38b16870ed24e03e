#pragma once

// Sweep drivers producing the CSV datasets: pump sweeps (occupation vs
// pump temperature), phase diagrams (threshold vs T_c) and current scans.
// Grid points are solved concurrently; rows always come out in grid order.

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbec/config_io.hpp"
#include "pbec/kinetics.hpp"
#include "pbec/model.hpp"
#include "pbec/parallel.hpp"
#include "pbec/thermo.hpp"
#include "pbec/thresholds.hpp"
#include "pbec/version.hpp"

namespace pbec {

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

enum class SweepParameter { THot, TCold, Kappa, OmegaS };

inline const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::THot: return "T_h";
    case SweepParameter::TCold: return "T_c";
    case SweepParameter::Kappa: return "kappa";
    case SweepParameter::OmegaS: return "omega_s";
  }
  return "?";
}

inline SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "T_h" || s == "t_hot") return SweepParameter::THot;
  if (s == "T_c" || s == "t_cold") return SweepParameter::TCold;
  if (s == "kappa") return SweepParameter::Kappa;
  if (s == "omega_s") return SweepParameter::OmegaS;
  throw ConfigError("sweep parameter must be one of T_h|T_c|kappa|omega_s (got '" + s + "')");
}

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  int count = 2;
  bool log_spacing = false;

  /// A single-point grid is allowed when lo == hi and count == 1.
  std::vector<double> values() const {
    if (count == 1 && lo == hi) {
      if (!std::isfinite(lo)) throw ConfigError("grid endpoint must be finite");
      return {lo};
    }
    detail::require(count >= 2, "grid.count", ">= 2", count);
    detail::require(hi > lo, "grid.hi", "above grid.lo", hi);
    if (log_spacing) detail::require(lo > 0.0, "grid.lo", "positive for log spacing", lo);
    return scan_grid(lo, hi, count, log_spacing);
  }
};

struct SweepSpec {
  SweepParameter parameter = SweepParameter::THot;
  Grid grid;
  std::vector<ScenarioKind> scenarios{ScenarioKind::DyePumped};
};

/// Convergence record for one output row.
struct PointStatus {
  std::string scenario;
  double value = 0.0;
  bool converged = false;
  std::string message;
};

struct Dataset {
  std::vector<std::string> comments;  // emitted as '# ' lines before the header
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<PointStatus> points;    // one per row
  nlohmann::json metadata = nlohmann::json::object();

  bool all_converged() const {
    return std::all_of(points.begin(), points.end(), [](const PointStatus& p) { return p.converged; });
  }

  std::string to_csv() const {
    std::ostringstream out;
    for (const auto& c : comments) out << "# " << c << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    return out.str();
  }

  void write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << to_csv();
  }
};

/// Sidecar describing a run: config hash, code version, UTC timestamp and a
/// convergence entry for every row (matched by row index).
inline nlohmann::json make_manifest(const Dataset& data, const std::string& config_hash,
                                    const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto& p = data.points[i];
    nlohmann::json entry = {{"row", i}, {"scenario", p.scenario}, {"value", p.value}, {"converged", p.converged}};
    if (!p.message.empty()) entry["message"] = p.message;
    points.push_back(entry);
  }
  return {{"config_hash", config_hash}, {"version", version},   {"timestamp", stamp},
          {"command", command},         {"metadata", data.metadata}, {"points", points}};
}

/// Copy of cfg with the swept parameter set to value.
inline ScenarioConfig apply_parameter(ScenarioConfig cfg, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::THot: cfg.pump.t_hot = value; break;
    case SweepParameter::TCold: cfg.dye.t_cold = value; break;
    case SweepParameter::Kappa:
      cfg.pump.kappa = value;
      cfg.pump.kappa_per_mode.clear();
      break;
    case SweepParameter::OmegaS: cfg.pump.two_level.omega_s = value; break;
  }
  return cfg;
}

/// Relative width of the condensation knee: T(phi = 0.9) / T(phi = 0.1) - 1,
/// where phi rescales f0 to [0, 1] over the sweep. Interpolates linearly in
/// log T. Returns nan when the sweep does not contain the knee.
inline double knee_width(const std::vector<double>& t_hot, const std::vector<double>& f0) {
  if (t_hot.size() != f0.size() || t_hot.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const auto [lo_it, hi_it] = std::minmax_element(f0.begin(), f0.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return std::numeric_limits<double>::quiet_NaN();
  auto crossing = [&](double phi) -> std::optional<double> {
    const double level = lo + phi * (hi - lo);
    for (std::size_t i = 1; i < f0.size(); ++i) {
      if (f0[i - 1] < level && f0[i] >= level) {
        const double s = (level - f0[i - 1]) / (f0[i] - f0[i - 1]);
        return std::exp(std::log(t_hot[i - 1]) + s * (std::log(t_hot[i]) - std::log(t_hot[i - 1])));
      }
    }
    return std::nullopt;
  };
  const auto a = crossing(0.1), b = crossing(0.9);
  if (!a || !b) return std::numeric_limits<double>::quiet_NaN();
  return *b / *a - 1.0;
}

/// Analytic thresholds (K) of a configuration, for plot markers.
inline nlohmann::json threshold_markers(const ScenarioConfig& cfg) {
  nlohmann::json out = nlohmann::json::object();
  const double tc = cfg.dye.t_cold;
  try {
    out["reversible_dye"] = reversible_dye_threshold(cfg.ladder.omega0, cfg.dye.omega_d, tc);
  } catch (const std::exception&) {
  }
  try {
    out["two_level"] = two_level_threshold(cfg.ladder.omega0, cfg.pump.two_level.omega_s, tc);
  } catch (const std::exception&) {
  }
  try {
    const auto c = continuum_threshold(cfg.ladder, tc);
    out["continuum"] = c.t_hot_critical;
    out["continuum_omega_bar_h"] = c.omega_bar_h;
    out["reversible_at_omega_bar_h"] = two_level_threshold(cfg.ladder.omega0, c.omega_bar_h, tc);
  } catch (const std::exception&) {
  }
  return out;
}

namespace detail {
inline const double nan = std::numeric_limits<double>::quiet_NaN();

template <class Fn>
PointStatus guarded(const std::string& scenario, double value, Fn&& fn) {
  PointStatus status{scenario, value, false, {}};
  try {
    fn();
    status.converged = true;
  } catch (const SolverError& e) {
    status.message = e.what();
  } catch (const std::invalid_argument& e) {
    status.message = e.what();
  } catch (const std::runtime_error& e) {
    status.message = e.what();
  }
  return status;
}

inline void require_hot_temperature(const ScenarioConfig& cfg, const SweepSpec& spec) {
  if (spec.parameter == SweepParameter::THot) return;
  for (auto k : spec.scenarios)
    if (k != ScenarioKind::DyePumped && !cfg.pump.t_hot)
      throw ConfigError("pump.t_hot is required for external scenarios unless T_h is swept");
}
} // namespace detail

/// Occupation sweep: one row per (scenario, grid value), scenarios in the
/// order given, grid values ascending.
inline Dataset run_pump_sweep(const ScenarioConfig& cfg, const SweepSpec& spec) {
  cfg.validate();
  detail::require_hot_temperature(cfg, spec);
  const auto grid = spec.grid.values();
  if (spec.scenarios.empty()) throw ConfigError("sweep needs at least one scenario");
  struct Result {
    std::vector<std::string> row;
    PointStatus status;
    double t_hot = detail::nan;
    double f0 = detail::nan;
  };
  const std::size_t total = grid.size() * spec.scenarios.size();
  auto results = parallel_map<Result>(total, [&](std::size_t i) {
    const auto kind = spec.scenarios[i / grid.size()];
    const double value = grid[i % grid.size()];
    const auto point_cfg = apply_parameter(cfg, spec.parameter, value);
    Result r;
    double n0 = detail::nan, nph = detail::nan, f0 = detail::nan, t_fit = detail::nan, mu_fit = detail::nan;
    double t_hot = point_cfg.pump.t_hot.value_or(detail::nan);
    r.status = detail::guarded(to_string(kind), value, [&] {
      point_cfg.validate();
      const auto model = make_kinetic_model(point_cfg, kind, point_cfg.pump.t_hot);
      if (model.t_hot && *model.t_hot > 0.0) t_hot = frequency_to_temperature(*model.t_hot);
      const auto s = solve_steady_state(model, point_cfg.solver);
      n0 = s.state.n[0];
      nph = s.photon_number;
      f0 = s.condensate_fraction;
      if (s.fit) {
        t_fit = frequency_to_temperature(s.fit->temperature);
        mu_fit = s.fit->mu;
      }
    });
    r.t_hot = t_hot;
    r.f0 = f0;
    r.row = {to_string(kind),
             format_number(t_hot),
             format_number(point_cfg.dye.t_cold),
             format_number(point_cfg.pump.kappa),
             format_number(point_cfg.pump.two_level.omega_s),
             format_number(n0),
             format_number(nph),
             format_number(f0),
             format_number(t_fit),
             format_number(mu_fit),
             r.status.converged ? "1" : "0"};
    return r;
  });

  Dataset out;
  out.columns = {"scenario", "T_h", "T_c", "kappa", "omega_s", "n0", "N_ph", "f0", "T_fit", "mu_fit", "converged"};
  out.metadata["swept"] = to_string(spec.parameter);
  out.metadata["thresholds"] = threshold_markers(cfg);
  for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
    std::vector<double> ts, fs;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto& r = results[s * grid.size() + i];
      if (r.status.converged) {
        ts.push_back(r.t_hot);
        fs.push_back(r.f0);
      }
      out.rows.push_back(std::move(r.row));
      out.points.push_back(std::move(r.status));
    }
    if (spec.parameter == SweepParameter::THot) {
      const double w = knee_width(ts, fs);
      if (std::isfinite(w)) out.metadata["knee_width"][to_string(spec.scenarios[s])] = w;
    }
  }
  return out;
}

struct PhaseDiagramOptions {
  double scan_lo_factor = 0.5;  // numeric scan spans [lo, hi] x continuum threshold
  double scan_hi_factor = 2.0;
  int scan_points = 16;
  bool numeric = true;
};

/// Threshold pump temperature vs solvent temperature for the many-level
/// external model: continuum balance, reversible bound at the mean reservoir
/// photon energy, and the steady-state f0 crossing.
inline Dataset run_phase_diagram(const ScenarioConfig& cfg, const Grid& t_cold_grid,
                                 const PhaseDiagramOptions& opts = {}) {
  cfg.validate();
  const auto grid = t_cold_grid.values();
  struct Result {
    std::vector<std::string> row;
    PointStatus status;
  };
  // Each point runs its own numeric scan, which is parallel internally.
  std::vector<Result> results(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double tc = grid[i];
    auto point_cfg = apply_parameter(cfg, SweepParameter::TCold, tc);
    double cont = detail::nan, rev = detail::nan, num = detail::nan, wbar = detail::nan;
    auto& r = results[i];
    r.status = detail::guarded("external-many-level", tc, [&] {
      point_cfg.validate();
      const auto c = continuum_threshold(point_cfg.ladder, tc);
      cont = c.t_hot_critical;
      wbar = c.omega_bar_h;
      rev = two_level_threshold(point_cfg.ladder.omega0, wbar, tc);
      if (opts.numeric) {
        ThresholdScan scan{opts.scan_lo_factor * cont, opts.scan_hi_factor * cont, opts.scan_points, true,
                           point_cfg.solver.f0_level, point_cfg.solver.threshold_rel_tol};
        num = numeric_threshold(
                  [&](double th) { return make_kinetic_model(point_cfg, ScenarioKind::ExternalManyLevel, th); },
                  scan, point_cfg.solver)
                  .t_hot_critical;
      }
    });
    r.row = {format_number(tc),   format_number(cont), format_number(rev),
             format_number(num),  format_number(wbar), r.status.converged ? "1" : "0"};
  }
  Dataset out;
  out.columns = {"T_c", "T_h_continuum", "T_h_two_level", "T_h_numeric", "omega_bar_h", "converged"};
  for (auto& r : results) {
    out.rows.push_back(std::move(r.row));
    out.points.push_back(std::move(r.status));
  }
  return out;
}

/// Heat currents, work, efficiency and entropy production per pump temperature.
inline Dataset run_currents_scan(const ScenarioConfig& cfg, const Grid& t_hot_grid,
                                 const std::vector<ScenarioKind>& scenarios = {ScenarioKind::DyePumped,
                                                                               ScenarioKind::ExternalManyLevel}) {
  cfg.validate();
  const auto grid = t_hot_grid.values();
  if (scenarios.empty()) throw ConfigError("currents scan needs at least one scenario");
  struct Result {
    std::vector<std::string> row;
    PointStatus status;
  };
  const std::size_t total = grid.size() * scenarios.size();
  auto results = parallel_map<Result>(total, [&](std::size_t i) {
    const auto kind = scenarios[i / grid.size()];
    const double th = grid[i % grid.size()];
    ThermoReport rep;
    double f0 = detail::nan;
    bool have = false;
    Result r;
    r.status = detail::guarded(to_string(kind), th, [&] {
      const auto model = make_kinetic_model(cfg, kind, th);
      const auto s = solve_steady_state(model, cfg.solver);
      rep = thermo_report(s, model);
      f0 = s.condensate_fraction;
      have = true;
    });
    auto v = [&](double x) { return format_number(have ? x : detail::nan); };
    r.row = {to_string(kind), format_number(th), v(rep.J_hot), v(rep.J_cold), v(rep.W), v(rep.W0),
             v(rep.L_incoherent), v(rep.eta), v(rep.eta_carnot), v(rep.sigma), v(rep.output_entropy), v(f0),
             r.status.converged ? "1" : "0"};
    return r;
  });
  Dataset out;
  out.columns = {"scenario", "T_h",   "J_hot",      "J_cold", "W",     "W0",        "L_incoherent",
                 "eta",      "eta_carnot", "sigma", "S_out", "f0",    "converged"};
  out.metadata["thresholds"] = threshold_markers(cfg);
  for (auto& r : results) {
    out.rows.push_back(std::move(r.row));
    out.points.push_back(std::move(r.status));
  }
  return out;
}

/// Per-mode steady-state table with '#' metadata lines.
inline Dataset steady_state_table(const SteadyState& s, const KineticModel& model) {
  Dataset out;
  const double nan = detail::nan;
  out.comments = {"p_e=" + format_number(s.state.p_e), "N_ph=" + format_number(s.photon_number),
                  "f0=" + format_number(s.condensate_fraction),
                  "T_fit=" + format_number(s.fit ? frequency_to_temperature(s.fit->temperature) : nan),
                  "mu_fit=" + format_number(s.fit ? s.fit->mu : nan),
                  "residual=" + format_number(s.relative_residual)};
  out.columns = {"m", "g_m", "omega_m", "n_m", "n_m_h"};
  for (std::size_t m = 0; m < model.size(); ++m)
    out.rows.push_back({std::to_string(m), format_number(model.degeneracy()[m]), format_number(model.omega()[m]),
                        format_number(s.state.n[m]), format_number(model.n_hot[m])});
  return out;
}

} // namespace pbec
