#pragma once

// JSON configuration grammar (see README) and the two-column absorption CSV.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pbec/model.hpp"

namespace pbec {

using json = nlohmann::json;

/// Reads "omega,rate" rows. A non-numeric first row is treated as a header.
inline TabulatedProfile read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open absorption profile '" + path.string() + "'");
  TabulatedProfile profile;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double w = 0.0, r = 0.0;
    if (!(fields >> w >> r)) {
      if (row == 1) continue;
      throw ConfigError("absorption profile '" + path.string() + "': malformed row " + std::to_string(row));
    }
    profile.omega.push_back(w);
    profile.rate.push_back(r);
  }
  return profile;
}

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline void reject_unknown(const json& j, const std::string& section, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
      throw ConfigError("unknown key '" + section + "." + key + "'");
  }
}

} // namespace detail

inline json to_json(const AbsorptionProfile& profile) {
  if (const auto* f = std::get_if<FlatProfile>(&profile)) return {{"kind", "flat"}, {"peak_rate", f->peak_rate}};
  if (const auto* g = std::get_if<GaussianProfile>(&profile))
    return {{"kind", "gaussian"}, {"peak_rate", g->peak_rate}, {"center", g->center}, {"width", g->width}};
  const auto& t = std::get<TabulatedProfile>(profile);
  json points = json::array();
  for (std::size_t i = 0; i < t.omega.size(); ++i) points.push_back({t.omega[i], t.rate[i]});
  return {{"kind", "tabulated"}, {"points", points}};
}

inline json to_json(const ScenarioConfig& c) {
  json pump = {{"scenario", to_string(c.pump.scenario)},
               {"kappa", c.pump.kappa},
               {"two_level", {{"omega_s", c.pump.two_level.omega_s}, {"g_s", c.pump.two_level.g_s}}}};
  if (c.pump.t_hot) pump["t_hot"] = *c.pump.t_hot;
  if (!c.pump.kappa_per_mode.empty()) pump["kappa_per_mode"] = c.pump.kappa_per_mode;
  json solver = {{"tolerance", c.solver.tolerance},
                 {"max_iterations", c.solver.max_iterations},
                 {"f0_level", c.solver.f0_level},
                 {"threshold_rel_tol", c.solver.threshold_rel_tol},
                 {"evolve_rel_tol", c.solver.evolve_rel_tol},
                 {"evolve_abs_tol", c.solver.evolve_abs_tol}};
  if (c.solver.conserved_excitations) solver["conserved_excitations"] = *c.solver.conserved_excitations;
  return {{"ladder",
           {{"omega0", c.ladder.omega0},
            {"epsilon", c.ladder.epsilon},
            {"m_max", c.ladder.m_max},
            {"polarization", c.ladder.polarization}}},
          {"dye",
           {{"n_molecules", c.dye.n_molecules},
            {"omega_d", c.dye.omega_d},
            {"t_cold", c.dye.t_cold},
            {"gamma_up", c.dye.gamma_up},
            {"gamma_down", c.dye.gamma_down},
            {"absorption", to_json(c.dye.absorption)}}},
          {"pump", pump},
          {"solver", solver}};
}

/// Parses and validates a configuration. Relative CSV paths resolve against base_dir.
inline ScenarioConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  using detail::get_or;
  ScenarioConfig c;
  try {
    detail::reject_unknown(j, "", {"ladder", "dye", "pump", "solver"});
    if (j.contains("ladder")) {
      const auto& l = j.at("ladder");
      detail::reject_unknown(l, "ladder", {"omega0", "epsilon", "m_max", "polarization"});
      c.ladder.omega0 = get_or(l, "omega0", c.ladder.omega0);
      c.ladder.epsilon = get_or(l, "epsilon", c.ladder.epsilon);
      c.ladder.m_max = get_or(l, "m_max", c.ladder.m_max);
      c.ladder.polarization = get_or(l, "polarization", c.ladder.polarization);
    }
    if (j.contains("dye")) {
      const auto& d = j.at("dye");
      detail::reject_unknown(d, "dye", {"n_molecules", "omega_d", "t_cold", "gamma_up", "gamma_down", "absorption"});
      c.dye.n_molecules = get_or(d, "n_molecules", c.dye.n_molecules);
      c.dye.omega_d = get_or(d, "omega_d", c.dye.omega_d);
      c.dye.t_cold = get_or(d, "t_cold", c.dye.t_cold);
      c.dye.gamma_up = get_or(d, "gamma_up", c.dye.gamma_up);
      c.dye.gamma_down = get_or(d, "gamma_down", c.dye.gamma_down);
      if (d.contains("absorption")) {
        const auto& a = d.at("absorption");
        const auto kind = a.at("kind").get<std::string>();
        if (kind == "flat") {
          detail::reject_unknown(a, "dye.absorption", {"kind", "peak_rate"});
          c.dye.absorption = FlatProfile{get_or(a, "peak_rate", 1.0)};
        } else if (kind == "gaussian") {
          detail::reject_unknown(a, "dye.absorption", {"kind", "peak_rate", "center", "width"});
          GaussianProfile g;
          g.peak_rate = get_or(a, "peak_rate", g.peak_rate);
          g.center = get_or(a, "center", c.dye.omega_d);
          g.width = get_or(a, "width", g.width);
          c.dye.absorption = g;
        } else if (kind == "tabulated") {
          detail::reject_unknown(a, "dye.absorption", {"kind", "points", "csv"});
          if (a.contains("csv")) {
            std::filesystem::path p = a.at("csv").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            c.dye.absorption = read_profile_csv(p);
          } else {
            TabulatedProfile t;
            for (const auto& row : a.at("points")) {
              t.omega.push_back(row.at(0).get<double>());
              t.rate.push_back(row.at(1).get<double>());
            }
            c.dye.absorption = t;
          }
        } else {
          throw ConfigError("dye.absorption.kind must be flat|gaussian|tabulated (got '" + kind + "')");
        }
      }
    }
    if (j.contains("pump")) {
      const auto& p = j.at("pump");
      detail::reject_unknown(p, "pump", {"scenario", "t_hot", "kappa", "kappa_per_mode", "two_level"});
      if (p.contains("scenario")) c.pump.scenario = scenario_from_string(p.at("scenario").get<std::string>());
      if (p.contains("t_hot")) c.pump.t_hot = p.at("t_hot").get<double>();
      c.pump.kappa = get_or(p, "kappa", c.pump.kappa);
      c.pump.kappa_per_mode = get_or(p, "kappa_per_mode", c.pump.kappa_per_mode);
      if (p.contains("two_level")) {
        const auto& t = p.at("two_level");
        detail::reject_unknown(t, "pump.two_level", {"omega_s", "g_s"});
        c.pump.two_level.omega_s = get_or(t, "omega_s", c.pump.two_level.omega_s);
        c.pump.two_level.g_s = get_or(t, "g_s", c.pump.two_level.g_s);
      }
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      detail::reject_unknown(s, "solver", {"tolerance", "max_iterations", "f0_level", "threshold_rel_tol",
                                           "evolve_rel_tol", "evolve_abs_tol", "conserved_excitations"});
      c.solver.tolerance = get_or(s, "tolerance", c.solver.tolerance);
      c.solver.max_iterations = get_or(s, "max_iterations", c.solver.max_iterations);
      c.solver.f0_level = get_or(s, "f0_level", c.solver.f0_level);
      c.solver.threshold_rel_tol = get_or(s, "threshold_rel_tol", c.solver.threshold_rel_tol);
      c.solver.evolve_rel_tol = get_or(s, "evolve_rel_tol", c.solver.evolve_rel_tol);
      c.solver.evolve_abs_tol = get_or(s, "evolve_abs_tol", c.solver.evolve_abs_tol);
      if (s.contains("conserved_excitations") && !s.at("conserved_excitations").is_null())
        c.solver.conserved_excitations = s.at("conserved_excitations").get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration '" + path.string() + "': " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

inline void save_config(const ScenarioConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << to_json(c).dump(2) << '\n';
}

} // namespace pbec
