// pbec: command-line driver for steady states, thresholds and sweeps.
//
// Exit status: 0 all points converged, 2 some points failed, 1 bad
// configuration or arguments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "pbec/pbec.hpp"

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  char byte[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

struct Common {
  std::string config;
  std::string out = "-";
  std::string scenario;
};

void add_common(CLI::App* cmd, Common& c, bool with_scenario) {
  cmd->add_option("--config", c.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output CSV path, '-' for stdout");
  if (with_scenario)
    cmd->add_option("--scenario", c.scenario, "dye | external-two-level | external-many-level");
}

void add_grid(CLI::App* cmd, pbec::Grid& g, const char* what) {
  cmd->add_option("--lo", g.lo, std::string("lowest ") + what)->required();
  cmd->add_option("--hi", g.hi, std::string("highest ") + what)->required();
  cmd->add_option("--count", g.count, "number of grid points")->capture_default_str();
  cmd->add_flag("--log", g.log_spacing, "logarithmic spacing");
}

/// Writes the CSV and, for file outputs, the manifest sidecar. Returns the exit status.
int emit(const pbec::Dataset& data, const Common& c, const pbec::ScenarioConfig& cfg, const std::string& command) {
  if (c.out == "-") {
    std::cout << data.to_csv();
  } else {
    data.write_csv(c.out);
    const auto manifest = pbec::make_manifest(data, sha256_hex(pbec::to_json(cfg).dump()), command);
    std::ofstream(c.out + ".manifest.json") << manifest.dump(2) << '\n';
  }
  for (const auto& p : data.points)
    if (!p.converged) std::cerr << "unconverged: " << p.scenario << " at " << p.value << ": " << p.message << '\n';
  return data.all_converged() ? 0 : 2;
}

pbec::ScenarioConfig load(const Common& c) {
  auto cfg = pbec::load_config(c.config);
  if (!c.scenario.empty()) {
    cfg.pump.scenario = pbec::scenario_from_string(c.scenario);
    cfg.validate();
  }
  return cfg;
}

std::vector<pbec::ScenarioKind> parse_scenarios(const std::vector<std::string>& names,
                                                std::vector<pbec::ScenarioKind> fallback) {
  if (names.empty()) return fallback;
  std::vector<pbec::ScenarioKind> kinds;
  for (const auto& n : names) kinds.push_back(pbec::scenario_from_string(n));
  return kinds;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon condensate rate-equation simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pbec::version));

  Common common;

  auto* steady = app.add_subcommand("steady", "solve one steady state and write per-mode occupations");
  add_common(steady, common, true);
  std::optional<double> steady_t_hot;
  steady->add_option("--t-hot", steady_t_hot, "pump temperature in K (overrides pump.t_hot)");

  auto* threshold = app.add_subcommand("threshold", "analytic and numeric condensation thresholds");
  add_common(threshold, common, true);
  pbec::ThresholdScan scan;
  threshold->add_option("--scan-lo", scan.t_lo, "lowest pump temperature of the numeric scan (K)")
      ->capture_default_str();
  threshold->add_option("--scan-hi", scan.t_hi, "highest pump temperature of the numeric scan (K)")
      ->capture_default_str();
  threshold->add_option("--points", scan.points, "scan points")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "occupations along a parameter grid");
  add_common(sweep, common, false);
  pbec::Grid sweep_grid;
  add_grid(sweep, sweep_grid, "parameter value");
  std::string sweep_param = "T_h";
  sweep->add_option("--param", sweep_param, "T_h | T_c | kappa | omega_s")->capture_default_str();
  std::vector<std::string> sweep_scenarios;
  sweep->add_option("--scenario", sweep_scenarios, "scenarios to sweep (repeatable; default: the configured one)");

  auto* phase = app.add_subcommand("phase-diagram", "threshold pump temperature across solvent temperatures");
  add_common(phase, common, false);
  pbec::Grid phase_grid;
  add_grid(phase, phase_grid, "solvent temperature (K)");
  bool skip_numeric = false;
  phase->add_flag("--no-numeric", skip_numeric, "skip the steady-state scans");

  auto* currents = app.add_subcommand("currents", "heat currents, work, efficiency and entropy production");
  add_common(currents, common, false);
  pbec::Grid currents_grid;
  add_grid(currents, currents_grid, "pump temperature (K)");
  std::vector<std::string> currents_scenarios;
  currents->add_option("--scenario", currents_scenarios,
                       "scenarios to scan (repeatable; default: dye and external-many-level)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg = load(common);
    if (steady->parsed()) {
      auto run_cfg = cfg;
      if (steady_t_hot) run_cfg.pump.t_hot = *steady_t_hot;
      run_cfg.validate();
      const auto model = pbec::make_kinetic_model(run_cfg);
      pbec::Dataset data;
      pbec::PointStatus status{pbec::to_string(run_cfg.pump.scenario), run_cfg.pump.t_hot.value_or(0.0), false, {}};
      try {
        const auto s = pbec::solve_steady_state(model, run_cfg.solver);
        data = pbec::steady_state_table(s, model);
        status.converged = true;
      } catch (const pbec::SolverError& e) {
        data.columns = {"m", "g_m", "omega_m", "n_m", "n_m_h"};
        status.message = e.what();
      }
      // One manifest entry for the whole table.
      data.points.assign(1, status);
      return emit(data, common, run_cfg, "steady");
    }
    if (threshold->parsed()) {
      scan.f0_level = cfg.solver.f0_level;
      scan.rel_tol = cfg.solver.threshold_rel_tol;
      pbec::Dataset data;
      data.columns = {"method", "T_h", "bracket_lo", "bracket_hi", "residual", "converged"};
      auto add = [&](const char* method, auto&& compute) {
        pbec::ThresholdResult r;
        const auto status = pbec::detail::guarded(method, 0.0, [&] { r = compute(); });
        const double nan = std::numeric_limits<double>::quiet_NaN();
        auto v = [&](double x) { return pbec::format_number(status.converged ? x : nan); };
        data.rows.push_back({method, v(r.t_hot_critical), v(r.bracket.first), v(r.bracket.second), v(r.residual),
                             status.converged ? "1" : "0"});
        data.points.push_back(status);
      };
      const double tc = cfg.dye.t_cold;
      add("reversible-dye", [&] {
        pbec::ThresholdResult r;
        r.t_hot_critical = pbec::reversible_dye_threshold(cfg.ladder.omega0, cfg.dye.omega_d, tc);
        r.bracket = {r.t_hot_critical, r.t_hot_critical};
        return r;
      });
      add("two-level", [&] {
        pbec::ThresholdResult r;
        r.t_hot_critical = pbec::two_level_threshold(cfg.ladder.omega0, cfg.pump.two_level.omega_s, tc);
        r.bracket = {r.t_hot_critical, r.t_hot_critical};
        return r;
      });
      add("continuum", [&] { return pbec::continuum_threshold(cfg.ladder, tc); });
      add("numeric", [&] {
        return pbec::numeric_threshold(
            [&](double th) { return pbec::make_kinetic_model(cfg, cfg.pump.scenario, th); }, scan, cfg.solver);
      });
      data.metadata["scenario"] = pbec::to_string(cfg.pump.scenario);
      return emit(data, common, cfg, "threshold");
    }
    if (sweep->parsed()) {
      pbec::SweepSpec spec{pbec::sweep_parameter_from_string(sweep_param), sweep_grid,
                           parse_scenarios(sweep_scenarios, {cfg.pump.scenario})};
      return emit(pbec::run_pump_sweep(cfg, spec), common, cfg, "sweep");
    }
    if (phase->parsed()) {
      pbec::PhaseDiagramOptions opts;
      opts.numeric = !skip_numeric;
      return emit(pbec::run_phase_diagram(cfg, phase_grid, opts), common, cfg, "phase-diagram");
    }
    if (currents->parsed()) {
      const auto kinds = parse_scenarios(
          currents_scenarios, {pbec::ScenarioKind::DyePumped, pbec::ScenarioKind::ExternalManyLevel});
      return emit(pbec::run_currents_scan(cfg, currents_grid, kinds), common, cfg, "currents");
    }
  } catch (const pbec::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
