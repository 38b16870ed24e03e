#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pbec/units.hpp"

namespace pbec {

/// Raised for invalid configuration values. The message names the field and bound.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline void require(bool ok, const std::string& field, const std::string& what, double got) {
  if (!ok) throw ConfigError(field + " must be " + what + " (got " + fmt_num(got) + ")");
}
} // namespace detail

/// A list of cavity levels (frequency, degeneracy), sorted by frequency.
/// Index 0 is the ground mode.
struct ModeSpectrum {
  std::vector<double> omega;
  std::vector<double> degeneracy;

  std::size_t size() const { return omega.size(); }
  bool operator==(const ModeSpectrum&) const = default;
};

/// Transverse modes of a 2D harmonic trap: omega_m = omega0 + m*epsilon, g_m = m + 1.
struct ModeLadder {
  double omega0 = 3400.0;  // Trad/s
  double epsilon = 0.25;   // Trad/s
  int m_max = 800;
  bool polarization = false;  // doubles every degeneracy

  double omega(int m) const { return omega0 + m * epsilon; }
  double degeneracy(int m) const { return (polarization ? 2.0 : 1.0) * (m + 1); }
  double omega_max() const { return omega(m_max); }

  ModeSpectrum spectrum() const {
    ModeSpectrum s;
    s.omega.reserve(m_max + 1);
    s.degeneracy.reserve(m_max + 1);
    for (int m = 0; m <= m_max; ++m) {
      s.omega.push_back(omega(m));
      s.degeneracy.push_back(degeneracy(m));
    }
    return s;
  }

  void validate() const {
    detail::require(omega0 > 0.0, "ladder.omega0", "positive", omega0);
    detail::require(epsilon > 0.0, "ladder.epsilon", "positive", epsilon);
    detail::require(m_max >= 1, "ladder.m_max", ">= 1", m_max);
  }

  bool operator==(const ModeLadder&) const = default;
};

// Absorption profiles Gamma^a(omega), per molecule, in 1/ns.

struct FlatProfile {
  double peak_rate = 1.0;
  bool operator==(const FlatProfile&) const = default;
};

struct GaussianProfile {
  double peak_rate = 1.0;
  double center = 3500.0;
  double width = 100.0;
  bool operator==(const GaussianProfile&) const = default;
};

/// Linear interpolation between (omega, rate) samples; queries outside the
/// sampled range are errors.
struct TabulatedProfile {
  std::vector<double> omega;
  std::vector<double> rate;
  bool operator==(const TabulatedProfile&) const = default;
};

using AbsorptionProfile = std::variant<FlatProfile, GaussianProfile, TabulatedProfile>;

inline double absorption_rate(const AbsorptionProfile& profile, double omega) {
  struct Visitor {
    double w;
    double operator()(const FlatProfile& p) const { return p.peak_rate; }
    double operator()(const GaussianProfile& p) const {
      const double x = (w - p.center) / p.width;
      return p.peak_rate * std::exp(-0.5 * x * x);
    }
    double operator()(const TabulatedProfile& p) const {
      if (p.omega.empty() || w < p.omega.front() || w > p.omega.back())
        throw std::out_of_range("absorption profile does not cover omega = " + detail::fmt_num(w));
      auto hi = std::upper_bound(p.omega.begin(), p.omega.end(), w);
      if (hi == p.omega.end()) return p.rate.back();
      const auto i = static_cast<std::size_t>(hi - p.omega.begin());
      const double t = (w - p.omega[i - 1]) / (p.omega[i] - p.omega[i - 1]);
      return p.rate[i - 1] + t * (p.rate[i] - p.rate[i - 1]);
    }
  };
  return std::visit(Visitor{omega}, profile);
}

inline void validate_profile(const AbsorptionProfile& profile) {
  if (const auto* g = std::get_if<GaussianProfile>(&profile)) {
    detail::require(g->peak_rate > 0.0, "dye.absorption.peak_rate", "positive", g->peak_rate);
    detail::require(g->width > 0.0, "dye.absorption.width", "positive", g->width);
  } else if (const auto* f = std::get_if<FlatProfile>(&profile)) {
    detail::require(f->peak_rate > 0.0, "dye.absorption.peak_rate", "positive", f->peak_rate);
  } else {
    const auto& t = std::get<TabulatedProfile>(profile);
    if (t.omega.size() != t.rate.size())
      throw ConfigError("dye.absorption: frequency and rate columns differ in length");
    if (t.omega.size() < 2) throw ConfigError("dye.absorption: tabulated profile needs at least 2 points");
    for (std::size_t i = 1; i < t.omega.size(); ++i)
      if (!(t.omega[i] > t.omega[i - 1]))
        throw ConfigError("dye.absorption: tabulated frequencies must be strictly increasing (row " +
                          std::to_string(i + 1) + ")");
    for (double r : t.rate) detail::require(r >= 0.0, "dye.absorption.rate", "non-negative", r);
  }
}

struct DyeModel {
  double n_molecules = 1e9;
  double omega_d = 3500.0;  // zero-phonon frequency, Trad/s
  double t_cold = 300.0;    // solvent temperature, K
  AbsorptionProfile absorption = FlatProfile{};
  double gamma_up = 0.0;     // direct pump rate, 1/ns
  double gamma_down = 0.25;  // direct decay rate, 1/ns

  double t_cold_frequency() const { return temperature_to_frequency(t_cold); }

  void validate() const {
    detail::require(n_molecules >= 1.0, "dye.n_molecules", ">= 1", n_molecules);
    detail::require(omega_d > 0.0, "dye.omega_d", "positive", omega_d);
    detail::require(t_cold > 0.0, "dye.t_cold", "positive", t_cold);
    detail::require(gamma_up >= 0.0, "dye.gamma_up", "non-negative", gamma_up);
    detail::require(gamma_down >= 0.0, "dye.gamma_down", "non-negative", gamma_down);
    validate_profile(absorption);
  }

  bool operator==(const DyeModel&) const = default;
};

enum class ScenarioKind { DyePumped, ExternalTwoLevel, ExternalManyLevel };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::DyePumped: return "dye";
    case ScenarioKind::ExternalTwoLevel: return "external-two-level";
    case ScenarioKind::ExternalManyLevel: return "external-many-level";
  }
  return "?";
}

inline ScenarioKind scenario_from_string(const std::string& s) {
  if (s == "dye") return ScenarioKind::DyePumped;
  if (s == "external-two-level") return ScenarioKind::ExternalTwoLevel;
  if (s == "external-many-level") return ScenarioKind::ExternalManyLevel;
  throw ConfigError("pump.scenario must be one of dye|external-two-level|external-many-level (got '" + s + "')");
}

/// Excited level of the two-level reduction (ground level keeps g_0 = 1).
struct TwoLevelReduction {
  double omega_s = 3500.0;
  double g_s = 100.0;
  bool operator==(const TwoLevelReduction&) const = default;
};

/// Pump description shared by all scenarios, so one file can drive
/// sweeps that compare scenarios.
struct PumpConfig {
  ScenarioKind scenario = ScenarioKind::DyePumped;
  std::optional<double> t_hot;          // K; for dye pumping sets gamma_up = gamma_down * exp(-omega_d / T_h)
  double kappa = 1e-3;                  // 1/ns, uniform
  std::vector<double> kappa_per_mode;   // overrides kappa when non-empty
  TwoLevelReduction two_level;

  bool operator==(const PumpConfig&) const = default;
};

struct SolverSettings {
  double tolerance = 1e-10;      // steady-state residual, relative to N_d * max Gamma^a
  int max_iterations = 4000;
  double f0_level = 0.01;        // condensate-fraction level defining a numeric threshold
  double threshold_rel_tol = 1e-6;
  double evolve_rel_tol = 1e-10;
  double evolve_abs_tol = 1e-14;
  std::optional<double> conserved_excitations;  // closed systems only

  void validate() const {
    detail::require(tolerance > 0.0, "solver.tolerance", "positive", tolerance);
    detail::require(max_iterations >= 10, "solver.max_iterations", ">= 10", max_iterations);
    detail::require(f0_level > 0.0 && f0_level < 1.0, "solver.f0_level", "in (0, 1)", f0_level);
    detail::require(threshold_rel_tol > 0.0, "solver.threshold_rel_tol", "positive", threshold_rel_tol);
    detail::require(evolve_rel_tol > 0.0, "solver.evolve_rel_tol", "positive", evolve_rel_tol);
    detail::require(evolve_abs_tol > 0.0, "solver.evolve_abs_tol", "positive", evolve_abs_tol);
    if (conserved_excitations)
      detail::require(*conserved_excitations >= 0.0, "solver.conserved_excitations", "non-negative",
                      *conserved_excitations);
  }

  bool operator==(const SolverSettings&) const = default;
};

// Pump scenarios as seen by the kinetics.

struct DyePumped {
  double gamma_up = 0.0;
  double gamma_down = 0.0;
  std::vector<double> kappa;  // per mode loss rates
};

struct ExternalReservoir {
  double t_hot = 0.0;          // K
  std::vector<double> kappa;   // per mode coupling rates
  std::optional<TwoLevelReduction> two_level;
};

using PumpScenario = std::variant<DyePumped, ExternalReservoir>;

struct ScenarioConfig {
  ModeLadder ladder;
  DyeModel dye;
  PumpConfig pump;
  SolverSettings solver;

  /// Spectrum used by a scenario: the full ladder, or {omega0, omega_s} for the two-level reduction.
  ModeSpectrum spectrum(ScenarioKind kind) const {
    if (kind == ScenarioKind::ExternalTwoLevel)
      return ModeSpectrum{{ladder.omega0, pump.two_level.omega_s}, {1.0, pump.two_level.g_s}};
    return ladder.spectrum();
  }
  ModeSpectrum spectrum() const { return spectrum(pump.scenario); }

  std::vector<double> kappa_for(const ModeSpectrum& s) const {
    if (!pump.kappa_per_mode.empty()) {
      if (pump.kappa_per_mode.size() != s.size())
        throw ConfigError("pump.kappa_per_mode must have one entry per mode (" + std::to_string(s.size()) +
                          "), got " + std::to_string(pump.kappa_per_mode.size()));
      return pump.kappa_per_mode;
    }
    return std::vector<double>(s.size(), pump.kappa);
  }

  /// Builds the pump description for a scenario at hot temperature t_hot (K).
  PumpScenario pump_scenario(ScenarioKind kind, std::optional<double> t_hot) const {
    const auto s = spectrum(kind);
    if (kind == ScenarioKind::DyePumped) {
      DyePumped p{dye.gamma_up, dye.gamma_down, kappa_for(s)};
      if (t_hot) {
        if (*t_hot <= 0.0) {
          p.gamma_up = 0.0;
        } else {
          p.gamma_up = dye.gamma_down * std::exp(-dye.omega_d / temperature_to_frequency(*t_hot));
        }
      }
      return p;
    }
    if (!t_hot) throw ConfigError("pump.t_hot is required for external pumping");
    ExternalReservoir r{*t_hot, kappa_for(s), std::nullopt};
    if (kind == ScenarioKind::ExternalTwoLevel) r.two_level = pump.two_level;
    return r;
  }
  PumpScenario pump_scenario() const { return pump_scenario(pump.scenario, pump.t_hot); }

  void validate() const {
    ladder.validate();
    dye.validate();
    solver.validate();
    detail::require(pump.kappa >= 0.0, "pump.kappa", "non-negative", pump.kappa);
    for (double k : pump.kappa_per_mode) detail::require(k >= 0.0, "pump.kappa_per_mode", "non-negative", k);
    if (pump.t_hot) detail::require(*pump.t_hot > 0.0, "pump.t_hot", "positive", *pump.t_hot);
    if (pump.scenario != ScenarioKind::DyePumped && !pump.t_hot)
      throw ConfigError("pump.t_hot is required for external pumping");
    detail::require(pump.two_level.omega_s > ladder.omega0, "pump.two_level.omega_s", "above ladder.omega0",
                    pump.two_level.omega_s);
    detail::require(pump.two_level.g_s >= 1.0, "pump.two_level.g_s", ">= 1", pump.two_level.g_s);
    const auto s = spectrum();
    if (!pump.kappa_per_mode.empty()) (void)kappa_for(s);
    // Absorption must be positive wherever a mode sits.
    auto check_cover = [&](double w) {
      double r = 0.0;
      try {
        r = absorption_rate(dye.absorption, w);
      } catch (const std::out_of_range& e) {
        throw ConfigError(std::string("dye.absorption: ") + e.what());
      }
      detail::require(r > 0.0, "dye.absorption(omega=" + detail::fmt_num(w) + ")", "positive", r);
    };
    for (double w : ladder.spectrum().omega) check_cover(w);
    check_cover(pump.two_level.omega_s);
  }

  bool operator==(const ScenarioConfig&) const = default;
};

} // namespace pbec
