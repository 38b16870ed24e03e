#pragma once

// Bose occupations, Kennard-Stepanov emission/absorption tables, effective
// temperatures and the dye chemical potential.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbec/model.hpp"

namespace pbec {

/// 1 / (exp((omega - mu) / T) - 1). All arguments in Trad/s.
inline double bose_occupation(double omega, double temperature, double mu) {
  if (!(temperature > 0.0)) throw std::invalid_argument("bose_occupation: temperature must be positive");
  if (!(omega > mu)) throw std::invalid_argument("bose_occupation: omega must exceed mu");
  return 1.0 / std::expm1((omega - mu) / temperature);
}

enum class RateProvenance { Analytic, Tabulated };

/// Per-mode dye rates. emission[m] = absorption[m] * exp(log_ratio[m]) with
/// log_ratio[m] = -(omega_m - omega_d) / T_c.
struct RateTable {
  std::vector<double> omega;
  std::vector<double> degeneracy;
  std::vector<double> absorption;
  std::vector<double> emission;
  std::vector<double> log_ratio;
  RateProvenance provenance = RateProvenance::Analytic;

  std::size_t size() const { return omega.size(); }
};

inline RateTable build_rate_table(const ModeSpectrum& spectrum, const DyeModel& dye) {
  const double t_cold = dye.t_cold_frequency();
  if (!(t_cold > 0.0)) throw std::invalid_argument("build_rate_table: t_cold must be positive");
  RateTable table;
  table.omega = spectrum.omega;
  table.degeneracy = spectrum.degeneracy;
  table.provenance = std::holds_alternative<TabulatedProfile>(dye.absorption) ? RateProvenance::Tabulated
                                                                              : RateProvenance::Analytic;
  const std::size_t n = spectrum.size();
  table.absorption.resize(n);
  table.emission.resize(n);
  table.log_ratio.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    double a = 0.0;
    try {
      a = absorption_rate(dye.absorption, spectrum.omega[m]);
    } catch (const std::out_of_range& e) {
      throw std::invalid_argument(std::string("build_rate_table: coverage gap: ") + e.what());
    }
    if (!(a > 0.0))
      throw std::invalid_argument("build_rate_table: absorption must be positive at omega = " +
                                  detail::fmt_num(spectrum.omega[m]));
    table.absorption[m] = a;
    table.log_ratio[m] = -(spectrum.omega[m] - dye.omega_d) / t_cold;
    table.emission[m] = a * std::exp(table.log_ratio[m]);
  }
  return table;
}

/// Temperature of a bosonic reservoir with gain/loss prefactor ratio
/// gain/loss = exp(-omega / T_eff). `inverted` marks gain >= loss, where T_eff
/// is negative or (at equality) divergent.
struct EffectiveTemperature {
  double value = 0.0;  // Trad/s
  bool inverted = false;
};

inline EffectiveTemperature effective_temperature(double gain, double loss, double omega) {
  if (!(gain > 0.0) || !(loss > 0.0))
    throw std::invalid_argument("effective_temperature: rates must be positive");
  const double log_ratio = std::log(gain) - std::log(loss);
  EffectiveTemperature t;
  t.inverted = gain >= loss;
  t.value = log_ratio == 0.0 ? std::numeric_limits<double>::infinity() : -omega / log_ratio;
  return t;
}

/// mu = omega_d + T_c ln(p_e / p_g).
inline double dye_chemical_potential(double p_e, const DyeModel& dye) {
  if (!(p_e > 0.0 && p_e < 1.0)) throw std::invalid_argument("dye_chemical_potential: p_e must lie in (0, 1)");
  return dye.omega_d + dye.t_cold_frequency() * (std::log(p_e) - std::log1p(-p_e));
}

} // namespace pbec
