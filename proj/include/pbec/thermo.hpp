#pragma once

// Heat-engine bookkeeping on steady states. Energies in Trad/s, rates in
// 1/ns, so currents are Trad/s per ns and entropy rates are per ns.
//
// Work is the coherent output of the ground mode. Light emitted by excited
// modes is thermal, not work: it leaves with entropy ln(1 + 1/n_m) per
// photon (the Bose entropy at the mode's own effective temperature), which
// enters sigma through output_entropy. For a macroscopic condensate that
// entropy vanishes and sigma reduces to J_cold/T_c - J_hot/T_h.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pbec/kinetics.hpp"

namespace pbec {

struct ThermoReport {
  double J_hot = 0.0;   // drawn from the hot bath
  double J_cold = 0.0;  // delivered to the cold bath (the dye solvent)
  double W = 0.0;       // dye pumping: condensate emission; external: all emission into the reservoir
  double W0 = 0.0;      // condensate-mode emission
  double L_incoherent = 0.0;  // emission by excited modes
  double eta = 0.0;
  double eta_carnot = 0.0;
  double sigma = 0.0;
  double output_entropy = 0.0;  // entropy carried by emitted light, per ns
  double t_hot = 0.0;   // Trad/s
  double t_cold = 0.0;  // Trad/s
};

/// sigma = J_cold/T_c - J_hot/T_h + output_entropy.
inline double entropy_production(const ThermoReport& r) {
  if (!(r.t_cold > 0.0)) throw std::invalid_argument("entropy_production: cold temperature must be positive");
  double sigma = r.J_cold / r.t_cold + r.output_entropy;
  if (r.J_hot != 0.0) {
    if (!(r.t_hot > 0.0)) throw std::invalid_argument("entropy_production: hot temperature must be positive");
    sigma -= r.J_hot / r.t_hot;
  }
  return sigma;
}

/// Relative energy-balance defect: |J_hot - J_cold - W - L| / J_hot for dye
/// pumping, |J_hot - W - J_cold| / max(J_hot, W) for external pumping.
inline double energy_closure(const ThermoReport& r, bool external) {
  if (external) {
    const double scale = std::max(r.J_hot, r.W);
    return scale > 0.0 ? std::abs(r.J_hot - r.W - r.J_cold) / scale : 0.0;
  }
  return r.J_hot > 0.0 ? std::abs(r.J_hot - r.J_cold - r.W - r.L_incoherent) / r.J_hot : 0.0;
}

namespace detail {
inline double photon_entropy(double n) { return n > 0.0 ? std::log1p(1.0 / n) : 0.0; }

inline void check_steady(const SteadyState& s, const KineticModel& model) {
  if (s.state.n.size() != model.size()) throw std::invalid_argument("thermo: steady state does not match model");
  if (s.vacuum) return;
  if (!(s.relative_residual <= 1e-8))
    throw std::invalid_argument("thermo: input is not a steady state (residual " + fmt_num(s.relative_residual) +
                                ")");
}

inline double carnot(double t_cold, double t_hot) { return t_hot > 0.0 ? 1.0 - t_cold / t_hot : 0.0; }
} // namespace detail

inline ThermoReport currents_dye_pumped(const SteadyState& steady, const KineticModel& model) {
  if (model.external) throw std::invalid_argument("currents_dye_pumped: model is externally pumped");
  detail::check_steady(steady, model);
  ThermoReport r;
  r.t_cold = model.t_cold;
  r.t_hot = model.t_hot.value_or(0.0);
  r.eta_carnot = detail::carnot(r.t_cold, r.t_hot);
  if (steady.vacuum) return r;
  const auto& g = model.degeneracy();
  const auto& w = model.omega();
  const auto& n = steady.state.n;
  // Net pump excitation rate N_d (G_up p_g - G_down p_e), taken from the
  // stationary dye balance to avoid cancelling G_up p_g against G_down p_e.
  double pumped = 0.0;
  for (std::size_t m = 0; m < model.size(); ++m) {
    const double emission = g[m] * steady.dye_emission[m];
    pumped += emission;
    r.J_cold += (model.omega_d - w[m]) * emission;
    const double out = g[m] * model.kappa[m] * n[m];
    if (m == 0)
      r.W0 = w[m] * out;
    else
      r.L_incoherent += w[m] * out;
    r.output_entropy += out * detail::photon_entropy(n[m]);
  }
  r.W = r.W0;
  r.J_hot = model.omega_d * pumped;
  r.eta = r.J_hot > 0.0 ? r.W / r.J_hot : 0.0;
  r.sigma = entropy_production(r);
  return r;
}

inline ThermoReport currents_external(const SteadyState& steady, const KineticModel& model) {
  if (!model.external) throw std::invalid_argument("currents_external: model is dye pumped");
  detail::check_steady(steady, model);
  ThermoReport r;
  r.t_cold = model.t_cold;
  r.t_hot = model.t_hot.value_or(0.0);
  r.eta_carnot = detail::carnot(r.t_cold, r.t_hot);
  const auto& g = model.degeneracy();
  const auto& w = model.omega();
  const auto& n = steady.state.n;
  for (std::size_t m = 0; m < model.size(); ++m) {
    // Photons per ns entering mode level m from the reservoir.
    const double inflow = g[m] * model.kappa[m] * (model.n_hot[m] - n[m]);
    const double j = w[m] * inflow;
    if (j > 0.0) {
      r.J_hot += j;
    } else {
      r.W -= j;
      r.output_entropy -= inflow * detail::photon_entropy(n[m]);
      if (m > 0) r.L_incoherent -= j;
    }
    if (m == 0) r.W0 = -j;
    r.J_cold -= g[m] * w[m] * steady.dye_emission[m];
  }
  r.eta = r.J_hot > 0.0 ? r.W0 / r.J_hot : 0.0;
  r.sigma = entropy_production(r);
  return r;
}

inline ThermoReport thermo_report(const SteadyState& steady, const KineticModel& model) {
  return model.external ? currents_external(steady, model) : currents_dye_pumped(steady, model);
}

} // namespace pbec
