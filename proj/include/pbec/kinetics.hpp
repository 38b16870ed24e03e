#pragma once

// Coupled photon/dye rate equations:
//
//   dn_m/dt = N_d [Ge_m (n_m + 1) p_e - Ga_m n_m p_g] + kappa_m [nh_m (n_m + 1) - (nh_m + 1) n_m]
//   dp_e/dt = -(G_down_tot + G_down) p_e + (G_up_tot + G_up) p_g
//
// with G_down_tot = sum_m g_m Ge_m (n_m + 1), G_up_tot = sum_m g_m Ga_m n_m.
// n_m is the occupation of a single mode (already divided by g_m).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "pbec/model.hpp"
#include "pbec/spectral_rates.hpp"

namespace pbec {

/// Steady-state or integrator failure. Carries the best residual / time reached.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double diagnostic)
      : std::runtime_error(what), diagnostic_(diagnostic) {}
  double diagnostic() const { return diagnostic_; }

 private:
  double diagnostic_;
};

struct KineticModel {
  RateTable rates;
  std::vector<double> kappa;
  std::vector<double> n_hot;
  double n_molecules = 1.0;
  double omega_d = 0.0;
  double t_cold = 0.0;  // Trad/s
  double gamma_up = 0.0;
  double gamma_down = 0.0;
  bool external = false;
  std::optional<double> t_hot;  // Trad/s; pump temperature for either scenario
  std::optional<double> conserved_excitations;

  std::size_t size() const { return rates.size(); }
  const std::vector<double>& omega() const { return rates.omega; }
  const std::vector<double>& degeneracy() const { return rates.degeneracy; }

  /// N_d times the largest absorption rate.
  double rate_scale() const {
    return n_molecules * *std::max_element(rates.absorption.begin(), rates.absorption.end());
  }

  bool closed() const {
    if (gamma_up != 0.0 || gamma_down != 0.0) return false;
    return std::all_of(kappa.begin(), kappa.end(), [](double k) { return k == 0.0; });
  }
};

inline KineticModel make_kinetic_model(const ModeSpectrum& spectrum, const DyeModel& dye,
                                       const PumpScenario& pump) {
  for (std::size_t m = 1; m < spectrum.size(); ++m)
    if (!(spectrum.omega[m] > spectrum.omega[m - 1]))
      throw std::invalid_argument("mode frequencies must be strictly increasing");
  KineticModel model;
  model.rates = build_rate_table(spectrum, dye);
  model.n_molecules = dye.n_molecules;
  model.omega_d = dye.omega_d;
  model.t_cold = dye.t_cold_frequency();
  if (const auto* d = std::get_if<DyePumped>(&pump)) {
    model.kappa = d->kappa;
    model.n_hot.assign(spectrum.size(), 0.0);
    model.gamma_up = d->gamma_up;
    model.gamma_down = d->gamma_down;
    if (d->gamma_up > 0.0 && d->gamma_down > d->gamma_up)
      model.t_hot = dye.omega_d / (std::log(d->gamma_down) - std::log(d->gamma_up));
    else if (d->gamma_up == 0.0)
      model.t_hot = 0.0;
  } else {
    const auto& r = std::get<ExternalReservoir>(pump);
    if (!(r.t_hot > 0.0)) throw std::invalid_argument("external reservoir temperature must be positive");
    model.external = true;
    model.kappa = r.kappa;
    model.t_hot = temperature_to_frequency(r.t_hot);
    model.n_hot.resize(spectrum.size());
    for (std::size_t m = 0; m < spectrum.size(); ++m)
      model.n_hot[m] = bose_occupation(spectrum.omega[m], *model.t_hot, 0.0);
  }
  if (model.kappa.size() != spectrum.size())
    throw std::invalid_argument("kappa must have one entry per mode");
  for (double k : model.kappa)
    if (!(k >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
  return model;
}

/// Model for one scenario of a configuration at hot temperature t_hot (K).
inline KineticModel make_kinetic_model(const ScenarioConfig& cfg, ScenarioKind kind,
                                       std::optional<double> t_hot) {
  auto model = make_kinetic_model(cfg.spectrum(kind), cfg.dye, cfg.pump_scenario(kind, t_hot));
  model.conserved_excitations = cfg.solver.conserved_excitations;
  return model;
}

inline KineticModel make_kinetic_model(const ScenarioConfig& cfg) {
  return make_kinetic_model(cfg, cfg.pump.scenario, cfg.pump.t_hot);
}

struct SystemState {
  std::vector<double> n;
  double p_e = 0.0;
};

struct Derivative {
  std::vector<double> dn;
  double dp_e = 0.0;
};

namespace detail {

// State vector layout for the integrator: n_0 .. n_{M-1}, p_e.
inline void rhs_into(const KineticModel& model, std::span<const double> x, std::span<double> dxdt) {
  const std::size_t modes = model.size();
  const double p_e = x[modes];
  const double p_g = 1.0 - p_e;
  const auto& r = model.rates;
  double down_tot = 0.0;
  double up_tot = 0.0;
  for (std::size_t m = 0; m < modes; ++m) {
    const double n = x[m];
    const double emit = r.emission[m] * (n + 1.0);
    const double absorb = r.absorption[m] * n;
    dxdt[m] = model.n_molecules * (emit * p_e - absorb * p_g) +
              model.kappa[m] * (model.n_hot[m] * (n + 1.0) - (model.n_hot[m] + 1.0) * n);
    down_tot += r.degeneracy[m] * emit;
    up_tot += r.degeneracy[m] * absorb;
  }
  dxdt[modes] = -(down_tot + model.gamma_down) * p_e + (up_tot + model.gamma_up) * p_g;
}

} // namespace detail

inline Derivative rhs(const SystemState& state, const KineticModel& model) {
  if (state.n.size() != model.size()) throw std::invalid_argument("rhs: state has wrong number of modes");
  std::vector<double> x(state.n);
  x.push_back(state.p_e);
  std::vector<double> dx(x.size());
  detail::rhs_into(model, x, dx);
  Derivative d;
  d.dp_e = dx.back();
  dx.pop_back();
  d.dn = std::move(dx);
  return d;
}

/// Sum_m g_m n_m + N_d p_e; conserved when kappa = gamma_up = gamma_down = 0.
inline double total_excitations(const SystemState& s, const KineticModel& model) {
  double total = model.n_molecules * s.p_e;
  for (std::size_t m = 0; m < model.size(); ++m) total += model.degeneracy()[m] * s.n[m];
  return total;
}

inline double photon_number(const std::vector<double>& n, const std::vector<double>& g) {
  double total = 0.0;
  for (std::size_t m = 0; m < n.size(); ++m) total += g[m] * n[m];
  return total;
}

struct DistributionFit {
  double temperature = 0.0;  // Trad/s
  double mu = 0.0;           // Trad/s
  std::size_t modes_used = 0;
};

/// Least-squares fit of ln(1 + 1/n_m) = (omega_m - mu) / T over populated modes.
inline DistributionFit fit_distribution(const std::vector<double>& omega, const std::vector<double>& n,
                                        bool exclude_ground) {
  std::vector<double> xs, ys;
  for (std::size_t m = exclude_ground ? 1 : 0; m < n.size(); ++m) {
    if (n[m] > 1e-12) {
      xs.push_back(omega[m]);
      ys.push_back(std::log1p(1.0 / n[m]));
    }
  }
  if (xs.size() < 10) throw std::invalid_argument("fit_distribution: insufficient populated modes");
  const double count = static_cast<double>(xs.size());
  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= count;
  y_mean /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
  }
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) throw std::invalid_argument("fit_distribution: populations do not decrease with frequency");
  return DistributionFit{1.0 / slope, x_mean - y_mean / slope, xs.size()};
}

struct SteadyState {
  SystemState state;
  std::vector<double> omega;
  std::vector<double> degeneracy;
  /// Net dye emission into a single mode of level m, N_d [Ge (n+1) p_e - Ga n p_g],
  /// evaluated without cancellation.
  std::vector<double> dye_emission;
  /// (mu - omega_0) / T_c, with mu the dye chemical potential.
  double log_gain = -std::numeric_limits<double>::infinity();
  double mu_offset = -std::numeric_limits<double>::infinity();  // mu - omega_0, Trad/s
  double residual = 0.0;           // max(g_m |dn_m/dt|, |dp_e/dt|), 1/ns
  double relative_residual = 0.0;  // same, each divided by its gross in+out flux
  double photon_number = 0.0;
  double condensate_fraction = 0.0;
  std::optional<DistributionFit> fit;
  int iterations = 0;
  bool vacuum = false;
};

inline DistributionFit fit_distribution(const SteadyState& steady, bool exclude_ground) {
  return fit_distribution(steady.omega, steady.state.n, exclude_ground);
}

namespace detail {

// Mode occupations that balance every mode equation for a given dye
// chemical potential, parametrised by t = (mu - omega_0) / T_c. Works with
// 1 - exp(t - delta_m) through expm1 so the ground-mode gain margin stays
// accurate arbitrarily close to clamping.
class BalanceEvaluator {
 public:
  explicit BalanceEvaluator(const KineticModel& model) : model_(model) {
    const auto& lr = model.rates.log_ratio;
    delta_.resize(model.size());
    for (std::size_t m = 0; m < model.size(); ++m) delta_[m] = lr[0] - lr[m];
    n_.resize(model.size());
  }

  struct Point {
    double p_e = 0.0;
    double p_g = 1.0;
    bool in_domain = true;
  };

  Point populate(double t) {
    Point pt;
    const double log_z = t - model_.rates.log_ratio[0];
    pt.p_e = 1.0 / (1.0 + std::exp(-log_z));
    pt.p_g = 1.0 / (1.0 + std::exp(log_z));
    const auto& r = model_.rates;
    for (std::size_t m = 0; m < model_.size(); ++m) {
      const double x = t - delta_[m];
      const double dye = model_.n_molecules * r.absorption[m] * pt.p_g;
      const double denom = dye * -std::expm1(x) + model_.kappa[m];
      const double numer = dye * std::exp(x) + model_.kappa[m] * model_.n_hot[m];
      if (!(denom > 0.0)) {
        pt.in_domain = false;
        return pt;
      }
      n_[m] = numer / denom;
      if (!std::isfinite(n_[m])) {
        pt.in_domain = false;
        return pt;
      }
    }
    return pt;
  }

  /// Decreasing in t. -inf outside the domain where every mode balance has a
  /// positive solution.
  double residual(double t) {
    const Point pt = populate(t);
    if (!pt.in_domain) return -std::numeric_limits<double>::infinity();
    const auto& g = model_.degeneracy();
    if (model_.conserved_excitations) {
      double total = model_.n_molecules * pt.p_e;
      for (std::size_t m = 0; m < model_.size(); ++m) total += g[m] * n_[m];
      return *model_.conserved_excitations - total;
    }
    double exchange = 0.0;
    for (std::size_t m = 0; m < model_.size(); ++m)
      exchange += g[m] * model_.kappa[m] * (model_.n_hot[m] - n_[m]);
    return model_.gamma_up * pt.p_g - model_.gamma_down * pt.p_e + exchange / model_.n_molecules;
  }

  const std::vector<double>& occupations() const { return n_; }
  const std::vector<double>& delta() const { return delta_; }

 private:
  const KineticModel& model_;
  std::vector<double> delta_;
  std::vector<double> n_;
};

} // namespace detail

/// Steady state of the rate equations.
///
/// Every mode equation is linear in n_m once the dye chemical potential is
/// fixed, so the problem reduces to one monotone scalar balance in
/// t = (mu - omega_0) / T_c: the dye population equation (or, for closed
/// systems, the conserved excitation number). It is bracketed and bisected
/// down to adjacent doubles. Brackets that only close at the edge of the
/// gain-clamping domain mean no steady state exists (runaway inversion).
inline SteadyState solve_steady_state(const KineticModel& model, const SolverSettings& settings = {}) {
  const std::size_t modes = model.size();
  if (modes == 0) throw std::invalid_argument("solve_steady_state: model has no modes");
  const auto& g = model.degeneracy();

  SteadyState out;
  out.omega = model.omega();
  out.degeneracy = g;

  bool has_source = model.gamma_up > 0.0;
  for (std::size_t m = 0; m < modes; ++m) has_source = has_source || model.kappa[m] * model.n_hot[m] > 0.0;
  if (model.conserved_excitations) {
    if (!model.closed())
      throw std::invalid_argument("solve_steady_state: conserved_excitations requires a closed system");
    has_source = *model.conserved_excitations > 0.0;
  } else if (model.closed()) {
    throw std::invalid_argument(
        "solve_steady_state: closed system (no gain or loss channel) needs conserved_excitations");
  }

  if (!has_source) {
    out.state.n.assign(modes, 0.0);
    out.state.p_e = 0.0;
    out.dye_emission.assign(modes, 0.0);
    out.vacuum = true;
    return out;
  }

  detail::BalanceEvaluator eval(model);
  auto residual = [&](double t) { return eval.residual(t); };

  // log(p_e / p_g) = t - log_ratio_0 spans [-700, 700].
  const double t_min = model.rates.log_ratio[0] - 700.0;
  const double t_max = model.rates.log_ratio[0] + 700.0;
  double lo = t_min;
  if (!(residual(lo) > 0.0))
    throw SolverError("solve_steady_state: no positive balance at vanishing excitation", residual(lo));

  int iterations = 0;
  double hi = std::max(1e-6, t_min + 1.0);
  double f_hi = residual(hi);
  while (f_hi > 0.0) {
    ++iterations;
    lo = hi;
    hi = std::min(2.0 * hi + 1.0, t_max);
    f_hi = residual(hi);
    if (hi == t_max && f_hi > 0.0)
      throw SolverError("solve_steady_state: runaway inversion, pump exceeds every loss channel", f_hi);
  }

  std::uintmax_t max_iter = static_cast<std::uintmax_t>(settings.max_iterations);
  const auto bracket = boost::math::tools::bisect(
      residual, lo, hi, [](double, double) { return false; }, max_iter);
  iterations += static_cast<int>(max_iter);

  const double a = bracket.first;
  const double b = bracket.second;
  const double fa = residual(a);
  const double fb = residual(b);
  if (std::nextafter(a, b) != b && a != b)
    throw SolverError("solve_steady_state: no convergence after " + std::to_string(iterations) + " iterations",
                      std::min(std::abs(fa), std::abs(fb)));
  if (!std::isfinite(fb) && fa > 0.0)
    throw SolverError(
        "solve_steady_state: runaway, photon number diverges (gain reaches loss with no steady state)", fa);
  const double t = (std::isfinite(fb) && std::abs(fb) < std::abs(fa)) ? b : a;

  const auto pt = eval.populate(t);
  out.state.n = eval.occupations();
  out.state.p_e = pt.p_e;
  out.log_gain = t;
  out.mu_offset = t * model.t_cold;
  out.iterations = iterations;

  // Residuals in cancellation-free form.
  const auto& r = model.rates;
  const auto& delta = eval.delta();
  out.dye_emission.resize(modes);
  double exchange = 0.0, gross_pe = model.gamma_up * pt.p_g + model.gamma_down * pt.p_e;
  double worst_abs = 0.0, worst_rel = 0.0;
  for (std::size_t m = 0; m < modes; ++m) {
    const double n = out.state.n[m];
    const double x = t - delta[m];
    const double dye = model.n_molecules * r.absorption[m] * pt.p_g;
    const double gain = std::exp(x);
    const double direct = dye * (gain - n * -std::expm1(x));
    // Same quantity with n eliminated through its balance; the direct form
    // subtracts two terms of order N_d * Gamma * n.
    const double denom = dye * -std::expm1(x) + model.kappa[m];
    out.dye_emission[m] = dye * model.kappa[m] * (gain + model.n_hot[m] * std::expm1(x)) / denom;
    const double dn = direct + model.kappa[m] * (model.n_hot[m] - n);
    const double gross = dye * (gain * (n + 1.0) + n) + model.kappa[m] * (model.n_hot[m] + n);
    worst_abs = std::max(worst_abs, g[m] * std::abs(dn));
    if (gross > 0.0) worst_rel = std::max(worst_rel, std::abs(dn) / gross);
    exchange += g[m] * out.dye_emission[m];
    gross_pe += g[m] * dye * (gain * (n + 1.0) + n) / model.n_molecules;
  }
  const double dpe = model.gamma_up * pt.p_g - model.gamma_down * pt.p_e - exchange / model.n_molecules;
  worst_abs = std::max(worst_abs, std::abs(dpe));
  if (gross_pe > 0.0) worst_rel = std::max(worst_rel, std::abs(dpe) / gross_pe);
  out.residual = worst_abs;
  out.relative_residual = worst_rel;
  if (!(worst_rel <= settings.tolerance))
    throw SolverError("solve_steady_state: residual " + detail::fmt_num(worst_rel) + " above tolerance", worst_rel);

  out.photon_number = photon_number(out.state.n, g);
  out.condensate_fraction = out.photon_number > 0.0 ? g[0] * out.state.n[0] / out.photon_number : 0.0;
  try {
    out.fit = fit_distribution(out, true);
  } catch (const std::invalid_argument&) {
    out.fit.reset();
  }
  return out;
}

struct EvolveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  double dt_initial = 0.0;      // 0: 1e-3 / rate_scale
  double dt_min = 0.0;          // 0: 1e-12 * t_end
  std::uint64_t max_steps = 100'000'000;
  double snapshot_interval = 0.0;  // 0: no snapshots
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> snapshots;
  SystemState final_state;
  double t_reached = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
};

/// Adaptive Dormand-Prince 5(4) integration with per-component error
/// control. Steps leaving n_m >= 0, 0 <= p_e <= 1 are rejected and retried
/// with half the step.
inline Trajectory evolve(const KineticModel& model, const SystemState& initial, double t_end,
                         const EvolveOptions& opts = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const std::size_t modes = model.size();
  if (initial.n.size() != modes) throw std::invalid_argument("evolve: state has wrong number of modes");
  if (!(initial.p_e >= 0.0 && initial.p_e <= 1.0)) throw std::invalid_argument("evolve: p_e outside [0, 1]");
  for (double n : initial.n)
    if (!(n >= 0.0)) throw std::invalid_argument("evolve: negative occupation");
  if (!(t_end >= 0.0)) throw std::invalid_argument("evolve: t_end must be non-negative");

  auto system = [&model](const State& x, State& dxdt, double) { detail::rhs_into(model, x, dxdt); };
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());

  State x(initial.n);
  x.push_back(initial.p_e);
  State backup(x.size());

  Trajectory traj;
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.snapshots.push_back(SystemState{State(x.begin(), x.begin() + modes), x[modes]});
  };
  auto admissible = [&]() {
    for (std::size_t m = 0; m < modes; ++m)
      if (!(x[m] >= 0.0)) return false;
    return x[modes] >= 0.0 && x[modes] <= 1.0;
  };

  double t = 0.0;
  double dt = opts.dt_initial > 0.0 ? opts.dt_initial : 1e-3 / model.rate_scale();
  const double dt_min = opts.dt_min > 0.0 ? opts.dt_min : 1e-12 * std::max(t_end, 1e-300);
  double next_snapshot = opts.snapshot_interval;
  if (opts.snapshot_interval > 0.0) record(0.0);

  std::uint64_t steps = 0;
  while (t < t_end) {
    if (++steps > opts.max_steps)
      throw SolverError("evolve: step budget exhausted at t = " + detail::fmt_num(t), t);
    double step = std::min(dt, t_end - t);
    if (opts.snapshot_interval > 0.0) step = std::min(step, next_snapshot - t);
    const double t_before = t;
    const double attempted = step;
    backup = x;
    const auto result = stepper.try_step(system, x, t, step);
    if (result == odeint::fail) {
      ++traj.rejected;
      dt = step;
    } else if (!admissible()) {
      ++traj.rejected;
      x = backup;
      t = t_before;
      dt = 0.5 * attempted;
    } else {
      ++traj.accepted;
      dt = step;
      if (opts.snapshot_interval > 0.0 && t >= next_snapshot) {
        record(t);
        next_snapshot += opts.snapshot_interval;
      }
    }
    if (dt < dt_min && t < t_end)
      throw SolverError("evolve: step size underflow (stiffness) at t = " + detail::fmt_num(t), t);
  }
  traj.final_state = SystemState{State(x.begin(), x.begin() + modes), x[modes]};
  traj.t_reached = t;
  return traj;
}

} // namespace pbec
