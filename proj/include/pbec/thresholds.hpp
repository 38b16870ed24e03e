#pragma once

// Condensation thresholds: closed forms for the reversible limits, the
// continuum (harmonic density of states) balance, and extraction from
// steady-state scans.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "pbec/kinetics.hpp"
#include "pbec/model.hpp"
#include "pbec/parallel.hpp"
#include "pbec/spectral_rates.hpp"
#include "pbec/units.hpp"

namespace pbec {

enum class ThresholdMethod { ReversibleDye, TwoLevel, Continuum, Numeric };

inline const char* to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::ReversibleDye: return "reversible-dye";
    case ThresholdMethod::TwoLevel: return "two-level";
    case ThresholdMethod::Continuum: return "continuum";
    case ThresholdMethod::Numeric: return "numeric";
  }
  return "?";
}

struct ThresholdResult {
  double t_hot_critical = 0.0;  // K
  ThresholdMethod method = ThresholdMethod::Numeric;
  double n_th = 0.0;            // continuum: cold-side particle number at mu = omega0
  double omega_bar_h = 0.0;     // continuum: mean reservoir photon energy at the threshold
  std::pair<double, double> bracket{0.0, 0.0};  // K
  double residual = 0.0;        // continuum: relative imbalance; numeric: relative bracket width
  std::optional<double> secondary;  // numeric: mu_fit-based estimate, K
  int evaluations = 0;
};

namespace detail {
inline double three_level_threshold(double omega0, double omega_top, double t_cold, const char* name) {
  if (!(omega0 >= 0.0)) throw std::invalid_argument("threshold: omega0 must be non-negative");
  if (!(omega_top > omega0))
    throw std::invalid_argument(std::string("threshold: ") + name + " must exceed omega0");
  if (!(t_cold > 0.0)) throw std::invalid_argument("threshold: t_cold must be positive");
  return t_cold * omega_top / (omega_top - omega0);
}
} // namespace detail

/// Pump temperature (K) at which the ground mode reaches zero gain margin for
/// vanishing losses: T_c * omega_d / (omega_d - omega0).
inline double reversible_dye_threshold(double omega0, double omega_d, double t_cold) {
  return detail::three_level_threshold(omega0, omega_d, t_cold, "omega_d");
}

/// Same construction with the excited reservoir level omega_s.
inline double two_level_threshold(double omega0, double omega_s, double t_cold) {
  return detail::three_level_threshold(omega0, omega_s, t_cold, "omega_s");
}

/// Density of states of the 2D harmonic ladder, per unit frequency, as a
/// function of delta = omega - omega0.
struct HarmonicDensity {
  double epsilon = 0.25;
  double operator()(double delta) const { return delta / (epsilon * epsilon); }
};

/// Piecewise-constant density: level m spread uniformly over a bin of width
/// epsilon centred on it. Integrals must be split at bin_edges().
struct HistogramDensity {
  double epsilon = 0.25;
  std::vector<double> degeneracy;
  double operator()(double delta) const {
    const double m = std::floor(delta / epsilon + 0.5);
    if (m < 0.0 || m >= static_cast<double>(degeneracy.size())) return 0.0;
    return degeneracy[static_cast<std::size_t>(m)] / epsilon;
  }
  std::vector<double> bin_edges() const {
    std::vector<double> edges;
    for (std::size_t m = 0; m <= degeneracy.size(); ++m) edges.push_back((static_cast<double>(m) - 0.5) * epsilon);
    edges.front() = 0.0;
    return edges;
  }
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  unsigned max_depth = 20;
  std::vector<double> breakpoints;  // interior split points, as offsets from omega0
};

/// Integral over [omega0, omega_max] of rho(omega - omega0) / (exp((omega - mu)/T) - 1).
/// omega_max may be +inf. At mu = omega0 the integrable 1/(omega - omega0)
/// singularity is cancelled analytically by working in the offset variable.
template <class Density>
double bose_integral(const Density& rho, double omega0, double temperature, double mu, double omega_max,
                     const QuadratureOptions& opts = {}) {
  if (!(temperature >= 0.0)) throw std::invalid_argument("bose_integral: temperature must be non-negative");
  if (mu > omega0) throw std::invalid_argument("bose_integral: mu must not exceed omega0");
  if (!(omega_max > omega0)) throw std::invalid_argument("bose_integral: omega_max must exceed omega0");
  if (temperature == 0.0) return 0.0;
  const double gap = (omega0 - mu) / temperature;
  auto integrand = [&](double delta) {
    if (delta <= 0.0) return 0.0;
    const double x = gap + delta / temperature;
    if (x > 700.0) return 0.0;
    return rho(delta) / std::expm1(x);
  };
  const double upper = omega_max - omega0;
  std::vector<double> cuts{0.0};
  for (double b : opts.breakpoints)
    if (b > 0.0 && b < upper) cuts.push_back(b);
  cuts.push_back(upper);
  // Finite ranges are mapped onto [0, 1]: the Kronrod error estimate misbehaves
  // on very narrow intervals.
  const double scale = std::isfinite(upper) ? upper : 1.0;
  auto scaled = [&](double s) { return scale * integrand(scale * s); };
  double total = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        scaled, cuts[i] / scale, cuts[i + 1] / scale, opts.max_depth, opts.rel_tol, &err);
    error += err;
  }
  if (!(error <= 1e3 * opts.rel_tol * std::abs(total) + std::numeric_limits<double>::min()))
    throw std::runtime_error("bose_integral: quadrature did not converge (error estimate " +
                             detail::fmt_num(error) + ")");
  return total;
}

/// pi^2/6 (T_c / epsilon)^2: critical photon number of the ideal 2D harmonic
/// Bose gas with no frequency cutoff.
inline double critical_number(double t_cold, double epsilon) {
  const double ratio = temperature_to_frequency(t_cold) / epsilon;
  return constants::pi * constants::pi / 6.0 * ratio * ratio;
}

/// Discrete counterpart: sum_m g_m / (exp((omega_m - omega0)/T_c) - 1) over excited levels.
inline double discrete_critical_number(const ModeSpectrum& spectrum, double t_cold) {
  const double t = temperature_to_frequency(t_cold);
  double total = 0.0;
  for (std::size_t m = 1; m < spectrum.size(); ++m)
    total += spectrum.degeneracy[m] / std::expm1((spectrum.omega[m] - spectrum.omega[0]) / t);
  return total;
}

/// Sum g w n^h / sum g n^h for a reservoir at t_hot (K) with zero chemical potential.
inline double mean_hot_energy(const ModeSpectrum& spectrum, double t_hot) {
  if (!(t_hot > 0.0)) throw std::invalid_argument("mean_hot_energy: t_hot must be positive");
  const double t = temperature_to_frequency(t_hot);
  double weight = 0.0, energy = 0.0;
  for (std::size_t m = 0; m < spectrum.size(); ++m) {
    const double n = spectrum.degeneracy[m] * bose_occupation(spectrum.omega[m], t, 0.0);
    weight += n;
    energy += n * spectrum.omega[m];
  }
  if (!(weight > 0.0)) return spectrum.omega.front();
  return energy / weight;
}

/// Continuum version of mean_hot_energy for the harmonic density of states.
inline double mean_hot_energy_continuum(double omega0, double epsilon, double t_hot, double omega_max) {
  const double t = temperature_to_frequency(t_hot);
  const HarmonicDensity rho{epsilon};
  const double number = bose_integral(rho, omega0, t, 0.0, omega_max);
  const double energy =
      bose_integral([&](double d) { return (omega0 + d) * rho(d); }, omega0, t, 0.0, omega_max);
  return energy / number;
}

/// Reservoir temperature at which the hot-side photon number of the harmonic
/// continuum equals the cold-side critical number (mu = omega0):
///   int rho / (e^{(w - w0)/T_c} - 1) = int rho / (e^{w/T_h} - 1)  over [w0, omega_max].
/// omega_max defaults to the ladder's top mode and may be +inf.
inline ThresholdResult continuum_threshold(const ModeLadder& ladder, double t_cold,
                                           std::optional<double> omega_max = std::nullopt) {
  ladder.validate();
  if (!(t_cold > 0.0)) throw std::invalid_argument("continuum_threshold: t_cold must be positive");
  const double w0 = ladder.omega0;
  const double w_max = omega_max.value_or(ladder.omega_max());
  const HarmonicDensity rho{ladder.epsilon};
  ThresholdResult out;
  out.method = ThresholdMethod::Continuum;
  out.n_th = bose_integral(rho, w0, temperature_to_frequency(t_cold), w0, w_max);

  auto imbalance = [&](double t_hot) {
    ++out.evaluations;
    return bose_integral(rho, w0, temperature_to_frequency(t_hot), 0.0, w_max) / out.n_th - 1.0;
  };

  constexpr double t_limit = 1e9;
  double lo = t_cold, hi = 2.0 * t_cold;
  double f_lo = imbalance(lo), f_hi = imbalance(hi);
  while (f_hi < 0.0) {
    if (hi >= t_limit)
      throw SolverError("continuum_threshold: no threshold below 1e9 K (cutoff too low to condense)", f_hi);
    lo = hi;
    f_lo = f_hi;
    hi = std::min(2.0 * hi, t_limit);
    f_hi = imbalance(hi);
  }
  std::uintmax_t max_iter = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= std::max(1e-6, 1e-13 * std::abs(b)); };
  const auto root = boost::math::tools::toms748_solve(imbalance, lo, hi, f_lo, f_hi, tol, max_iter);
  out.bracket = root;
  out.t_hot_critical = 0.5 * (root.first + root.second);
  out.residual = std::abs(imbalance(out.t_hot_critical));
  out.omega_bar_h = mean_hot_energy_continuum(w0, ladder.epsilon, out.t_hot_critical, w_max);
  return out;
}

struct ThresholdScan {
  double t_lo = 3000.0;   // K
  double t_hi = 30000.0;  // K
  int points = 24;
  bool log_spacing = true;
  double f0_level = 0.01;
  double rel_tol = 1e-6;  // bisection stops at this relative bracket width
};

inline std::vector<double> scan_grid(double lo, double hi, int count, bool log_spacing) {
  if (count < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(hi > lo)) throw std::invalid_argument("grid endpoints must be increasing");
  if (log_spacing && !(lo > 0.0)) throw std::invalid_argument("log grid needs positive endpoints");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / (count - 1);
    grid[i] = log_spacing ? std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo))) : lo + s * (hi - lo);
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

/// T_h (K) where the steady-state condensate fraction first reaches
/// scan.f0_level. `model_at` builds the kinetic model for a pump temperature
/// in K. Grid points are solved concurrently, then the bracketing interval
/// is bisected. The secondary estimate interpolates, on the grid, where the
/// fitted excited-mode distribution gives (omega0 - mu_fit) / T_fit = f0_level.
inline ThresholdResult numeric_threshold(const std::function<KineticModel(double)>& model_at,
                                         const ThresholdScan& scan, const SolverSettings& settings = {}) {
  struct Point {
    double f0 = 0.0;
    std::optional<double> gap;
  };
  auto evaluate = [&](double t_hot) {
    const auto model = model_at(t_hot);
    const auto steady = solve_steady_state(model, settings);
    Point p{steady.condensate_fraction, std::nullopt};
    if (steady.fit) p.gap = (model.omega()[0] - steady.fit->mu) / steady.fit->temperature;
    return p;
  };

  const auto grid = scan_grid(scan.t_lo, scan.t_hi, scan.points, scan.log_spacing);
  const auto points = parallel_map<Point>(grid.size(), [&](std::size_t i) { return evaluate(grid[i]); });

  ThresholdResult out;
  out.method = ThresholdMethod::Numeric;
  out.evaluations = static_cast<int>(grid.size());
  if (points.front().f0 >= scan.f0_level)
    throw SolverError("numeric_threshold: no crossing, f0 already above level at the scan start", points.front().f0);
  std::size_t k = 1;
  while (k < points.size() && points[k].f0 < scan.f0_level) ++k;
  if (k == points.size())
    throw SolverError("numeric_threshold: no crossing, f0 stays below level across the scan", points.back().f0);

  double lo = grid[k - 1], hi = grid[k];
  while (hi - lo > scan.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    ++out.evaluations;
    if (evaluate(mid).f0 >= scan.f0_level)
      hi = mid;
    else
      lo = mid;
  }
  out.bracket = {lo, hi};
  out.t_hot_critical = 0.5 * (lo + hi);
  out.residual = (hi - lo) / hi;

  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto& a = points[i - 1];
    const auto& b = points[i];
    if (a.gap && b.gap && *a.gap > scan.f0_level && *b.gap <= scan.f0_level && *b.gap > 0.0) {
      const double s = (std::log(*a.gap) - std::log(scan.f0_level)) / (std::log(*a.gap) - std::log(*b.gap));
      out.secondary = grid[i - 1] + s * (grid[i] - grid[i - 1]);
      break;
    }
  }
  return out;
}

} // namespace pbec
