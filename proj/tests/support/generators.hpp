#pragma once

// Seeded random generators for property tests. Every test draws from its own
// fixed seed so failures reproduce.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "pbec/model.hpp"

namespace pbec::gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  ModeLadder ladder(int max_modes = 300) {
    ModeLadder l;
    l.omega0 = uniform(100.0, 5000.0);
    l.epsilon = log_uniform(0.01, 5.0);
    // Keep the ladder span below 500 so Boltzmann factors stay far from underflow.
    l.m_max = integer(1, std::max(1, std::min(max_modes, static_cast<int>(500.0 / l.epsilon))));
    l.polarization = coin();
    return l;
  }

  /// Profile covering [omega0, max(ladder top, cover_to)].
  AbsorptionProfile profile(const ModeLadder& l, double cover_to = 0.0) {
    switch (integer(0, 2)) {
      case 0: return FlatProfile{log_uniform(1e-3, 10.0)};
      case 1: return GaussianProfile{log_uniform(1e-3, 10.0), l.omega0 + uniform(-50.0, 200.0), log_uniform(50.0, 500.0)};
      default: {
        TabulatedProfile t;
        const int points = integer(2, 40);
        const double lo = l.omega0 - uniform(0.0, 10.0);
        const double hi = std::max(l.omega_max(), cover_to) + uniform(0.0, 10.0);
        for (int i = 0; i < points; ++i) {
          t.omega.push_back(lo + (hi - lo) * i / (points - 1));
          t.rate.push_back(log_uniform(1e-3, 10.0));
        }
        return t;
      }
    }
  }

  DyeModel dye(const ModeLadder& l, double cover_to = 0.0) {
    DyeModel d;
    d.n_molecules = log_uniform(1.0, 1e10);
    d.omega_d = l.omega0 + uniform(1.0, 300.0);
    d.t_cold = uniform(50.0, 600.0);
    d.absorption = profile(l, cover_to);
    d.gamma_up = coin() ? 0.0 : log_uniform(1e-6, 1.0);
    d.gamma_down = log_uniform(1e-3, 1.0);
    return d;
  }

  ScenarioConfig config() {
    ScenarioConfig c;
    c.ladder = ladder();
    c.pump.two_level.omega_s = c.ladder.omega0 + uniform(1.0, 300.0);
    c.dye = dye(c.ladder, c.pump.two_level.omega_s);
    c.pump.scenario = static_cast<ScenarioKind>(integer(0, 2));
    c.pump.t_hot = uniform(1000.0, 30000.0);
    c.pump.kappa = log_uniform(1e-6, 1.0);
    c.pump.two_level.g_s = log_uniform(1.0, 1e6);
    if (coin()) c.solver.conserved_excitations = log_uniform(1.0, 1e6);
    c.solver.tolerance = log_uniform(1e-12, 1e-6);
    return c;
  }

 private:
  std::mt19937_64 rng_;
};

} // namespace pbec::gen
