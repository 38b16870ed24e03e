#pragma once

// Unit system. Frequencies, energies and temperatures are all carried in
// Trad/s (hbar = k_B = 1); rates are per nanosecond.

#include <stdexcept>
#include <string>

namespace pbec {

namespace constants {
inline constexpr double boltzmann = 1.380649e-23;      // J/K, exact (SI 2019)
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double pi = 3.14159265358979323846;
} // namespace constants

/// Trad/s per kelvin.
inline constexpr double boltzmann_over_hbar = constants::boltzmann / constants::hbar * 1e-12;

inline double temperature_to_frequency(double kelvin) {
  if (!(kelvin >= 0.0))
    throw std::invalid_argument("temperature must be non-negative (got " + std::to_string(kelvin) + " K)");
  return kelvin * boltzmann_over_hbar;
}

inline double frequency_to_temperature(double trad_per_s) {
  if (!(trad_per_s >= 0.0))
    throw std::invalid_argument("temperature must be non-negative (got " + std::to_string(trad_per_s) + " Trad/s)");
  return trad_per_s / boltzmann_over_hbar;
}

} // namespace pbec
