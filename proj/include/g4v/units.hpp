#pragma once

// Internal units: time in ns, energies and rates in rad/ns (hbar = 1),
// lengths in nm. Conversions below are the only place where external
// laboratory units enter.

#include "g4v/types.hpp"

namespace g4v::units {

// Ordinary frequency (GHz) to angular frequency (rad/ns).
constexpr double from_ghz(double f_ghz) { return kTwoPi * f_ghz; }
constexpr double from_thz(double f_thz) { return kTwoPi * 1e3 * f_thz; }
constexpr double to_ghz(double omega) { return omega / kTwoPi; }

constexpr double from_ps(double t_ps) { return 1e-3 * t_ps; }
constexpr double to_ps(double t_ns) { return 1e3 * t_ns; }
constexpr double from_us(double t_us) { return 1e3 * t_us; }

constexpr double from_deg(double deg) { return deg * kPi / 180.0; }
constexpr double to_deg(double rad) { return rad * 180.0 / kPi; }

inline constexpr double kSpeedOfLight = 2.99792458e8;  // nm/ns
inline constexpr double kFineStructure = 1.0 / 137.0;
inline constexpr double kRefractiveIndexDiamond = 2.417;

// Boltzmann constant over hbar, in rad/ns per kelvin.
inline constexpr double kBoltzmannOverHbar = 1.380649e-23 / 1.054571817e-34 * 1e-9;

}  // namespace g4v::units
