#pragma once

#include <numbers>

namespace faraday::units {

// CODATA 2018 exact / recommended values, SI.
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double c = 299792458.0;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = h / two_pi;
inline constexpr double epsilon0 = 8.8541878128e-12;
inline constexpr double mu_B = 9.2740100783e-24;

inline constexpr double gauss = 1e-4;  // T per G
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double MHz = 1e6;

inline constexpr double wavelength_to_angular(double lambda_m) { return two_pi * c / lambda_m; }
inline constexpr double angular_to_wavelength(double omega) { return two_pi * c / omega; }

}  // namespace faraday::units
