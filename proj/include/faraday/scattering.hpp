#pragma once

#include <optional>

#include "faraday/geometry.hpp"
#include "faraday/polarizability.hpp"

namespace faraday {

/// Off-resonant scattering out of the probed ground level.
struct ScatteringBudget {
  double gamma_rayleigh = 0.0;  ///< q = 0 channel, s^-1
  double gamma_raman = 0.0;     ///< q = +-1 channels, s^-1
  double gamma_total = 0.0;     ///< incoherent sum over all excited states, s^-1
  double gamma0 = 0.0;          ///< s^-1 per W/m^2
  double tau_s = 0.0;           ///< 1/gamma_total at this intensity, s (inf at zero intensity)
};

/// gamma0 = omega^3 alpha0^2 / (18 pi eps0^2 hbar^3 c^4).
double scattering_prefactor(const CouplingTable& table);

ScatteringBudget scattering_rate(const CouplingTable& table, double intensity);

struct LifetimeReport {
  double gamma_per_watt_peak = 0.0;   ///< peak-intensity rate per watt of beam power
  double gamma_per_watt_cloud = 0.0;  ///< density-weighted rate per watt
  double tau_s = 0.0;                 ///< probe-limited lifetime, s
  double tau_combined = 0.0;          ///< with the one-body rate folded in, s
};

/// 1/tau_s = gamma0 P0 <rho>_I^inf / (N xi_s^2); optionally combined with a
/// background one-body lifetime as 1/tau = 1/tau_s + 1/tau_1.
LifetimeReport cloud_lifetime(const ProbeConfig& probe, const CloudProfile& cloud,
                              const CouplingTable& table,
                              std::optional<double> one_body_lifetime = std::nullopt);

/// Combined lifetime from a per-watt loss rate and beam power.
double combined_lifetime(double rate_per_watt, double power, std::optional<double> one_body_lifetime);

}  // namespace faraday
