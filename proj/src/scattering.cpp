#include "faraday/scattering.hpp"

#include <cmath>
#include <limits>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

double scattering_prefactor(const CouplingTable& table) {
  using namespace units;
  const double w = table.probe_omega;
  return w * w * w * table.alpha0 * table.alpha0 /
         (18.0 * pi * epsilon0 * epsilon0 * hbar * hbar * hbar * c * c * c * c);
}

ScatteringBudget scattering_rate(const CouplingTable& table, double intensity) {
  if (intensity < 0.0) throw ValidationError("intensity must be >= 0");
  ScatteringBudget b;
  b.gamma0 = scattering_prefactor(table);
  const double s0 = table.sum(0, 1);
  const double s1 = table.sum(1, 1);
  b.gamma_rayleigh = intensity * b.gamma0 / 3.0 * s0 * s0;
  b.gamma_raman = 6.0 * intensity * b.gamma0 * s1 * s1;
  b.gamma_total = intensity * b.gamma0 * table.sum(0, 2);
  b.tau_s = b.gamma_total > 0.0 ? 1.0 / b.gamma_total : std::numeric_limits<double>::infinity();
  return b;
}

double combined_lifetime(double rate_per_watt, double power, std::optional<double> one_body_lifetime) {
  double inv = rate_per_watt * power;
  if (one_body_lifetime) inv += 1.0 / *one_body_lifetime;
  return inv > 0.0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
}

LifetimeReport cloud_lifetime(const ProbeConfig& probe, const CloudProfile& cloud,
                              const CouplingTable& table, std::optional<double> one_body_lifetime) {
  probe.validate();
  cloud.validate();
  if (one_body_lifetime && !(*one_body_lifetime > 0.0))
    throw ValidationError("one-body lifetime must be > 0");

  const double gamma0 = scattering_prefactor(table);
  const double inv_xi_s_sq = table.sum(0, 2);
  const double rho_inf =
      intensity_weighted_average(probe, cloud, Weighted::ColumnDensity, std::numeric_limits<double>::infinity());

  LifetimeReport r;
  r.gamma_per_watt_peak = gamma0 * inv_xi_s_sq * 2.0 / (units::pi * probe.waist * probe.waist);
  r.gamma_per_watt_cloud = gamma0 * inv_xi_s_sq * rho_inf / cloud.atom_number;
  const double inv_tau_s = r.gamma_per_watt_cloud * probe.power;
  r.tau_s = inv_tau_s > 0.0 ? 1.0 / inv_tau_s : std::numeric_limits<double>::infinity();
  r.tau_combined = combined_lifetime(r.gamma_per_watt_cloud, probe.power, one_body_lifetime);
  return r;
}

}  // namespace faraday
