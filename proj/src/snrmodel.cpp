#include "faraday/snrmodel.hpp"

#include <cmath>
#include <limits>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

void DetectionConfig::validate() const {
  if (!(aperture > 0.0)) throw ValidationError("aperture must be > 0");
  if (!(transmission > 0.0 && transmission <= 1.0))
    throw ValidationError("transmission must lie in (0, 1]");
  if (!(window > 0.0)) throw ValidationError("window duration must be > 0");
}

double to_db(double snr_linear) { return 10.0 * std::log10(snr_linear); }
double from_db(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

double snr_general_linear(const SnrInputs& in) {
  in.probe.validate();
  in.cloud.validate();
  in.detection.validate();
  if (!(in.tau_s > 0.0)) throw ValidationError("scattering lifetime must be > 0");

  const double inf = std::numeric_limits<double>::infinity();
  const double a = in.detection.aperture;
  const double rho_a = intensity_weighted_average(in.probe, in.cloud, Weighted::ColumnDensity, a);
  const double one_a = intensity_weighted_average(in.probe, in.cloud, Weighted::Unity, a);
  const double rho_inf = intensity_weighted_average(in.probe, in.cloud, Weighted::ColumnDensity, inf);

  const double geometry = rho_a / std::sqrt(one_a * rho_inf);
  return std::sqrt(in.detection.transmission * in.cloud.atom_number) * 3.0 *
         in.probe.wavelength / std::sqrt(units::two_pi) * geometry * std::abs(in.xi_ratio) *
         std::sqrt(in.detection.window / in.tau_s) * std::abs(in.Fz);
}

SnrReport snr_general(const SnrInputs& in, double gyromagnetic) {
  SnrReport r;
  r.snr_linear = snr_general_linear(in);
  r.snr_db = to_db(r.snr_linear);
  r.sensitivity = r.snr_linear > 0.0 ? sensitivity(r.snr_linear, in.detection.window, gyromagnetic)
                                     : std::numeric_limits<double>::infinity();
  r.sql_ratio = in.sql_cross_section > 0.0
                    ? sql_ratio(in.detection.transmission, in.sql_cross_section,
                                in.cloud.column_density(0.0), in.detection.window, in.tau_s)
                          .ratio
                    : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double snr_uniform(double atoms_in_aperture, double area, double transmission, double xi_ratio,
                   double tau_f, double tau_s, double Fz, double wavelength) {
  return atoms_in_aperture * std::sqrt(transmission) * 3.0 * wavelength /
         std::sqrt(units::two_pi * area) * std::abs(xi_ratio) * std::sqrt(tau_f / tau_s) *
         std::abs(Fz);
}

double snr_near_d2(double atoms_in_aperture, double aperture, double transmission, double tau_f,
                   double tau_s, double wavelength) {
  return wavelength * atoms_in_aperture * std::sqrt(transmission) / (units::two_pi * aperture) *
         std::sqrt(tau_f / tau_s);
}

double optimize_aperture(const CloudProfile& cloud, double a_min, double a_max) {
  cloud.validate();
  if (!(a_min > 0.0 && a_min < a_max)) throw ValidationError("invalid aperture bracket");
  auto merit = [&](double a) { return cloud.atoms_within(a) / a; };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = a_min, hi = a_max;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = merit(x1), f2 = merit(x2);
  while (hi - lo > 1e-7 * cloud.radius) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = merit(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = merit(x1);
    }
  }
  return 0.5 * (lo + hi);
}

double optimize_aperture(const CloudProfile& cloud) {
  return optimize_aperture(cloud, 1e-3 * cloud.radius, 3.0 * cloud.radius);
}

double xi_ratio_at(const AtomSpecies& species, int F, double omega) {
  double inv_f = 0.0, inv_s2 = 0.0;
  for (const auto& c : coupling_coefficients(species, F)) {
    const double d = omega - c.resonance;
    inv_f += c.rank1 / d;
    inv_s2 += c.rank0 / (d * d);
  }
  return inv_f / std::sqrt(inv_s2);
}

std::vector<RegimePoint> regime_scan(const AtomSpecies& species, int F,
                                     const std::vector<double>& wavelengths) {
  const auto coeffs = coupling_coefficients(species, F);
  const double d2 = species.line(LineLabel::D2).angular_frequency();
  std::vector<RegimePoint> out;
  out.reserve(wavelengths.size());
  for (double lam : wavelengths) {
    RegimePoint p;
    p.wavelength = lam;
    const double w = units::wavelength_to_angular(lam);
    p.detuning_d2 = w - d2;
    p.valid = true;
    for (const auto& c : coeffs)
      if (std::abs(w - c.resonance) <= c.linewidth) p.valid = false;
    p.ratio = p.valid ? std::abs(xi_ratio_at(species, F, w)) : std::numeric_limits<double>::quiet_NaN();
    out.push_back(p);
  }
  return out;
}

std::optional<double> xi_ratio_zero(const AtomSpecies& species, int F, double omega_lo,
                                    double omega_hi) {
  auto f = [&](double w) { return xi_ratio_at(species, F, w); };
  constexpr int pieces = 256;
  const double step = (omega_hi - omega_lo) / pieces;
  for (int k = 0; k < pieces; ++k) {
    double a = omega_lo + k * step, b = a + step;
    double fa = f(a);
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb) || (fa > 0) == (fb > 0)) continue;
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double fm = f(m);
      if ((fm > 0) == (fa > 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    const double root = 0.5 * (a + b);
    if (std::abs(f(root)) < 1e-6) return root;
  }
  return std::nullopt;
}

double xi_ratio_maximum(const AtomSpecies& species, int F, double omega_lo, double omega_hi) {
  auto merit = [&](double w) { return std::abs(xi_ratio_at(species, F, w)); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = omega_lo, hi = omega_hi;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = merit(x1), f2 = merit(x2);
  for (int i = 0; i < 300 && hi - lo > 1.0; ++i) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = merit(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = merit(x1);
    }
  }
  return 0.5 * (lo + hi);
}

double sensitivity(double snr_linear, double tau_f, double gyromagnetic) {
  if (!(snr_linear > 0.0)) throw ValidationError("sensitivity needs a positive SNR");
  return 1.0 / (gyromagnetic * snr_linear * std::sqrt(tau_f));
}

SqlResult sql_ratio(double transmission, double sigma0, double column_density, double tau_f,
                    double tau_s) {
  if (!(transmission > 0 && sigma0 > 0 && column_density > 0 && tau_f >= 0 && tau_s > 0))
    throw ValidationError("sql_ratio arguments must be positive");
  const double k = transmission * sigma0 * column_density / (2.0 * tau_s);
  return {std::sqrt(k * tau_f), 1.0 / k};
}

double resonant_cross_section(const TransitionLine& line) {
  return 3.0 * line.wavelength * line.wavelength / units::two_pi;
}

}  // namespace faraday
