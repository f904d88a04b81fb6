#pragma once

#include <optional>
#include <vector>

#include "faraday/geometry.hpp"
#include "faraday/polarizability.hpp"

namespace faraday {

struct DetectionConfig {
  double aperture = 38e-6;          ///< a, m
  double transmission = 0.2;        ///< kappa
  double window = 5e-3;             ///< tau_f, s
  double noise_equivalent_power = 0.0;  ///< W/sqrt(Hz), technical noise report only

  void validate() const;
};

/// Shot-noise-limited SNR of one measurement window.
///
/// Decibels follow the convention used for the Faraday SNR throughout this
/// project: snr_db = 10 log10(snr_linear), where snr_linear = |<F_z>| / dF_z is an
/// amplitude ratio. Doubling tau_f therefore adds 1.5 dB.
struct SnrReport {
  double snr_linear = 0.0;
  double snr_db = 0.0;
  double sensitivity = 0.0;  ///< T/sqrt(Hz)
  double sql_ratio = 0.0;    ///< (dF_z)_SQL / dF_z
};

double to_db(double snr_linear);
double from_db(double snr_db);

/// Inputs of the general (Gaussian beam, finite aperture) SNR expression.
struct SnrInputs {
  ProbeConfig probe;
  CloudProfile cloud;
  DetectionConfig detection;
  double xi_ratio = 0.0;  ///< |xi_s/xi_f|
  double tau_s = 0.0;     ///< scattering lifetime, s
  double Fz = 1.0;        ///< <F_z> in units of hbar
  /// sigma0 for the SQL comparison; the Rb-87 D2 resonant cross-section by default.
  double sql_cross_section = 3.0 * 780.241209686e-9 * 780.241209686e-9 / (2.0 * 3.14159265358979323846);
};

/// sqrt(kappa N) (3 lambda/sqrt(2 pi)) <rho>_a / sqrt(<1>_a <rho>_inf) |xi_s/xi_f|
/// sqrt(tau_f/tau_s) <F_z>.
double snr_general_linear(const SnrInputs& in);

/// Full report: linear SNR, dB, phase-based sensitivity with `gyromagnetic`
/// (rad s^-1 T^-1), and the SQL ratio at the peak column density.
SnrReport snr_general(const SnrInputs& in, double gyromagnetic);

/// Uniform-intensity form: N_a sqrt(kappa) 3 lambda / sqrt(2 pi A) |xi_s/xi_f|
/// sqrt(tau_f/tau_s) <F_z>.
double snr_uniform(double atoms_in_aperture, double area, double transmission, double xi_ratio,
                   double tau_f, double tau_s, double Fz, double wavelength);

/// Algebraic reduction of snr_uniform with xi_f = 3 sqrt(2) xi_s:
/// lambda N_a sqrt(kappa) / (2 pi a) sqrt(tau_f/tau_s).
double snr_near_d2(double atoms_in_aperture, double aperture, double transmission, double tau_f,
                   double tau_s, double wavelength);

/// Aperture radius maximizing N_a / sqrt(A) (golden section, |da| < 1e-4 R).
double optimize_aperture(const CloudProfile& cloud);

/// Maximizes N_a/sqrt(A) over a in [a_min, a_max] (golden section).
double optimize_aperture(const CloudProfile& cloud, double a_min, double a_max);

struct RegimePoint {
  double detuning_d2 = 0.0;  ///< rad/s from the D2 centroid
  double wavelength = 0.0;   ///< m
  double ratio = 0.0;        ///< |xi_s/xi_f|
  bool valid = false;        ///< false within one linewidth of a resonance
};

/// |xi_s/xi_f| on a wavelength grid.
std::vector<RegimePoint> regime_scan(const AtomSpecies& species, int F,
                                     const std::vector<double>& wavelengths);

/// Signed xi_s/xi_f at a probe angular frequency, without the resonance guard.
double xi_ratio_at(const AtomSpecies& species, int F, double omega);

/// Root of 1/xi_f inside (omega_lo, omega_hi), bisection. Empty if no sign change.
std::optional<double> xi_ratio_zero(const AtomSpecies& species, int F, double omega_lo,
                                    double omega_hi);

/// Location of the maximum of |xi_s/xi_f| in [omega_lo, omega_hi] (golden section;
/// the bracket must hold a single maximum).
double xi_ratio_maximum(const AtomSpecies& species, int F, double omega_lo, double omega_hi);

/// dB sqrt(T) = 1 / (gamma SNR sqrt(tau_f)); gamma in rad s^-1 T^-1, result T/sqrt(Hz).
double sensitivity(double snr_linear, double tau_f, double gyromagnetic);

struct SqlResult {
  double ratio = 0.0;     ///< sqrt(kappa sigma0 rho tau_f / (2 tau_s))
  double crossover = 0.0; ///< tau_f at which ratio = 1, s
};

SqlResult sql_ratio(double transmission, double sigma0, double column_density, double tau_f,
                    double tau_s);

/// Resonant cross-section 3 lambda^2 / 2 pi of a line.
double resonant_cross_section(const TransitionLine& line);

}  // namespace faraday
