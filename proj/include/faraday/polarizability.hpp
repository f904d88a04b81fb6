#pragma once

#include <optional>
#include <span>
#include <vector>

#include "faraday/atomdata.hpp"

namespace faraday {

/// Probe beam at the atoms. A Gaussian TEM00 profile with 1/e^2 intensity radius `waist`.
struct ProbeConfig {
  double wavelength = 790.018e-9;     ///< m
  double power = 0.0;                 ///< P0, W
  double waist = 75e-6;               ///< m
  double polarization_angle = 0.0;    ///< linear polarization vs bias field, rad
  double ellipticity = 0.0;           ///< s_z = <S_z>/<S_0>, in [-1, 1]

  double angular_frequency() const;
  double peak_intensity() const;      ///< I0 = 2 P0 / (pi w^2)
  double intensity(double r) const;   ///< W/m^2 at radius r

  void validate() const;
};

/// Dimensionless polarizability coefficients of one |J F> -> |J' F'> transition,
/// in units of alpha0 (these do not depend on the probe).
struct CouplingCoefficient {
  LineLabel line = LineLabel::D2;
  HalfInt J_excited;
  int F_excited = 0;
  double rank0 = 0.0;
  double rank1 = 0.0;
  double rank2 = 0.0;
  double resonance = 0.0;  ///< transition angular frequency, rad/s
  double linewidth = 0.0;  ///< rad/s
};

/// Dipole-allowed rows F' in {F-1, F, F+1} of every line, ordered by line then F'.
std::vector<CouplingCoefficient> coupling_coefficients(const AtomSpecies& species, int F);

struct CouplingRow {
  CouplingCoefficient coeff;
  double detuning = 0.0;  ///< Delta_{J'F'} = omega - omega_{J'F'}, rad/s
};

struct CouplingTable {
  int ground_F = 1;
  double probe_omega = 0.0;  ///< rad/s
  double alpha0 = 0.0;       ///< 3 eps0 hbar lambda^3 Gamma / 8 pi^2 of the D2 line
  std::vector<CouplingRow> rows;

  /// Sum over rows of coefficient(rank) / Delta^power.
  double sum(int rank, int power = 1) const;
};

/// alpha0 from the D2 line; throws ComputationError if lambda^3 Gamma of D1 and D2
/// disagree by more than 1%.
double polarizability_constant(const AtomSpecies& species);

/// Builds the table at the probe wavelength. Throws ComputationError
/// ("far-detuned model invalid") if the probe sits within one linewidth of a row.
CouplingTable coupling_table(const AtomSpecies& species, int F, double wavelength);

/// Same, restricted to the given lines.
CouplingTable coupling_table(const AtomSpecies& species, std::span<const LineLabel> lines, int F,
                             double wavelength);

/// Copy of the species with every excited hyperfine offset set to zero.
AtomSpecies without_hyperfine(const AtomSpecies& species);

struct WeightedDetunings {
  double inv_xi_f = 0.0;    ///< sum alpha1 / (alpha0 Delta), s
  double inv_xi_s_sq = 0.0; ///< sum alpha0 / (alpha0 Delta^2), s^2

  double xi_f() const { return 1.0 / inv_xi_f; }
  double xi_s() const;
  /// xi_s / xi_f, signed.
  double ratio() const;
};

WeightedDetunings weighted_detunings(const CouplingTable& table);

/// State-independent light shift, rad/s, for intensity I0 in W/m^2.
double scalar_shift(const CouplingTable& table, double intensity);

/// Probe-frequency roots of sum alpha0/Delta inside [omega_lo, omega_hi], sorted
/// ascending in frequency, refined by bisection to floating-point resolution.
std::vector<double> magic_zero_frequencies(const AtomSpecies& species, int F, double omega_lo,
                                           double omega_hi);

/// Wavelength roots in [lambda_min, lambda_max] (m), sorted ascending.
std::vector<double> magic_zero_wavelengths(const AtomSpecies& species, int F, double lambda_min,
                                           double lambda_max);

/// phi0 = pi alpha0 rho / (eps0 hbar lambda), in rad/s (multiply by 1/xi_f for an angle).
double faraday_phi0(double alpha0, double column_density, double wavelength);

/// phi0 through the optical depth of one line: (lambda_J'/lambda)(Gamma_J'/4) OD.
double faraday_phi0_optical_depth(const TransitionLine& line, double column_density,
                                  double wavelength);

/// Polarization rotation phi_z = phi0 <F_z> / xi_f, rad.
double faraday_angle(const CouplingTable& table, double column_density, double wavelength,
                     double Fz);

/// Vector light shift as an equivalent field along the probe axis, in gauss.
/// Normalized so that the rank-1 shift equals mu_B g_F B_vls m_F.
double vls_effective_field(const AtomSpecies& species, const CouplingTable& table,
                           double intensity, double ellipticity);

/// Quarter-wave plate model: B_vls(theta) = B0 sin(2 (theta - theta0)).
double vls_waveplate(double b_circular, double theta, double theta0);

/// sum alpha2 / (alpha0 Delta), s.
double tensor_coefficient(const CouplingTable& table);

/// arctan(sqrt 2): the polarization angle at which the rank-2 coupling averages out.
double tensor_cancellation_angle();

/// Probe angular frequency at a detuning from a line centroid.
double omega_from_line_detuning(const AtomSpecies& species, LineLabel line, double detuning);

}  // namespace faraday
