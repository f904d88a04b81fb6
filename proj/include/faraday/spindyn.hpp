#pragma once

#include <optional>
#include <vector>

#include "faraday/atomdata.hpp"

namespace faraday {

/// Single-mode spin-1 state: populations and spinor phase Theta = Th+ + Th- - 2 Th0.
struct SpinorState {
  double rho0 = 0.5;
  double theta = 0.0;          ///< spinor phase, rad (unwrapped)
  double larmor_phase = 0.0;   ///< rad
  double magnetization = 0.0;  ///< rho+ - rho-, conserved

  void validate() const;
  double rho_plus() const { return 0.5 * (1.0 - rho0 + magnetization); }
  double rho_minus() const { return 0.5 * (1.0 - rho0 - magnetization); }
  /// Signed transverse spin amplitude; 2 sqrt(rho0 (1-rho0)) cos(Theta/2) at zero magnetization.
  double fz_envelope() const;
};

/// One harmonic of the ambient (power-line) field, added to B_y.
struct FieldHarmonic {
  double frequency = 50.0;  ///< Hz
  double amplitude = 0.0;   ///< G
  double phase = 0.0;       ///< rad
};

struct FieldEnvironment {
  double B_y = 1.0;            ///< bias, G
  double B_z = 0.0;            ///< residual along the probe, G
  double B_vls = 0.0;          ///< probe-induced effective field along z, G
  double gradient = 0.0;       ///< b = sum_i dB_y/dx_i, G/cm
  double line_frequency = 50.0;
  std::vector<FieldHarmonic> harmonics;

  void validate() const;
};

/// Spin-exchange energy c/hbar in rad/s; negative for ferromagnetic 87Rb F=1.
struct SpinMixing {
  double c = -2.0 * 3.14159265358979323846 * 10.0;
  void validate() const;
};

struct DressingConfig {
  double rabi = 0.0;      ///< Omega_mw, rad/s
  double detuning = 0.0;  ///< Delta_mw above the clock transition, rad/s

  /// Throws ValidationError unless |Delta| > 5 Omega.
  void validate() const;
  /// True when 5 Omega < |Delta| < 10 Omega (adiabatic elimination marginal).
  bool marginal() const;
};

/// Quadratic shift induced by the microwave dressing, -Omega^2 / (4 Delta), rad/s.
double q_microwave(const DressingConfig& d);

/// Net quadratic shift q_z + q_mw in rad/s (q_mw < 0 for blue detuning, which
/// raises m=0 and reduces the effective q).
double q_net(const AtomSpecies& species, int F, double B_gauss,
             const std::optional<DressingConfig>& dressing);

/// Detuning that nulls q_net in this model: Delta = Omega^2 / (4 q_z).
double null_dressing_detuning(const AtomSpecies& species, int F, double B_gauss, double rabi);

struct EvolveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  double output_step = 1e-4;  ///< s between stored samples
};

struct SpinTrajectory {
  std::vector<double> t;
  std::vector<double> rho0;
  std::vector<double> theta;
  std::vector<double> fz_envelope;
  double magnetization = 0.0;

  /// Linear interpolation of the envelope; clamps outside the range.
  double envelope_at(double time) const;
  double duration() const { return t.empty() ? 0.0 : t.back(); }
};

/// Two-mode Hamiltonian E = c rho0 [(1-rho0) + sqrt((1-rho0)^2 - m^2) cos Theta] + q (1-rho0),
/// in rad/s. Conserved by evolve_spinor when q and c are constant.
double spinor_energy(const SpinorState& s, double q, double c);

/// Integrates the single-mode mean-field equations with an adaptive Dormand-Prince
/// 5(4) stepper. q and c in rad/s. Throws ComputationError on step-size underflow.
SpinTrajectory evolve_spinor(const SpinorState& initial, double q, double c, double duration,
                             const EvolveOptions& opts = {});

/// omega_L = gamma sqrt(B_y^2 + (B_z + B_vls)^2), same units as gamma * field.
double larmor_frequency_with_vls(double B_y, double B_z, double B_vls, double gyromagnetic);

struct VlsFit {
  double B_y = 0.0, B_z = 0.0, B_vls0 = 0.0, theta0 = 0.0;  ///< G, G, G, rad
  double err_B_y = 0.0, err_B_z = 0.0, err_B_vls0 = 0.0, err_theta0 = 0.0;
  double chi2_per_dof = 0.0;
};

/// Least-squares fit of f_L(theta) = (gamma/2pi) sqrt(B_y^2 + (B_z + B0 sin 2(theta-theta0))^2)
/// to Larmor frequencies (Hz) measured at waveplate angles (rad). `gyromagnetic_hz_per_gauss`
/// is gamma/2pi. Canonical solution: B0 >= 0, B_z >= 0, theta0 in [0, pi).
VlsFit fit_vls(const std::vector<double>& theta, const std::vector<double>& f_larmor,
               double sigma_hz, double gyromagnetic_hz_per_gauss);

/// tau_D = pi / (2 gamma b R); gamma in rad s^-1 G^-1, b in G/cm, R in m.
/// Returns +inf for b = 0.
double dephasing_time(double gyromagnetic, double gradient_g_per_cm, double radius);

/// Free-induction-decay envelope of a Gaussian cloud (1/e^2 radius R) in a linear
/// gradient, written in terms of tau_D: exp(-(pi t)^2 / (32 tau_D^2)).
double dephasing_envelope(double t, double tau_D);

}  // namespace faraday
