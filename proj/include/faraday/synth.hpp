#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faraday/snrmodel.hpp"
#include "faraday/spindyn.hpp"

namespace faraday {

struct AcquisitionConfig {
  double sample_rate = 2e6;        ///< S/s
  double duration = 1.02;          ///< total record length including the pre-tip interval, s
  double pre_tip_interval = 0.02;  ///< probe on, no polarization rotation, s
  std::uint64_t rng_seed = 1;
  double gain = 1.0;               ///< V/W
  /// White technical noise at the detector output, V/sqrt(Hz), in the same
  /// convention as shot noise: per-sample variance density^2 * sample_rate.
  double technical_noise_density = 0.0;
  bool shot_noise = true;
  bool dephasing = true;

  void validate() const;
  std::size_t sample_count() const;
};

struct RawSignal {
  std::vector<double> samples;  ///< V
  double sample_rate = 0.0;
  nlohmann::json metadata = nlohmann::json::object();

  double duration() const { return samples.size() / sample_rate; }
};

/// B(t) = sqrt(B_y(t)^2 + (B_z + B_vls)^2), B_y(t) = B_y + sum A_k sin(2 pi f_k t + phi_k). G.
double instantaneous_field(const FieldEnvironment& env, double t);

/// Carrier model: the Larmor frequency linearized about the static field,
/// f(t) = f0 + slope * (B_y / B0) * delta(t).
struct CarrierModel {
  double B0 = 0.0;        ///< static field magnitude, G
  double f0 = 0.0;        ///< Breit-Rabi Larmor frequency at B0, Hz
  double slope = 0.0;     ///< df_L/dB at B0, Hz/G
  double projection = 1.0;  ///< B_y / B0
  std::vector<FieldHarmonic> harmonics;

  double frequency(double t) const;  ///< Hz
  double phase(double t) const;      ///< rad, closed-form integral of 2 pi f
  double max_frequency() const;
};

CarrierModel carrier_model(const AtomSpecies& species, int F, const FieldEnvironment& env);

/// Signal amplitude and noise levels of the polarimeter output.
struct SignalBudget {
  double amplitude = 0.0;        ///< V at |<F_z>| = 1
  double detected_power = 0.0;   ///< kappa P0 <1>_I^a, W
  double shot_sigma = 0.0;       ///< per-sample V
  double technical_sigma = 0.0;  ///< per-sample V
  double phi_per_fz = 0.0;       ///< <phi_z>_I^a per unit <F_z>, rad
  double total_sigma() const;
  /// Window SNR (amplitude ratio) of an undephased |<F_z>| = 1 carrier, window tau_f.
  double window_snr(double tau_f, double sample_rate) const;
};

SignalBudget signal_budget(const AtomSpecies& species, int F, const ProbeConfig& probe,
                           const CloudProfile& cloud, const DetectionConfig& detect,
                           const AcquisitionConfig& acq);

/// Technical-noise density (V/sqrt(Hz)) that brings the window SNR down to
/// `target_db` (10 log10 convention). Throws ValidationError if shot noise alone
/// is already below the target.
double technical_noise_for_snr(const SignalBudget& budget, double target_db, double tau_f,
                               double sample_rate);

/// signal(t) = A <F_z>(t - t_tip) D(t - t_tip) cos(phase(t)) + noise, zero signal before t_tip.
/// Throws ValidationError if the highest signal frequency exceeds Nyquist.
RawSignal synthesize(const AtomSpecies& species, int F, const ProbeConfig& probe,
                     const CloudProfile& cloud, const DetectionConfig& detect,
                     const FieldEnvironment& env, const std::optional<DressingConfig>& dressing,
                     const SpinTrajectory& trajectory, const AcquisitionConfig& acq,
                     double initial_larmor_phase = 0.0);

/// Writes `<stem>.meta.json` and `<stem>.f64le`.
void write_signal(const RawSignal& s, const std::filesystem::path& stem);
/// Reads a signal from `<stem>.meta.json` + `<stem>.f64le`; also accepts either file path.
RawSignal read_signal(const std::filesystem::path& path);
void write_signal_csv(const RawSignal& s, const std::filesystem::path& path);
/// Reads (t, volts) rows; the sample rate comes from the mean time step.
RawSignal read_signal_csv(const std::filesystem::path& path);

}  // namespace faraday
