#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "faraday/synth.hpp"

namespace faraday {

/// Zero-phase FFT-domain band-pass: unit gain for |f - center| <= width/2, raised-cosine
/// taper to zero at |f - center| = width.
RawSignal bandpass(const RawSignal& signal, double center, double width);

enum class WindowKind { Rectangular, Hann };

struct SpectrogramConfig {
  double window_length = 5e-3;  ///< s
  double hop = 1e-3;            ///< s
  int zero_pad_factor = 8;
  WindowKind window = WindowKind::Rectangular;
  /// Stored frequency range; empty range (fmax <= fmin) keeps the full spectrum.
  double fmin = 0.0;
  double fmax = 0.0;
  unsigned threads = 1;

  void validate() const;
};

struct Spectrogram {
  double window_length = 0.0;
  double hop = 0.0;
  int zero_pad_factor = 1;
  WindowKind window = WindowKind::Rectangular;
  double sample_rate = 0.0;
  std::size_t window_samples = 0;
  std::size_t padded_length = 0;
  std::size_t bin_offset = 0;      ///< FFT index of frequencies[0]
  std::vector<double> times;       ///< window centres, s
  std::vector<double> frequencies; ///< Hz
  std::vector<std::vector<double>> magnitude;  ///< [window][bin], |X_k|

  double resolution() const { return sample_rate / static_cast<double>(padded_length); }
  /// Peak magnitude of a unit-amplitude on-bin tone (N/2 rectangular, N/4 Hann).
  double coherent_gain() const;
};

Spectrogram spectrogram(const RawSignal& signal, const SpectrogramConfig& cfg = {});

enum class PeakModel { GaussianLog, Parabolic };

struct PeakFitConfig {
  PeakModel model = PeakModel::GaussianLog;
  int half_width = 3;             ///< bins either side of the maximum
  double min_peak_to_median = 4.0;
  /// Remove the deterministic bias of the local fit on the ideal window kernel.
  bool kernel_correction = true;
};

struct PeakFit {
  double frequency = 0.0;  ///< Hz
  double amplitude = 0.0;  ///< V, sinusoid amplitude
  double std_error = 0.0;  ///< Hz
  double snr_db = 0.0;     ///< 10 log10(2 |X|_peak / noise rms)
  bool missing = false;
  std::string reason;
};

/// RMS bin magnitude of noise: median magnitude / sqrt(ln 2) over windows ending
/// before `t_end` and bins within `center +/- band/2`. Throws ComputationError if
/// no window qualifies.
double noise_floor(const Spectrogram& s, double t_end, double center, double band = 2e3);

/// Fits the strongest peak of window `index` within [f_lo, f_hi]. The standard
/// error is the Cramer-Rao bound sqrt(24) / (2 pi S tau_f) at the measured SNR S.
PeakFit fit_peak(const Spectrogram& s, std::size_t index, double f_lo, double f_hi,
                 double noise_rms, const PeakFitConfig& cfg = {});

struct TrackPoint {
  double t = 0.0;
  double frequency = 0.0;
  double std_error = 0.0;
  double amplitude = 0.0;
  double snr_db = 0.0;
  bool missing = false;
};

struct TrackConfig {
  double seed_frequency = 0.0;  ///< Hz
  double half_band = 1e3;       ///< search half-width around the previous fit, Hz
  double t_tip = 0.0;           ///< windows starting at or after t_tip are tracked, s
  double noise_rms = 0.0;       ///< bin-magnitude noise rms; <= 0 derives it from windows ending by t_tip
  double noise_band = 2e3;
  std::size_t max_missing = 50; ///< consecutive missing windows before the track is truncated
  PeakFitConfig peak;
};

struct LarmorTrack {
  std::vector<TrackPoint> points;
  double noise_rms = 0.0;
  double window_length = 0.0;
  bool truncated = false;
  std::string diagnostic;

  std::size_t valid_count() const;
};

LarmorTrack track_larmor(const Spectrogram& s, const TrackConfig& cfg);

/// Transfer function of the peak-frequency estimator of a rectangular window for a
/// sinusoidal frequency modulation at `f` Hz: 3 (sin x - x cos x) / x^3, x = pi f tau_f.
double window_response(double f, double tau_f);

struct HarmonicComponent {
  double frequency = 0.0;   ///< Hz
  double amplitude = 0.0;   ///< G
  double phase = 0.0;       ///< rad, component A sin(2 pi f t + phase)
  double amplitude_err = 0.0;
  double phase_err = 0.0;
};

struct HarmonicFit {
  double mean_frequency = 0.0;   ///< Hz
  double mean_frequency_err = 0.0;
  double hz_per_gauss = 0.0;
  std::vector<HarmonicComponent> harmonics;
  double residual_rms = 0.0;     ///< Hz
  bool window_corrected = false;

  /// Reconstructed field deviation sum A_k sin(2 pi f_k t + phi_k), G.
  double field_deviation(double t) const;
  /// Peak-to-peak of the reconstruction over one line period, G.
  double peak_to_peak(double line_frequency) const;
};

struct HarmonicConfig {
  double line_frequency = 50.0;
  std::vector<int> multiples{1, 3, 5};
  double hz_per_gauss = 0.0;     ///< df_L/dB
  /// Divide by the estimator window response (needs the track window length).
  bool window_correction = true;
  /// Residual correlation between overlapping windows inflates the standard errors
  /// by sqrt(window/hop); set to 1 for independent points.
  double error_inflation = 1.0;
};

/// Linear least squares on DC plus sin/cos quadratures. Throws ComputationError if
/// the valid track is too short for the requested harmonics.
HarmonicFit fit_harmonics(const LarmorTrack& track, const HarmonicConfig& cfg);

/// Analysis chain used by the forward-model refinement.
struct AnalysisChain {
  SpectrogramConfig spectrogram;
  TrackConfig track;
  HarmonicConfig harmonics;
  double sample_rate = 2e6;
  double t_begin = 0.0;  ///< start of carrier in the record
  double t_end = 1.0;    ///< end of the record
};

/// Iteratively corrects the harmonic fit for the nonlinear response of the
/// spectrogram peak estimator: the estimate is pushed by the difference between the
/// measured fit and the fit of a noise-free signal synthesized from the estimate.
HarmonicFit refine_harmonics(const HarmonicFit& measured, const AnalysisChain& chain,
                             int iterations = 3);

struct SensitivityReport {
  std::vector<double> per_window;  ///< T/sqrt(Hz)
  double median = 0.0;
};

/// dB sqrt(T) = (std error of f_L) / (gamma/2pi) * sqrt(tau_f); hz_per_tesla = gamma/2pi.
SensitivityReport infer_sensitivity(const LarmorTrack& track, double tau_f, double hz_per_tesla);

}  // namespace faraday
