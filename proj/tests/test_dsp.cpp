#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <random>

#include "approx.hpp"
#include "faraday/dsp.hpp"
#include "faraday/error.hpp"
#include "faraday/units.hpp"

using namespace faraday;
namespace u = faraday::units;

namespace {

RawSignal make_signal(double fs, double duration, const std::function<double(double)>& f,
                      double sigma = 0.0, std::uint64_t seed = 1) {
  RawSignal s;
  s.sample_rate = fs;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration * fs));
  s.samples.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = f(i / fs) + (sigma > 0 ? sigma * g(rng) : 0.0);
  return s;
}

double tone_amplitude(const RawSignal& s, double f) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    acc += s.samples[i] * std::polar(1.0, -u::two_pi * f * i / s.sample_rate);
  return 2.0 * std::abs(acc) / s.samples.size();
}

}  // namespace

TEST_CASE("band-pass passes the band and rejects the rest") {
  const double fs = 1e5;
  const RawSignal in = make_signal(fs, 1.0, [](double t) {
    return std::cos(u::two_pi * 10300 * t) + std::cos(u::two_pi * 15000 * t) + std::cos(u::two_pi * 2000 * t);
  });
  const RawSignal out = bandpass(in, 10e3, 2e3);
  CHECK(tone_amplitude(out, 10300) == rel(1.0).epsilon(0.01));
  CHECK(20 * std::log10(tone_amplitude(out, 15000)) < -60.0);
  CHECK(20 * std::log10(tone_amplitude(out, 2000)) < -60.0);
  CHECK_THROWS_AS(bandpass(in, 100.0, 1e3), ValidationError);
}

TEST_CASE("spectrogram geometry and Parseval") {
  const double fs = 2e5;
  const RawSignal s = make_signal(fs, 0.05, [](double t) { return std::cos(u::two_pi * 12345 * t); }, 0.3);
  SpectrogramConfig cfg;
  cfg.window_length = 5e-3;
  cfg.hop = 1e-3;
  cfg.zero_pad_factor = 4;
  const Spectrogram sp = spectrogram(s, cfg);
  const std::size_t n = sp.window_samples;
  CHECK(n == 1000);
  CHECK(sp.times.size() == (s.samples.size() - n) / 200 + 1);
  CHECK(sp.times[0] == rel(0.5 * (n - 1) / fs));
  CHECK(sp.frequencies.size() == sp.padded_length / 2 + 1);
  double worst = 0.0;
  for (std::size_t w = 0; w < sp.times.size(); ++w) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += s.samples[w * 200 + i] * s.samples[w * 200 + i];
    const auto& m = sp.magnitude[w];
    double f = m.front() * m.front() + m.back() * m.back();
    for (std::size_t k = 1; k + 1 < m.size(); ++k) f += 2 * m[k] * m[k];
    worst = std::max(worst, std::abs(f / sp.padded_length - e) / e);
  }
  CHECK(worst < 1e-9);

  cfg.fmin = 11e3;
  cfg.fmax = 13e3;
  const Spectrogram band = spectrogram(s, cfg);
  CHECK(band.frequencies.front() <= 11e3);
  CHECK(band.frequencies.back() >= 13e3);
  CHECK(band.magnitude[3][0] == rel(sp.magnitude[3][band.bin_offset]).epsilon(1e-12));

  cfg.threads = 3;
  CHECK(spectrogram(s, cfg).magnitude == band.magnitude);

  cfg.window_length = 1.0;
  CHECK_THROWS_AS(spectrogram(s, cfg), ValidationError);
}

TEST_CASE("on-bin tone gives a single ridge") {
  const double fs = 2e5;
  const RawSignal s = make_signal(fs, 0.02, [](double t) { return std::cos(u::two_pi * 12000 * t); });
  SpectrogramConfig cfg;
  cfg.zero_pad_factor = 1;
  const Spectrogram sp = spectrogram(s, cfg);
  for (const auto& row : sp.magnitude) {
    const auto it = std::max_element(row.begin(), row.end());
    CHECK(sp.frequencies[it - row.begin()] == rel(12000));
    CHECK(*it == rel(sp.coherent_gain()).epsilon(1e-9));
    int above = 0;
    for (double v : row) above += v > 1e-9 * *it;
    CHECK(above == 1);
  }
}

TEST_CASE("noiseless peak fit is unbiased") {
  const double fs = 2e6;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-500.0, 500.0);
  for (WindowKind kind : {WindowKind::Rectangular, WindowKind::Hann}) {
    double worst = 0.0, worst_amp = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const double f = 697.8e3 + d(rng);
      const RawSignal s = make_signal(fs, 0.006, [f](double t) { return 0.7 * std::cos(u::two_pi * f * t + 0.3); });
      SpectrogramConfig cfg;
      cfg.window = kind;
      cfg.fmin = 690e3;
      cfg.fmax = 705e3;
      const Spectrogram sp = spectrogram(s, cfg);
      const PeakFit p = fit_peak(sp, 0, 695e3, 700.5e3, 0.0);
      REQUIRE_FALSE(p.missing);
      worst = std::max(worst, std::abs(p.frequency - f) / sp.resolution());
      worst_amp = std::max(worst_amp, std::abs(p.amplitude - 0.7) / 0.7);
    }
    CHECK(worst < 1e-3);
    CHECK(worst_amp < 1e-3);
  }
}

TEST_CASE("uncorrected Gaussian fit carries a kernel bias") {
  const double fs = 2e6, f = 697.8e3 + 37.0;
  const RawSignal s = make_signal(fs, 0.006, [f](double t) { return std::cos(u::two_pi * f * t); });
  SpectrogramConfig cfg;
  cfg.fmin = 690e3;
  cfg.fmax = 705e3;
  const Spectrogram sp = spectrogram(s, cfg);
  PeakFitConfig raw;
  raw.kernel_correction = false;
  const double biased = std::abs(fit_peak(sp, 0, 695e3, 700.5e3, 0.0, raw).frequency - f);
  const double corrected = std::abs(fit_peak(sp, 0, 695e3, 700.5e3, 0.0).frequency - f);
  CHECK(corrected < biased);
}

TEST_CASE("measured SNR and frequency error match the Cramer-Rao bound") {
  const double fs = 2e6, f = 697.8e3, amp = 1.0, tau = 5e-3;
  const double target_db = 16.3;
  const double sigma = amp * std::sqrt(fs * tau) / from_db(target_db);
  std::vector<double> snr, z;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const RawSignal s = make_signal(fs, 0.07, [&](double t) { return t < 0.02 ? 0.0 : amp * std::cos(u::two_pi * f * t); }, sigma, seed);
    SpectrogramConfig cfg;
    cfg.hop = tau;
    cfg.fmin = f - 5e3;
    cfg.fmax = f + 5e3;
    const Spectrogram sp = spectrogram(s, cfg);
    TrackConfig tc;
    tc.seed_frequency = f;
    tc.t_tip = 0.02;
    const LarmorTrack tr = track_larmor(sp, tc);
    for (const auto& p : tr.points) {
      if (p.missing) continue;
      snr.push_back(p.snr_db);
      z.push_back((p.frequency - f) / p.std_error);
    }
  }
  REQUIRE(snr.size() > 40);
  const double mean_snr = std::accumulate(snr.begin(), snr.end(), 0.0) / snr.size();
  double chi2 = 0.0;
  for (double v : z) chi2 += v * v;
  CHECK(mean_snr == rel(target_db).epsilon(0.5 / target_db));
  CHECK(chi2 / z.size() == rel(1.0).epsilon(0.3));
}

TEST_CASE("amplitude modulation appears as sidebands") {
  const double fs = 2e6, f = 697.8e3, q = 72.0;
  const RawSignal s = make_signal(fs, 0.4, [&](double t) { return std::cos(u::two_pi * q * t) * std::cos(u::two_pi * f * t); });
  SpectrogramConfig cfg;
  cfg.window_length = 0.4;
  cfg.hop = 0.4;
  cfg.zero_pad_factor = 4;
  cfg.fmin = f - 500;
  cfg.fmax = f + 500;
  const Spectrogram sp = spectrogram(s, cfg);
  const PeakFit lo = fit_peak(sp, 0, f - 150, f - 10, 0.0);
  const PeakFit hi = fit_peak(sp, 0, f + 10, f + 150, 0.0);
  REQUIRE_FALSE(lo.missing);
  REQUIRE_FALSE(hi.missing);
  CHECK(std::abs(lo.frequency - (f - q)) < 1.0 / 0.4);
  CHECK(std::abs(hi.frequency - (f + q)) < 1.0 / 0.4);
  CHECK(lo.amplitude == rel(0.5).epsilon(5e-3));
}

TEST_CASE("linear chirp is tracked within one bin") {
  const double fs = 2e6, f0 = 690e3, rate = 100e3;
  const RawSignal s = make_signal(fs, 0.1, [&](double t) { return std::cos(u::two_pi * (f0 * t + 0.5 * rate * t * t)); });
  SpectrogramConfig cfg;
  cfg.fmin = 680e3;
  cfg.fmax = 710e3;
  const Spectrogram sp = spectrogram(s, cfg);
  TrackConfig tc;
  tc.seed_frequency = f0;
  tc.noise_rms = 1e-3;
  const LarmorTrack tr = track_larmor(sp, tc);
  REQUIRE(tr.valid_count() == tr.points.size());
  double worst = 0.0;
  for (const auto& p : tr.points) worst = std::max(worst, std::abs(p.frequency - (f0 + rate * p.t)));
  CHECK(worst < 1.0 / sp.window_length);
}

TEST_CASE("missing windows are flagged and long gaps truncate the track") {
  const double fs = 2e6, f = 697.8e3;
  const RawSignal s = make_signal(fs, 0.2, [&](double t) {
    return (t > 0.02 && (t < 0.08 || t > 0.1)) ? std::cos(u::two_pi * f * t) : 0.0;
  }, 0.05);
  SpectrogramConfig cfg;
  cfg.fmin = f - 5e3;
  cfg.fmax = f + 5e3;
  const Spectrogram sp = spectrogram(s, cfg);
  TrackConfig tc;
  tc.seed_frequency = f;
  tc.t_tip = 0.02;
  LarmorTrack tr = track_larmor(sp, tc);
  CHECK_FALSE(tr.truncated);
  std::size_t flagged = 0;
  for (const auto& p : tr.points) {
    if (p.t > 0.083 && p.t < 0.097) CHECK(p.missing);
    if (p.t > 0.026 && p.t < 0.077) CHECK_FALSE(p.missing);
    flagged += p.missing;
    if (p.missing) CHECK(std::isnan(p.frequency));
  }
  CHECK(flagged >= 14);
  tc.max_missing = 5;
  tr = track_larmor(sp, tc);
  CHECK(tr.truncated);
  CHECK(tr.diagnostic.find("consecutive") != std::string::npos);
  CHECK(tr.points.back().t < 0.1);
}

TEST_CASE("window response") {
  CHECK(window_response(0.0, 5e-3) == 1.0);
  CHECK(window_response(50, 5e-3) == rel(0.94).epsilon(0.01));
  CHECK(window_response(150, 5e-3) == rel(0.54).epsilon(0.02));
  CHECK(window_response(250, 5e-3) == rel(0.10).epsilon(0.1));
  CHECK(window_response(1e-3, 5e-3) == rel(window_response(1.00001e-1, 5e-5)).epsilon(1e-6));
}

namespace {

LarmorTrack synthetic_track(const std::vector<HarmonicComponent>& comps, double f0, double slope,
                            double noise, double duration = 1.0, std::uint64_t seed = 1) {
  LarmorTrack tr;
  tr.window_length = 5e-3;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double t = 0.0; t < duration; t += 1e-3) {
    double b = 0.0;
    for (const auto& c : comps) b += c.amplitude * std::sin(u::two_pi * c.frequency * t + c.phase);
    tr.points.push_back({t, f0 + slope * b + noise * g(rng), noise, 1.0, 16.0, false});
  }
  return tr;
}

}  // namespace

TEST_CASE("harmonic decomposition") {
  const double slope = 702e3;
  HarmonicConfig hc;
  hc.hz_per_gauss = slope;
  hc.window_correction = false;
  std::vector<HarmonicComponent> comps = {{50, 162e-6, 0.4}, {150, 46e-6, -1.1}, {250, 7e-6, 2.5}};
  const HarmonicFit fit = fit_harmonics(synthetic_track(comps, 697.8e3, slope, 0.0), hc);
  REQUIRE(fit.harmonics.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(fit.harmonics[k].amplitude == rel(comps[k].amplitude).epsilon(1e-9));
    CHECK(fit.harmonics[k].phase == rel(comps[k].phase).epsilon(1e-9));
  }
  CHECK(fit.mean_frequency == rel(697.8e3).epsilon(1e-12));
  HarmonicFit injected;
  injected.harmonics = comps;
  CHECK(fit.peak_to_peak(50) == rel(injected.peak_to_peak(50)).epsilon(1e-9));

  HarmonicFit single;
  single.harmonics = {{50, 1e-4, 0.0}};
  CHECK(single.peak_to_peak(50) == rel(2e-4).epsilon(1e-6));

  const HarmonicFit none = fit_harmonics(synthetic_track({}, 697.8e3, slope, 20.0), hc);
  for (const auto& h : none.harmonics) CHECK(h.amplitude < 3.0 * h.amplitude_err);

  hc.window_correction = true;
  const HarmonicFit corr = fit_harmonics(synthetic_track(comps, 697.8e3, slope, 0.0), hc);
  CHECK(corr.harmonics[1].amplitude == rel(46e-6 / window_response(150, 5e-3)).epsilon(1e-9));

  CHECK_THROWS_AS(fit_harmonics(synthetic_track(comps, 697.8e3, slope, 1.0, 0.015), hc), ComputationError);
  hc.hz_per_gauss = 0.0;
  CHECK_THROWS_AS(fit_harmonics(synthetic_track(comps, 697.8e3, slope, 1.0), hc), ValidationError);
}

TEST_CASE("sensitivity scales with the frequency error") {
  LarmorTrack tr = synthetic_track({}, 697.8e3, 1.0, 0.0, 0.1);
  for (auto& p : tr.points) p.std_error = 2.0;
  const double hz_per_t = 7.02e9;
  const SensitivityReport a = infer_sensitivity(tr, 5e-3, hz_per_t);
  CHECK(a.median == rel(2.0 / hz_per_t * std::sqrt(5e-3)));
  for (auto& p : tr.points) p.std_error = 4.0;
  CHECK(infer_sensitivity(tr, 5e-3, hz_per_t).median == rel(2 * a.median));
  CHECK_THROWS_AS(infer_sensitivity(tr, 0.0, hz_per_t), ValidationError);
}
