#include "faraday/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "faraday/error.hpp"
#include "faraday/fft.hpp"
#include "faraday/units.hpp"

namespace faraday {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
  if (v.empty()) return nan;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

std::vector<double> window_weights(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::Hann)
    for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(units::two_pi * i / static_cast<double>(n));
  return w;
}

}  // namespace

RawSignal bandpass(const RawSignal& signal, double center, double width) {
  const double nyq = 0.5 * signal.sample_rate;
  if (!(width > 0.0) || !(center - 0.5 * width > 0.0) || !(center + 0.5 * width < nyq))
    throw ValidationError("bandpass: band must satisfy 0 < center - width/2 and center + width/2 < Nyquist");
  const std::size_t n = signal.samples.size();
  if (n < 2) throw ValidationError("bandpass: signal too short");
  RealFft fwd(n);
  std::vector<std::complex<double>> spec;
  fwd.forward(signal.samples.data(), n, spec);
  const double df = signal.sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double d = std::abs(k * df - center);
    double g = 0.0;
    if (d <= 0.5 * width) g = 1.0;
    else if (d < width) g = 0.5 * (1.0 + std::cos(units::pi * (d - 0.5 * width) / (0.5 * width)));
    spec[k] *= g;
  }
  RealIfft inv(n);
  RawSignal out;
  out.sample_rate = signal.sample_rate;
  out.metadata = signal.metadata;
  out.metadata["bandpass"] = {{"center_hz", center}, {"width_hz", width}};
  inv.inverse(spec, out.samples);
  return out;
}

void SpectrogramConfig::validate() const {
  if (!(window_length > 0.0)) throw ValidationError("window length must be > 0");
  if (!(hop > 0.0)) throw ValidationError("hop must be > 0");
  if (zero_pad_factor < 1) throw ValidationError("zero-pad factor must be >= 1");
}

double Spectrogram::coherent_gain() const {
  const double n = static_cast<double>(window_samples);
  return window == WindowKind::Hann ? 0.25 * n : 0.5 * n;
}

Spectrogram spectrogram(const RawSignal& signal, const SpectrogramConfig& cfg) {
  cfg.validate();
  if (!(signal.sample_rate > 0.0)) throw ValidationError("signal sample rate must be > 0");
  const std::size_t nwin = static_cast<std::size_t>(std::llround(cfg.window_length * signal.sample_rate));
  const std::size_t nhop = static_cast<std::size_t>(std::llround(cfg.hop * signal.sample_rate));
  if (nwin < 2 || nhop < 1) throw ValidationError("window or hop shorter than one sample");
  if (nwin > signal.samples.size()) throw ValidationError("spectrogram window is longer than the signal");

  Spectrogram s;
  s.window_length = static_cast<double>(nwin) / signal.sample_rate;
  s.hop = static_cast<double>(nhop) / signal.sample_rate;
  s.zero_pad_factor = cfg.zero_pad_factor;
  s.window = cfg.window;
  s.sample_rate = signal.sample_rate;
  s.window_samples = nwin;
  s.padded_length = nwin * static_cast<std::size_t>(cfg.zero_pad_factor);
  const std::size_t nbins = s.padded_length / 2 + 1;
  std::size_t k_lo = 0, k_hi = nbins - 1;
  if (cfg.fmax > cfg.fmin) {
    const double res = s.resolution();
    k_lo = static_cast<std::size_t>(std::max(0.0, std::floor(cfg.fmin / res)));
    k_hi = static_cast<std::size_t>(std::min<double>(static_cast<double>(nbins - 1), std::ceil(cfg.fmax / res)));
    if (k_lo > k_hi) throw ValidationError("spectrogram band lies outside [0, Nyquist]");
  }
  s.bin_offset = k_lo;
  for (std::size_t k = k_lo; k <= k_hi; ++k) s.frequencies.push_back(k * s.resolution());

  const std::size_t count = (signal.samples.size() - nwin) / nhop + 1;
  s.times.resize(count);
  s.magnitude.assign(count, {});
  for (std::size_t w = 0; w < count; ++w)
    s.times[w] = (static_cast<double>(w * nhop) + 0.5 * static_cast<double>(nwin - 1)) / signal.sample_rate;

  const std::vector<double> weights = window_weights(cfg.window, nwin);
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(count)));
  auto worker = [&](std::size_t first, std::size_t last) {
    RealFft fft(s.padded_length);
    std::vector<double> buf(nwin);
    std::vector<std::complex<double>> out;
    for (std::size_t w = first; w < last; ++w) {
      const double* x = signal.samples.data() + w * nhop;
      for (std::size_t i = 0; i < nwin; ++i) buf[i] = x[i] * weights[i];
      fft.forward(buf.data(), nwin, out);
      auto& row = s.magnitude[w];
      row.resize(k_hi - k_lo + 1);
      for (std::size_t k = k_lo; k <= k_hi; ++k) row[k - k_lo] = std::abs(out[k]);
    }
  };
  if (threads == 1) {
    worker(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t a = t * chunk, b = std::min(count, a + chunk);
      if (a < b) pool.emplace_back(worker, a, b);
    }
    for (auto& th : pool) th.join();
  }
  return s;
}

double noise_floor(const Spectrogram& s, double t_end, double center, double band) {
  std::vector<double> mags;
  const double res = s.resolution();
  for (std::size_t w = 0; w < s.times.size(); ++w) {
    if (s.times[w] + 0.5 * s.window_length > t_end + 1e-12) continue;
    for (std::size_t j = 0; j < s.frequencies.size(); ++j)
      if (std::abs(s.frequencies[j] - center) <= 0.5 * band + 0.5 * res) mags.push_back(s.magnitude[w][j]);
  }
  if (mags.empty()) throw ComputationError("noise floor: no spectrogram window ends before the tip");
  return median_of(std::move(mags)) / std::sqrt(std::log(2.0));
}

namespace {

struct Quad {
  double c0, c1, c2;
};

Quad fit_quadratic(const double* y, int h) {
  double sx2 = 0, sx4 = 0, sy = 0, sxy = 0, sx2y = 0;
  for (int x = -h; x <= h; ++x) {
    const double v = y[x + h];
    sx2 += x * x;
    sx4 += double(x) * x * x * x;
    sy += v;
    sxy += x * v;
    sx2y += double(x) * x * v;
  }
  const double n = 2 * h + 1;
  const double det = n * sx4 - sx2 * sx2;
  return {(sy * sx4 - sx2 * sx2y) / det, sxy / sx2, (n * sx2y - sx2 * sy) / det};
}

std::complex<double> dirichlet(double u, std::size_t n, std::size_t pad) {
  const double N = static_cast<double>(n);
  const double P = static_cast<double>(pad);
  const double den = std::sin(units::pi * u / (N * P));
  const double mag = std::abs(den) < 1e-300 ? N : std::sin(units::pi * u / P) / den;
  return std::polar(mag, -units::pi * u * (N - 1.0) / (N * P));
}

double kernel_magnitude(double u, const Spectrogram& s) {
  const std::size_t n = s.window_samples;
  const std::size_t p = static_cast<std::size_t>(s.zero_pad_factor);
  if (s.window == WindowKind::Rectangular) return std::abs(dirichlet(u, n, p));
  const double P = static_cast<double>(p);
  return std::abs(0.5 * dirichlet(u, n, p) - 0.25 * dirichlet(u - P, n, p) - 0.25 * dirichlet(u + P, n, p));
}

struct Vertex {
  double offset;  // bins from the centre sample
  double value;   // fitted peak magnitude
  bool ok;
};

Vertex local_fit(const double* mags, int h, PeakModel model) {
  std::vector<double> y(2 * h + 1);
  for (int i = 0; i < 2 * h + 1; ++i) {
    if (model == PeakModel::GaussianLog) {
      if (!(mags[i] > 0.0)) return {0, 0, false};
      y[i] = std::log(mags[i]);
    } else {
      y[i] = mags[i];
    }
  }
  const Quad q = fit_quadratic(y.data(), h);
  if (!(q.c2 < 0.0)) return {0, 0, false};
  const double off = -q.c1 / (2.0 * q.c2);
  const double peak = q.c0 - q.c1 * q.c1 / (4.0 * q.c2);
  return {off, model == PeakModel::GaussianLog ? std::exp(peak) : peak, std::abs(off) <= h};
}

}  // namespace

PeakFit fit_peak(const Spectrogram& s, std::size_t index, double f_lo, double f_hi, double noise_rms,
                 const PeakFitConfig& cfg) {
  if (index >= s.times.size()) throw ValidationError("fit_peak: window index out of range");
  if (cfg.half_width < 1) throw ValidationError("fit_peak: half width must be >= 1");
  PeakFit r;
  auto missing = [&](const std::string& why) {
    r.missing = true;
    r.reason = why;
    r.frequency = r.std_error = r.amplitude = r.snr_db = nan;
    return r;
  };
  const auto& row = s.magnitude[index];
  const double res = s.resolution();
  const double f0 = s.frequencies.empty() ? 0.0 : s.frequencies.front();
  const long lo = std::max<long>(0, static_cast<long>(std::ceil((f_lo - f0) / res)));
  const long hi = std::min<long>(static_cast<long>(row.size()) - 1, static_cast<long>(std::floor((f_hi - f0) / res)));
  if (hi - lo < 2 * cfg.half_width + 1) return missing("search band narrower than the fit support");

  long jmax = lo;
  for (long j = lo; j <= hi; ++j)
    if (row[j] > row[jmax]) jmax = j;
  const int h = cfg.half_width;
  if (jmax - h < 0 || jmax + h >= static_cast<long>(row.size())) return missing("peak at stored band edge");
  if (jmax == lo || jmax == hi) return missing("peak at search band edge");
  const double med = median_of(std::vector<double>(row.begin() + lo, row.begin() + hi + 1));
  if (!(row[jmax] > cfg.min_peak_to_median * med)) return missing("no significant peak");

  Vertex v = local_fit(&row[jmax - h], h, cfg.model);
  if (!v.ok) return missing("peak fit did not converge");

  double offset = v.offset;
  double peak = v.value;
  if (cfg.kernel_correction) {
    std::vector<double> ideal(2 * h + 1);
    double nu = v.offset;
    Vertex iv{};
    for (int it = 0; it < 6; ++it) {
      for (int i = -h; i <= h; ++i) ideal[i + h] = kernel_magnitude(i - nu, s);
      iv = local_fit(ideal.data(), h, cfg.model);
      if (!iv.ok) break;
      nu += v.offset - iv.offset;
    }
    if (iv.ok) {
      offset = nu;
      peak = v.value * kernel_magnitude(0.0, s) / iv.value;
    }
  }

  const double N = static_cast<double>(s.window_samples);
  r.frequency = (static_cast<double>(s.bin_offset) + jmax + offset) * res;
  r.amplitude = peak / s.coherent_gain();
  const std::vector<double> w = window_weights(s.window, s.window_samples);
  double sw = 0, sw2 = 0;
  for (double x : w) {
    sw += x;
    sw2 += x * x;
  }
  const double snr = noise_rms > 0.0 ? 2.0 * peak / noise_rms * std::sqrt(N * sw2) / sw
                                      : std::numeric_limits<double>::infinity();
  r.snr_db = to_db(snr);
  r.std_error = std::sqrt(24.0) / (units::two_pi * snr * s.window_length);
  return r;
}

std::size_t LarmorTrack::valid_count() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const TrackPoint& p) { return !p.missing; }));
}

LarmorTrack track_larmor(const Spectrogram& s, const TrackConfig& cfg) {
  if (!(cfg.seed_frequency > 0.0)) throw ValidationError("track: seed frequency must be > 0");
  if (!(cfg.half_band > 0.0)) throw ValidationError("track: search half-band must be > 0");
  LarmorTrack tr;
  tr.window_length = s.window_length;
  tr.noise_rms = cfg.noise_rms > 0.0 ? cfg.noise_rms : noise_floor(s, cfg.t_tip, cfg.seed_frequency, cfg.noise_band);

  double centre = cfg.seed_frequency;
  std::size_t run = 0;
  for (std::size_t w = 0; w < s.times.size(); ++w) {
    if (s.times[w] - 0.5 * s.window_length < cfg.t_tip - 1e-12) continue;
    const PeakFit p = fit_peak(s, w, centre - cfg.half_band, centre + cfg.half_band, tr.noise_rms, cfg.peak);
    TrackPoint tp{s.times[w], p.frequency, p.std_error, p.amplitude, p.snr_db, p.missing};
    tr.points.push_back(tp);
    if (p.missing) {
      if (++run > cfg.max_missing) {
        std::ostringstream os;
        os << "track lost for " << run << " consecutive windows at t=" << s.times[w] << " s (" << p.reason << ")";
        tr.truncated = true;
        tr.diagnostic = os.str();
        break;
      }
    } else {
      run = 0;
      centre = p.frequency;
    }
  }
  if (tr.valid_count() == 0 && tr.diagnostic.empty()) tr.diagnostic = "no window contained a significant peak";
  return tr;
}

double window_response(double f, double tau_f) {
  const double x = units::pi * f * tau_f;
  if (std::abs(x) < 1e-3) return 1.0 - x * x / 10.0;
  return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

double HarmonicFit::field_deviation(double t) const {
  double b = 0.0;
  for (const auto& h : harmonics) b += h.amplitude * std::sin(units::two_pi * h.frequency * t + h.phase);
  return b;
}

double HarmonicFit::peak_to_peak(double line_frequency) const {
  const int n = 20000;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < n; ++i) {
    const double v = field_deviation(i / (n * line_frequency));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

HarmonicFit fit_harmonics(const LarmorTrack& track, const HarmonicConfig& cfg) {
  if (!(cfg.line_frequency > 0.0)) throw ValidationError("line frequency must be > 0");
  if (!(cfg.hz_per_gauss > 0.0)) throw ValidationError("hz_per_gauss must be > 0");
  std::vector<const TrackPoint*> pts;
  for (const auto& p : track.points)
    if (!p.missing) pts.push_back(&p);
  const std::size_t K = cfg.multiples.size();
  const std::size_t m = 1 + 2 * K;
  if (pts.size() < m + 1) throw ComputationError("fit_harmonics: track too short for the requested harmonics");
  const double span = pts.back()->t - pts.front()->t;
  if (span < 1.0 / cfg.line_frequency)
    throw ComputationError("fit_harmonics: track shorter than one line period (rank deficient)");

  Eigen::MatrixXd X(pts.size(), m);
  Eigen::VectorXd y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = pts[i]->t;
    X(i, 0) = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double w = units::two_pi * cfg.multiples[k] * cfg.line_frequency;
      X(i, 1 + 2 * k) = std::sin(w * t);
      X(i, 2 + 2 * k) = std::cos(w * t);
    }
    y[i] = pts[i]->frequency;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < static_cast<Eigen::Index>(m)) throw ComputationError("fit_harmonics: rank-deficient design");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double dof = static_cast<double>(pts.size() - m);
  const double s2 = resid.squaredNorm() / dof;
  const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * s2 * cfg.error_inflation * cfg.error_inflation;

  HarmonicFit out;
  out.hz_per_gauss = cfg.hz_per_gauss;
  out.mean_frequency = beta[0];
  out.mean_frequency_err = std::sqrt(cov(0, 0));
  out.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(pts.size()));
  out.window_corrected = cfg.window_correction;
  for (std::size_t k = 0; k < K; ++k) {
    const double f = cfg.multiples[k] * cfg.line_frequency;
    const double g = cfg.window_correction ? window_response(f, track.window_length) : 1.0;
    const double sc = 1.0 / (g * cfg.hz_per_gauss);
    const double a = beta[1 + 2 * k] * sc, b = beta[2 + 2 * k] * sc;
    const double va = cov(1 + 2 * k, 1 + 2 * k) * sc * sc, vb = cov(2 + 2 * k, 2 + 2 * k) * sc * sc;
    HarmonicComponent c;
    c.frequency = f;
    c.amplitude = std::hypot(a, b);
    c.phase = std::atan2(b, a);
    if (c.amplitude > 0.0) {
      c.amplitude_err = std::sqrt((a * a * va + b * b * vb)) / c.amplitude;
      c.phase_err = std::sqrt(b * b * va + a * a * vb) / (c.amplitude * c.amplitude);
    } else {
      c.amplitude_err = std::sqrt(0.5 * (va + vb));
      c.phase_err = units::pi;
    }
    out.harmonics.push_back(c);
  }
  return out;
}

namespace {

RawSignal forward_signal(const HarmonicFit& est, const AnalysisChain& chain) {
  CarrierModel cm;
  cm.f0 = est.mean_frequency;
  cm.slope = est.hz_per_gauss;
  cm.projection = 1.0;
  for (const auto& h : est.harmonics) cm.harmonics.push_back({h.frequency, h.amplitude, h.phase});
  RawSignal s;
  s.sample_rate = chain.sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(chain.t_end * chain.sample_rate));
  s.samples.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / chain.sample_rate;
    if (t >= chain.t_begin) s.samples[i] = std::cos(cm.phase(t));
  }
  return s;
}

}  // namespace

HarmonicFit refine_harmonics(const HarmonicFit& measured, const AnalysisChain& chain, int iterations) {
  HarmonicFit est = measured;
  auto quad = [](const HarmonicComponent& c) { return std::complex<double>(c.amplitude * std::cos(c.phase), c.amplitude * std::sin(c.phase)); };
  for (int it = 0; it < iterations; ++it) {
    const RawSignal sim = forward_signal(est, chain);
    const Spectrogram sp = spectrogram(sim, chain.spectrogram);
    TrackConfig tc = chain.track;
    tc.noise_rms = 1.0;
    tc.seed_frequency = est.mean_frequency;
    const LarmorTrack tr = track_larmor(sp, tc);
    HarmonicConfig hc = chain.harmonics;
    hc.hz_per_gauss = measured.hz_per_gauss;
    const HarmonicFit fwd = fit_harmonics(tr, hc);
    est.mean_frequency += measured.mean_frequency - fwd.mean_frequency;
    for (std::size_t k = 0; k < est.harmonics.size(); ++k) {
      const std::complex<double> z = quad(est.harmonics[k]) + quad(measured.harmonics[k]) - quad(fwd.harmonics[k]);
      est.harmonics[k].amplitude = std::abs(z);
      est.harmonics[k].phase = std::arg(z);
    }
  }
  return est;
}

SensitivityReport infer_sensitivity(const LarmorTrack& track, double tau_f, double hz_per_tesla) {
  if (!(tau_f > 0.0) || !(hz_per_tesla > 0.0)) throw ValidationError("tau_f and gamma must be > 0");
  SensitivityReport r;
  for (const auto& p : track.points)
    if (!p.missing) r.per_window.push_back(p.std_error / hz_per_tesla * std::sqrt(tau_f));
  r.median = r.per_window.empty() ? nan : median_of(r.per_window);
  return r;
}

}  // namespace faraday
