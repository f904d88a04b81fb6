#include "faraday/roundtrip.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

using nlohmann::json;

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double slope_at(const AtomSpecies& sp, int F, double B) {
  const double h = std::max(1e-6, 1e-4 * B);
  return (field_point(sp, F, B + h).f_larmor - field_point(sp, F, B - h).f_larmor) / (2.0 * h);
}

}  // namespace

ShotArtifacts analyze_signal(const Recipe& recipe, const RawSignal& signal, unsigned threads) {
  const auto& md = signal.metadata;
  const auto& an = recipe.analysis;
  const double tip = md.contains("pre_tip_interval_s") ? md["pre_tip_interval_s"].get<double>()
                                                       : recipe.acquisition.pre_tip_interval;
  double seed_f;
  if (md.contains("carrier") && md["carrier"].contains("f0_hz")) {
    seed_f = md["carrier"]["f0_hz"].get<double>();
  } else {
    const double b0 = std::hypot(recipe.environment.B_y, recipe.environment.B_z + recipe.environment.B_vls);
    seed_f = field_point(recipe.species, recipe.ground_F, b0).f_larmor;
  }

  ShotArtifacts art;
  SpectrogramConfig sc = an.spectrogram;
  sc.fmin = seed_f - 0.5 * an.band;
  sc.fmax = seed_f + 0.5 * an.band;
  sc.threads = threads;
  art.spectrogram = spectrogram(signal, sc);

  TrackConfig tc;
  tc.seed_frequency = seed_f;
  tc.half_band = an.half_band;
  tc.t_tip = tip;
  tc.max_missing = an.max_missing;
  art.track = track_larmor(art.spectrogram, tc);
  if (art.track.valid_count() == 0) throw ComputationError("analysis: " + art.track.diagnostic);

  std::vector<double> fs;
  for (const auto& p : art.track.points)
    if (!p.missing) fs.push_back(p.frequency);
  const double b_est = field_for_larmor(recipe.species, recipe.ground_F, median_of(fs));

  HarmonicConfig hc = an.harmonics;
  hc.hz_per_gauss = slope_at(recipe.species, recipe.ground_F, b_est);
  hc.error_inflation = std::sqrt(art.spectrogram.window_length / art.spectrogram.hop);
  art.kernel_fit = fit_harmonics(art.track, hc);

  if (an.refine_iterations > 0) {
    AnalysisChain chain;
    chain.spectrogram = sc;
    chain.spectrogram.threads = threads;
    chain.track = tc;
    chain.harmonics = hc;
    chain.sample_rate = signal.sample_rate;
    chain.t_begin = tip;
    chain.t_end = static_cast<double>(signal.samples.size()) / signal.sample_rate;
    art.refined_fit = refine_harmonics(art.kernel_fit, chain, an.refine_iterations);
  } else {
    art.refined_fit = art.kernel_fit;
  }

  ShotResult& r = art.result;
  r.recovered_mean_field = field_for_larmor(recipe.species, recipe.ground_F, art.refined_fit.mean_frequency);
  for (std::size_t k = 0; k < art.refined_fit.harmonics.size(); ++k) {
    r.recovered_amplitudes.push_back(art.refined_fit.harmonics[k].amplitude);
    r.amplitude_errors.push_back(art.refined_fit.harmonics[k].amplitude_err);
    r.kernel_only_amplitudes.push_back(art.kernel_fit.harmonics[k].amplitude);
  }
  r.recovered_peak_to_peak = art.refined_fit.peak_to_peak(hc.line_frequency);
  std::vector<double> initial, all;
  for (const auto& p : art.track.points) {
    if (p.missing) continue;
    all.push_back(p.snr_db);
    if (p.t - 0.5 * art.track.window_length - tip <= 20e-3) initial.push_back(p.snr_db);
  }
  r.initial_snr_db = median_of(initial);
  r.median_snr_db = median_of(all);
  r.sensitivity = infer_sensitivity(art.track, art.track.window_length, hc.hz_per_gauss * 1e4).median;
  r.valid_windows = art.track.valid_count();
  r.total_windows = art.track.points.size();
  return art;
}

ShotArtifacts run_shot(const Recipe& recipe, std::uint64_t seed, unsigned threads) {
  const auto& env = recipe.environment;
  const double b0 = std::hypot(env.B_y, env.B_z + env.B_vls);
  AcquisitionConfig acq = recipe.acquisition;
  acq.rng_seed = seed;
  const double q = q_net(recipe.species, recipe.ground_F, b0, recipe.dressing);
  const double post = acq.duration - acq.pre_tip_interval;
  EvolveOptions opts;
  opts.output_step = recipe.spin.output_step;
  const SpinTrajectory traj = evolve_spinor(recipe.spin.initial, q, recipe.spin.mixing.c, post + opts.output_step, opts);

  const double tau = recipe.analysis.spectrogram.window_length;
  if (recipe.target_snr_db) {
    acq.technical_noise_density = 0.0;
    const SignalBudget b = signal_budget(recipe.species, recipe.ground_F, recipe.probe, recipe.cloud,
                                         recipe.detection, acq);
    acq.technical_noise_density = technical_noise_for_snr(b, *recipe.target_snr_db, tau, acq.sample_rate);
  }
  const SignalBudget budget = signal_budget(recipe.species, recipe.ground_F, recipe.probe, recipe.cloud,
                                            recipe.detection, acq);
  RawSignal sig = synthesize(recipe.species, recipe.ground_F, recipe.probe, recipe.cloud, recipe.detection, env,
                             recipe.dressing, traj, acq, recipe.spin.initial.larmor_phase);
  sig.metadata["provenance"] = provenance(recipe, seed);

  ShotArtifacts art = analyze_signal(recipe, sig, threads);
  art.signal = std::move(sig);
  ShotResult& r = art.result;
  r.seed = seed;
  r.injected_snr_db = to_db(budget.window_snr(tau, acq.sample_rate));
  r.injected_mean_field = b0;
  HarmonicFit injected;
  for (const auto& h : env.harmonics) {
    r.injected_amplitudes.push_back(h.amplitude * env.B_y / b0);
    injected.harmonics.push_back({h.frequency, h.amplitude * env.B_y / b0, h.phase, 0.0, 0.0});
  }
  r.injected_peak_to_peak = injected.peak_to_peak(env.line_frequency);
  if (r.injected_amplitudes.size() != r.recovered_amplitudes.size())
    throw ValidationError("roundtrip: analysis harmonics do not match the injected harmonics");
  return art;
}

RoundTripReport roundtrip(const Recipe& recipe, std::uint64_t first_seed, unsigned threads, const Tolerances& tol) {
  const std::size_t n = static_cast<std::size_t>(recipe.analysis.seeds);
  RoundTripReport rep;
  rep.shots.resize(n);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rep.shots[i] = run_shot(recipe, first_seed + i, 1).result;
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);

  const std::size_t K = rep.shots.front().injected_amplitudes.size();
  rep.mean_recovered_amplitudes.assign(K, 0.0);
  rep.amplitude_scatter.assign(K, 0.0);
  for (const auto& s : rep.shots) {
    for (std::size_t k = 0; k < K; ++k) rep.mean_recovered_amplitudes[k] += s.recovered_amplitudes[k] / n;
    rep.mean_recovered_field += s.recovered_mean_field / n;
    rep.mean_initial_snr_db += s.initial_snr_db / n;
    rep.worst_snr_deviation_db = std::max(rep.worst_snr_deviation_db, std::abs(s.initial_snr_db - s.injected_snr_db));
    rep.worst_field_deviation = std::max(rep.worst_field_deviation, std::abs(s.recovered_mean_field - s.injected_mean_field));
  }
  for (const auto& s : rep.shots)
    for (std::size_t k = 0; k < K; ++k) {
      const double d = s.recovered_amplitudes[k] - rep.mean_recovered_amplitudes[k];
      rep.amplitude_scatter[k] += d * d / std::max<std::size_t>(1, n - 1);
    }
  for (auto& v : rep.amplitude_scatter) v = std::sqrt(v);

  const ShotResult& ref = rep.shots.front();
  rep.amplitudes_pass = true;
  for (std::size_t k = 0; k < K; ++k)
    if (!(std::abs(rep.mean_recovered_amplitudes[k] - ref.injected_amplitudes[k]) <= tol.amplitude)) rep.amplitudes_pass = false;
  rep.field_pass = std::abs(rep.mean_recovered_field - ref.injected_mean_field) <= tol.mean_field;
  rep.snr_pass = std::abs(rep.mean_initial_snr_db - ref.injected_snr_db) <= tol.snr_db;
  return rep;
}

json RoundTripReport::to_json() const {
  json shots_j = json::array();
  for (const auto& s : shots) {
    shots_j.push_back({{"seed", s.seed},
                       {"injected_snr_db", s.injected_snr_db},
                       {"initial_snr_db", s.initial_snr_db},
                       {"median_snr_db", s.median_snr_db},
                       {"injected_mean_field_g", s.injected_mean_field},
                       {"recovered_mean_field_g", s.recovered_mean_field},
                       {"injected_amplitudes_g", s.injected_amplitudes},
                       {"recovered_amplitudes_g", s.recovered_amplitudes},
                       {"amplitude_errors_g", s.amplitude_errors},
                       {"window_corrected_amplitudes_g", s.kernel_only_amplitudes},
                       {"injected_peak_to_peak_g", s.injected_peak_to_peak},
                       {"recovered_peak_to_peak_g", s.recovered_peak_to_peak},
                       {"sensitivity_t_rthz", s.sensitivity},
                       {"valid_windows", s.valid_windows},
                       {"total_windows", s.total_windows}});
  }
  const ShotResult& ref = shots.front();
  return {{"seeds", shots.size()},
          {"injected_amplitudes_g", ref.injected_amplitudes},
          {"mean_recovered_amplitudes_g", mean_recovered_amplitudes},
          {"amplitude_scatter_g", amplitude_scatter},
          {"injected_mean_field_g", ref.injected_mean_field},
          {"mean_recovered_field_g", mean_recovered_field},
          {"worst_field_deviation_g", worst_field_deviation},
          {"injected_snr_db", ref.injected_snr_db},
          {"mean_initial_snr_db", mean_initial_snr_db},
          {"worst_snr_deviation_db", worst_snr_deviation_db},
          {"checks",
           {{"amplitudes_within_tolerance", amplitudes_pass},
            {"mean_field_within_tolerance", field_pass},
            {"snr_within_tolerance", snr_pass}}},
          {"pass", pass()},
          {"shots", shots_j}};
}

}  // namespace faraday
