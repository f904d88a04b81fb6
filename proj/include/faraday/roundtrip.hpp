#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "faraday/recipe.hpp"

namespace faraday {

/// Everything generated and recovered for one seed.
struct ShotResult {
  std::uint64_t seed = 0;
  double injected_snr_db = 0.0;
  double initial_snr_db = 0.0;      ///< median over the first 20 ms of tracked windows
  double median_snr_db = 0.0;
  double injected_mean_field = 0.0; ///< G
  double recovered_mean_field = 0.0;
  std::vector<double> injected_amplitudes;   ///< G
  std::vector<double> recovered_amplitudes;  ///< G, after refinement
  std::vector<double> amplitude_errors;      ///< G, fit standard errors
  std::vector<double> kernel_only_amplitudes;  ///< G, window-response correction only
  double injected_peak_to_peak = 0.0;
  double recovered_peak_to_peak = 0.0;
  double sensitivity = 0.0;         ///< median dB sqrt(T), T/sqrt(Hz)
  std::size_t valid_windows = 0;
  std::size_t total_windows = 0;
};

struct Tolerances {
  double amplitude = 1e-6;   ///< G
  double mean_field = 1e-6;  ///< G
  double snr_db = 0.5;
};

struct RoundTripReport {
  std::vector<ShotResult> shots;
  std::vector<double> mean_recovered_amplitudes;  ///< G
  std::vector<double> amplitude_scatter;          ///< G, standard deviation over seeds
  double mean_recovered_field = 0.0;
  double mean_initial_snr_db = 0.0;
  double worst_snr_deviation_db = 0.0;
  double worst_field_deviation = 0.0;
  bool amplitudes_pass = false;
  bool field_pass = false;
  bool snr_pass = false;
  bool pass() const { return amplitudes_pass && field_pass && snr_pass; }

  nlohmann::json to_json() const;
};

/// Shared pieces of one synthesize -> analyze pass.
struct ShotArtifacts {
  RawSignal signal;
  Spectrogram spectrogram;
  LarmorTrack track;
  HarmonicFit kernel_fit;
  HarmonicFit refined_fit;
  ShotResult result;
};

/// Synthesizes the recipe's signal with `seed` and analyzes it.
ShotArtifacts run_shot(const Recipe& recipe, std::uint64_t seed, unsigned threads = 1);

/// Analysis of an existing signal (the `analyze` path). Uses the metadata for the
/// tip time and the carrier when present; otherwise the recipe's configuration.
ShotArtifacts analyze_signal(const Recipe& recipe, const RawSignal& signal, unsigned threads = 1);

/// Runs recipe.analysis.seeds shots starting at `first_seed` and compares the
/// seed-averaged recoveries to the injected values.
RoundTripReport roundtrip(const Recipe& recipe, std::uint64_t first_seed, unsigned threads = 1,
                          const Tolerances& tol = {});

}  // namespace faraday
