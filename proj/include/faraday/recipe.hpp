#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "faraday/dsp.hpp"

namespace faraday {

inline constexpr const char* artifact_version = "faraday 1.0.0";

struct AnalysisSettings {
  SpectrogramConfig spectrogram;
  double band = 10e3;        ///< stored spectrogram band around the carrier, Hz
  double half_band = 1e3;    ///< ridge search half-width, Hz
  std::size_t max_missing = 50;
  HarmonicConfig harmonics;
  int refine_iterations = 3;
  int seeds = 1;
};

struct SpinSettings {
  SpinorState initial;
  SpinMixing mixing;
  double output_step = 1e-4;  ///< s
};

/// A validated experiment description; every section has defaults matching the
/// reference magnetometry configuration.
struct Recipe {
  nlohmann::json raw = nlohmann::json::object();
  std::string name = "default";
  std::string hash;

  AtomSpecies species;
  int ground_F = 1;
  ProbeConfig probe;
  CloudProfile cloud;
  DetectionConfig detection;
  FieldEnvironment environment;
  std::optional<DressingConfig> dressing;
  SpinSettings spin;
  AcquisitionConfig acquisition;
  std::optional<double> target_snr_db;
  AnalysisSettings analysis;

  /// Figure-specific section (e.g. "tuneout", "vls"); empty object if absent.
  nlohmann::json section(const std::string& key) const;
};

/// Parses and validates a recipe document. Unknown keys are rejected.
Recipe parse_recipe(const nlohmann::json& doc, const std::string& name = "inline");
/// Loads a recipe by path, or by bare name from the bundled recipes directory.
Recipe load_recipe(const std::string& path_or_name);
/// Recipe with all defaults (reference magnetometry run).
Recipe default_recipe();

/// Lower-case hex SHA-256 of the canonical (sorted-key, compact) JSON dump.
std::string sha256_hex(const std::string& data);

/// {recipe, recipe_hash, seed, artifact_version}
nlohmann::json provenance(const Recipe& r, std::uint64_t seed);

}  // namespace faraday
