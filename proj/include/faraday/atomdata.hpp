#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "faraday/angular.hpp"

namespace faraday {

enum class LineLabel { D1, D2 };

std::string to_string(LineLabel label);

/// One fine-structure line S1/2 -> P_{J'} with its excited hyperfine ladder.
struct TransitionLine {
  LineLabel label = LineLabel::D2;
  HalfInt J_excited = half(3);
  double wavelength = 0.0;  ///< centroid-to-centroid vacuum wavelength, m
  double linewidth = 0.0;   ///< natural linewidth Gamma, rad/s
  /// F' (integer) -> offset from the line centroid, rad/s. Centroid-referenced:
  /// the (2F'+1)-weighted mean offset is zero.
  std::map<int, double> excited_offsets;

  double angular_frequency() const;
};

struct AtomSpecies {
  std::string name;
  std::string source;  ///< free-text citation for the constants
  HalfInt nuclear_spin = half(3);
  double ground_hyperfine_splitting = 0.0;  ///< rad/s
  double g_J = 2.00233113;
  double g_I = 0.0;
  std::map<int, double> g_F;  ///< ground F -> Lande g_F
  double mass = 0.0;          ///< kg
  std::vector<TransitionLine> lines;

  const TransitionLine& line(LineLabel label) const;
  double lande_gF(int F) const;
};


/// Parses a species file (see data/rb87.json for the schema). Throws
/// ValidationError on schema or invariant violations, IoError if unreadable.
AtomSpecies load_species(const std::filesystem::path& data_path);

/// Resolves a bundled species by name ("rb87") or treats the argument as a path.
AtomSpecies load_bundled_species(const std::string& name_or_path);

/// Ground-manifold Breit-Rabi energy E_{F,m}(B)/hbar in rad/s, relative to the
/// zero-field hyperfine centroid. B in gauss.
double breit_rabi(const AtomSpecies& species, int F, int m, double B_gauss);

struct FieldPoint {
  double B = 0.0;         ///< G
  double f_larmor = 0.0;  ///< Hz, |E_{+1} - E_{-1}| / 2h
  double q_z = 0.0;       ///< rad/s, (E_{+1} + E_{-1} - 2 E_0) / 2 hbar
};

FieldPoint field_point(const AtomSpecies& species, int F, double B_gauss);

/// Inverts f_L(B) by bisection on [0, 20] G.
double field_for_larmor(const AtomSpecies& species, int F, double f_larmor_hz);

/// |g_F| mu_B / hbar in rad s^-1 T^-1.
double gyromagnetic_ratio(const AtomSpecies& species, int F);

/// lambda^3 Gamma / (lambda^3 Gamma of D2) - 1 for the D1 line.
double alpha0_line_mismatch(const AtomSpecies& species);

}  // namespace faraday
