#pragma once

#include "faraday/polarizability.hpp"

namespace faraday {

enum class ProfileKind { Gaussian, ThomasFermi };

/// Axisymmetric atomic cloud seen along the probe axis.
struct CloudProfile {
  double atom_number = 3e5;
  ProfileKind kind = ProfileKind::ThomasFermi;
  /// 1/e^2 radius (Gaussian) or Thomas-Fermi radius, m.
  double radius = 19e-6;

  /// Scalar radius from anisotropic radii (geometric mean).
  static double geometric_mean_radius(double rx, double ry, double rz);

  double column_density(double r) const;  ///< m^-2
  /// Atoms inside a centred aperture of radius a (closed form).
  double atoms_within(double a) const;

  void validate() const;
};

enum class Weighted { Unity, ColumnDensity };

/// <X>_I^a = P0^-1 int_0^a 2 pi r I(r) X(r) dr by adaptive Gauss-Kronrod quadrature.
/// Pass a = +inf for the full beam.
double intensity_weighted_average(const ProbeConfig& beam, const CloudProfile& cloud,
                                  Weighted quantity, double aperture);

}  // namespace faraday
