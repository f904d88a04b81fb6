#include "faraday/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

double CloudProfile::geometric_mean_radius(double rx, double ry, double rz) {
  return std::cbrt(rx * ry * rz);
}

double CloudProfile::column_density(double r) const {
  const double R2 = radius * radius;
  if (kind == ProfileKind::Gaussian)
    return 2.0 * atom_number / (units::pi * R2) * std::exp(-2.0 * r * r / R2);
  const double u = 1.0 - r * r / R2;
  if (u <= 0.0) return 0.0;
  return 5.0 * atom_number / (2.0 * units::pi * R2) * u * std::sqrt(u);
}

double CloudProfile::atoms_within(double a) const {
  if (a <= 0.0) return 0.0;
  const double R2 = radius * radius;
  if (kind == ProfileKind::Gaussian) return atom_number * -std::expm1(-2.0 * a * a / R2);
  const double u = 1.0 - a * a / R2;
  if (u <= 0.0) return atom_number;
  return atom_number * (1.0 - u * u * std::sqrt(u));
}

void CloudProfile::validate() const {
  if (!(atom_number > 0.0)) throw ValidationError("atom number must be > 0");
  if (!(radius > 0.0)) throw ValidationError("cloud radius must be > 0");
}

double intensity_weighted_average(const ProbeConfig& beam, const CloudProfile& cloud,
                                  Weighted quantity, double aperture) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(beam.waist > 0.0)) throw ValidationError("probe waist must be > 0");
  const double w = beam.waist;
  // Normalized intensity profile: 2/(pi w^2) exp(-2 r^2/w^2) integrates to one.
  auto weight = [w](double r) {
    return units::two_pi * r * 2.0 / (units::pi * w * w) * std::exp(-2.0 * r * r / (w * w));
  };
  auto integrand = [&](double r) {
    const double x = quantity == Weighted::Unity ? 1.0 : cloud.column_density(r);
    return weight(r) * x;
  };

  // Beyond 8 waists the Gaussian weight is below e^-128.
  double upper = std::min(aperture, 8.0 * w);
  if (quantity == Weighted::ColumnDensity && cloud.kind == ProfileKind::ThomasFermi)
    upper = std::min(upper, cloud.radius);
  if (quantity == Weighted::ColumnDensity && cloud.kind == ProfileKind::Gaussian)
    upper = std::min(upper, 8.0 * cloud.radius);
  if (upper <= 0.0) return 0.0;

  // Split at the natural scales so each panel is smooth.
  double breaks[] = {0.0, std::min(upper, cloud.radius), std::min(upper, w), upper};
  std::sort(std::begin(breaks), std::end(breaks));
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    double err = 0.0;
    total += gauss_kronrod<double, 61>::integrate(integrand, breaks[i], breaks[i + 1], 15, 1e-12,
                                                  &err);
  }
  return total;
}

}  // namespace faraday
