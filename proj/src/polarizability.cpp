#include "faraday/polarizability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

double ProbeConfig::angular_frequency() const { return units::wavelength_to_angular(wavelength); }

double ProbeConfig::peak_intensity() const { return 2.0 * power / (units::pi * waist * waist); }

double ProbeConfig::intensity(double r) const {
  return peak_intensity() * std::exp(-2.0 * r * r / (waist * waist));
}

void ProbeConfig::validate() const {
  if (!(wavelength > 0.0)) throw ValidationError("probe wavelength must be > 0");
  if (!(power >= 0.0)) throw ValidationError("probe power must be >= 0");
  if (!(waist > 0.0)) throw ValidationError("probe waist must be > 0");
  if (!(std::abs(ellipticity) <= 1.0)) throw ValidationError("ellipticity must lie in [-1, 1]");
}

std::vector<CouplingCoefficient> coupling_coefficients(const AtomSpecies& species, int F) {
  if (F < 1) throw ValidationError("coupling coefficients need ground F >= 1");
  const HalfInt J = half(1);
  const HalfInt I = species.nuclear_spin;
  if (!triangle(J, I, HalfInt(F)))
    throw ValidationError("F=" + std::to_string(F) + " is not a ground level of " + species.name);

  std::vector<CouplingCoefficient> out;
  for (const auto& line : species.lines) {
    const HalfInt Jp = line.J_excited;
    for (const auto& [Fp, offset] : line.excited_offsets) {
      if (std::abs(Fp - F) > 1) continue;
      const double sixj = wigner6j(HalfInt(1), J, Jp, I, HalfInt(Fp), HalfInt(F));
      const double strength = (2.0 * Fp + 1.0) * Jp.multiplicity() * sixj * sixj;
      if (strength == 0.0) continue;

      CouplingCoefficient c;
      c.line = line.label;
      c.J_excited = Jp;
      c.F_excited = Fp;
      c.rank0 = strength;
      const double f = F;
      if (Fp == F - 1) {
        c.rank1 = -strength / f;
        c.rank2 = strength / (2.0 * Fp + 1.0) / f;
      } else if (Fp == F) {
        c.rank1 = -strength / (f * (f + 1.0));
        c.rank2 = -strength / (2.0 * Fp + 1.0) * (2.0 * f + 1.0) / (f * (f + 1.0));
      } else {
        c.rank1 = strength / Fp;
        c.rank2 = strength / (2.0 * Fp + 1.0) / Fp;
      }
      c.resonance = line.angular_frequency() + offset;
      c.linewidth = line.linewidth;
      out.push_back(c);
    }
  }
  return out;
}

double CouplingTable::sum(int rank, int power) const {
  double s = 0.0;
  for (const auto& r : rows) {
    const double a = rank == 0 ? r.coeff.rank0 : rank == 1 ? r.coeff.rank1 : r.coeff.rank2;
    s += a / std::pow(r.detuning, power);
  }
  return s;
}

double polarizability_constant(const AtomSpecies& species) {
  const double mismatch = alpha0_line_mismatch(species);
  if (std::abs(mismatch) > 0.01)
    throw ComputationError("lambda^3 Gamma differs between D1 and D2 by " +
                           std::to_string(100 * mismatch) + "%; alpha0 is not line-independent");
  const auto& d2 = species.line(LineLabel::D2);
  return 3.0 * units::epsilon0 * units::hbar * std::pow(d2.wavelength, 3) * d2.linewidth /
         (8.0 * units::pi * units::pi);
}

CouplingTable coupling_table(const AtomSpecies& species, std::span<const LineLabel> lines, int F,
                             double wavelength) {
  if (!(wavelength > 0.0)) throw ValidationError("probe wavelength must be > 0");
  CouplingTable t;
  t.ground_F = F;
  t.probe_omega = units::wavelength_to_angular(wavelength);
  t.alpha0 = polarizability_constant(species);
  for (const auto& c : coupling_coefficients(species, F)) {
    if (std::find(lines.begin(), lines.end(), c.line) == lines.end()) continue;
    const double detuning = t.probe_omega - c.resonance;
    if (std::abs(detuning) <= c.linewidth)
      throw ComputationError("far-detuned model invalid: probe within one linewidth of " +
                             to_string(c.line) + " F'=" + std::to_string(c.F_excited));
    t.rows.push_back({c, detuning});
  }
  return t;
}

CouplingTable coupling_table(const AtomSpecies& species, int F, double wavelength) {
  static constexpr LineLabel both[] = {LineLabel::D1, LineLabel::D2};
  return coupling_table(species, both, F, wavelength);
}

AtomSpecies without_hyperfine(const AtomSpecies& species) {
  AtomSpecies s = species;
  for (auto& line : s.lines)
    for (auto& [Fp, off] : line.excited_offsets) off = 0.0;
  return s;
}

double WeightedDetunings::xi_s() const { return 1.0 / std::sqrt(inv_xi_s_sq); }

double WeightedDetunings::ratio() const { return inv_xi_f / std::sqrt(inv_xi_s_sq); }

WeightedDetunings weighted_detunings(const CouplingTable& table) {
  return {table.sum(1, 1), table.sum(0, 2)};
}

double scalar_shift(const CouplingTable& table, double intensity) {
  return table.alpha0 * intensity * table.sum(0, 1) /
         (6.0 * units::epsilon0 * units::c * units::hbar * units::hbar);
}

namespace {

double scalar_sum_at(const std::vector<CouplingCoefficient>& coeffs, double omega) {
  double s = 0.0;
  for (const auto& c : coeffs) s += c.rank0 / (omega - c.resonance);
  return s;
}

}  // namespace

std::vector<double> magic_zero_frequencies(const AtomSpecies& species, int F, double omega_lo,
                                           double omega_hi) {
  if (!(omega_lo < omega_hi)) throw ValidationError("empty magic-zero search window");
  const auto coeffs = coupling_coefficients(species, F);

  // Split the window at every pole; each sub-interval has at most one root
  // because the scalar sum is strictly decreasing between poles.
  std::vector<double> edges{omega_lo, omega_hi};
  for (const auto& c : coeffs)
    if (c.resonance > omega_lo && c.resonance < omega_hi) edges.push_back(c.resonance);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto is_pole = [&](double w) {
    return std::any_of(coeffs.begin(), coeffs.end(), [&](const auto& c) { return c.resonance == w; });
  };

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double a = edges[i], b = edges[i + 1];
    // Step off poles by a relative hair; the sum diverges there with known sign.
    const double eps = std::max(1e-9 * (b - a), 16.0 * std::numeric_limits<double>::epsilon() * std::abs(a));
    if (is_pole(a)) a += eps;
    if (is_pole(b)) b -= eps;
    double fa = scalar_sum_at(coeffs, a), fb = scalar_sum_at(coeffs, b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (fb == 0.0 || (fa > 0) == (fb > 0)) {
      if (fb == 0.0) roots.push_back(b);
      continue;
    }
    while (true) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      const double fm = scalar_sum_at(coeffs, mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if ((fm > 0) == (fa > 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

std::vector<double> magic_zero_wavelengths(const AtomSpecies& species, int F, double lambda_min,
                                           double lambda_max) {
  if (!(lambda_min > 0.0 && lambda_min < lambda_max))
    throw ValidationError("invalid wavelength window");
  auto roots = magic_zero_frequencies(species, F, units::wavelength_to_angular(lambda_max),
                                      units::wavelength_to_angular(lambda_min));
  std::vector<double> out;
  out.reserve(roots.size());
  for (double w : roots) out.push_back(units::angular_to_wavelength(w));
  std::sort(out.begin(), out.end());
  return out;
}

double faraday_phi0(double alpha0, double column_density, double wavelength) {
  return units::pi * alpha0 * column_density / (units::epsilon0 * units::hbar * wavelength);
}

double faraday_phi0_optical_depth(const TransitionLine& line, double column_density,
                                  double wavelength) {
  const double sigma = 3.0 * line.wavelength * line.wavelength / units::two_pi;
  return (line.wavelength / wavelength) * (line.linewidth / 4.0) * column_density * sigma;
}

double faraday_angle(const CouplingTable& table, double column_density, double wavelength,
                     double Fz) {
  if (column_density < 0.0) throw ValidationError("column density must be >= 0");
  return faraday_phi0(table.alpha0, column_density, wavelength) * Fz * table.sum(1, 1);
}

double vls_effective_field(const AtomSpecies& species, const CouplingTable& table,
                           double intensity, double ellipticity) {
  if (std::abs(ellipticity) > 1.0) throw ValidationError("ellipticity must lie in [-1, 1]");
  // Rank-1 shift per unit m_F in rad/s.
  const double shift = table.alpha0 * intensity * ellipticity * table.sum(1, 1) /
                       (4.0 * units::epsilon0 * units::c * units::hbar * units::hbar);
  const double gF = species.lande_gF(table.ground_F);
  const double tesla = shift * units::hbar / (units::mu_B * gF);
  return tesla / units::gauss;
}

double vls_waveplate(double b_circular, double theta, double theta0) {
  return b_circular * std::sin(2.0 * (theta - theta0));
}

double tensor_coefficient(const CouplingTable& table) { return table.sum(2, 1); }

double tensor_cancellation_angle() { return std::atan(std::sqrt(2.0)); }

double omega_from_line_detuning(const AtomSpecies& species, LineLabel line, double detuning) {
  return species.line(line).angular_frequency() + detuning;
}

}  // namespace faraday
