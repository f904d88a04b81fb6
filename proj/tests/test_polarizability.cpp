#include <doctest.h>

#include <cmath>
#include <map>

#include "approx.hpp"
#include "faraday/error.hpp"
#include "faraday/polarizability.hpp"
#include "faraday/units.hpp"

using namespace faraday;
namespace u = faraday::units;

namespace {

const AtomSpecies& rb() {
  static const AtomSpecies sp = load_bundled_species("rb87");
  return sp;
}

double omega_fs() {
  return rb().line(LineLabel::D2).angular_frequency() - rb().line(LineLabel::D1).angular_frequency();
}

}  // namespace

TEST_CASE("coupling coefficient sums per line") {
  std::map<LineLabel, double> r0, r1, r2;
  for (const auto& c : coupling_coefficients(rb(), 1)) {
    r0[c.line] += c.rank0;
    r1[c.line] += c.rank1;
    r2[c.line] += c.rank2;
  }
  CHECK(r0[LineLabel::D2] / r0[LineLabel::D1] == rel(2.0).epsilon(1e-14));
  CHECK(r0[LineLabel::D2] / 4.0 == rel(r0[LineLabel::D1] / 2.0).epsilon(1e-14));
  CHECK(r1[LineLabel::D1] + r1[LineLabel::D2] == rel(0.0).scale(1.0).epsilon(1e-14));
  CHECK(r2[LineLabel::D1] == rel(0.0).scale(1.0).epsilon(1e-14));
  CHECK(r2[LineLabel::D2] == rel(0.0).scale(1.0).epsilon(1e-14));
  CHECK(coupling_coefficients(rb(), 1).size() == 5);
}

TEST_CASE("far-detuned model guard") {
  const double lambda = u::angular_to_wavelength(rb().line(LineLabel::D2).angular_frequency() +
                                                 rb().line(LineLabel::D2).excited_offsets.at(2));
  CHECK_THROWS_AS(coupling_table(rb(), 1, lambda), ComputationError);
  CHECK_NOTHROW(coupling_table(rb(), 1, 790e-9));
}

TEST_CASE("inter-line magic zero") {
  const auto roots = magic_zero_wavelengths(rb(), 1, 781e-9, 794e-9);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == rel(790.02e-9).epsilon(0.05 / 790.02));
  const CouplingTable t = coupling_table(rb(), 1, roots[0]);
  CHECK(std::abs(t.sum(0)) * omega_fs() < 1e-9);
  CHECK(std::abs(scalar_shift(t, 1e7)) < 1e-6 * std::abs(scalar_shift(coupling_table(rb(), 1, 785e-9), 1e7)));
}

TEST_CASE("hyperfine-free magic zero sits at -omega_fs/6 from the line centre") {
  const AtomSpecies bare = without_hyperfine(rb());
  const double w1 = bare.line(LineLabel::D1).angular_frequency();
  const double w2 = bare.line(LineLabel::D2).angular_frequency();
  const auto roots = magic_zero_frequencies(bare, 1, w1 + 1e-3 * (w2 - w1), w2 - 1e-3 * (w2 - w1));
  REQUIRE(roots.size() == 1);
  const double centre_detuning = roots[0] - 0.5 * (w1 + w2);
  CHECK(centre_detuning / (-(w2 - w1) / 6.0) == rel(1.0).epsilon(1e-6));
}

TEST_CASE("D2 hyperfine magic zeros") {
  const double w2 = rb().line(LineLabel::D2).angular_frequency();
  const auto roots = magic_zero_frequencies(rb(), 1, w2 - u::two_pi * 500e6, w2 - u::two_pi * 50e6);
  REQUIRE(roots.size() == 2);
  CHECK((roots[0] - w2) / (u::two_pi * 1e6) == rel(-284.66).epsilon(1e-3));
  CHECK((roots[1] - w2) / (u::two_pi * 1e6) == rel(-143.68).epsilon(1e-3));
}

TEST_CASE("weighted detunings") {
  SUBCASE("single-row limit") {
    CouplingTable t;
    CouplingRow r;
    r.coeff.rank0 = 1.0;
    r.coeff.rank1 = 0.5;
    r.detuning = -2.0;
    t.rows.push_back(r);
    const WeightedDetunings w = weighted_detunings(t);
    CHECK(w.xi_f() == rel(-4.0));
    CHECK(w.xi_s() == rel(2.0));
    CHECK(std::abs(w.ratio()) == rel(0.5));
  }
  SUBCASE("regime I limit") {
    const double w = omega_from_line_detuning(rb(), LineLabel::D2, -u::two_pi * 50e9);
    const WeightedDetunings wd = weighted_detunings(coupling_table(rb(), 1, u::angular_to_wavelength(w)));
    CHECK(std::abs(wd.xi_f() / wd.xi_s()) == rel(3.0 * std::sqrt(2.0)).epsilon(0.02));
  }
  SUBCASE("regime III values") {
    auto ratio = [](double mhz) {
      const double w = omega_from_line_detuning(rb(), LineLabel::D2, u::two_pi * mhz * 1e6);
      return std::abs(weighted_detunings(coupling_table(rb(), 1, u::angular_to_wavelength(w))).ratio());
    };
    CHECK(ratio(-156.0) == rel(0.76).epsilon(0.01 / 0.76));
    CHECK(ratio(-143.0) == rel(0.75).epsilon(0.01 / 0.75));
  }
}

TEST_CASE("Faraday coupling prefactors agree") {
  const double rho = 1e14;
  const TransitionLine& d2 = rb().line(LineLabel::D2);
  const double a0 = polarizability_constant(rb());
  CHECK(faraday_phi0(a0, rho, 790e-9) == rel(faraday_phi0_optical_depth(d2, rho, 790e-9)).epsilon(1e-9));
  const CouplingTable t = coupling_table(rb(), 1, 790e-9);
  CHECK(faraday_angle(t, rho, 790e-9, 2.0) == rel(2.0 * faraday_angle(t, rho, 790e-9, 1.0)));
}

TEST_CASE("vector light shift") {
  const CouplingTable t = coupling_table(rb(), 1, 790.018e-9);
  const double I = 1e7;
  const double b = vls_effective_field(rb(), t, I, 1.0);
  CHECK(vls_effective_field(rb(), t, I, -1.0) == rel(-b));
  CHECK(vls_effective_field(rb(), t, I, 0.0) == 0.0);
  CHECK(vls_effective_field(rb(), t, 2 * I, 0.3) == rel(0.6 * b));
  CHECK(vls_waveplate(2.0, 0.3 + u::pi / 4, 0.3) == rel(2.0));
  CHECK(std::abs(vls_waveplate(2.0, 0.3, 0.3)) < 1e-15);
  CHECK(tensor_cancellation_angle() == rel(std::acos(1.0 / std::sqrt(3.0))));
}

TEST_CASE("probe validation") {
  ProbeConfig p;
  p.power = 1e-3;
  CHECK_NOTHROW(p.validate());
  CHECK(p.peak_intensity() == rel(2e-3 / (u::pi * p.waist * p.waist)));
  CHECK(p.intensity(p.waist) == rel(p.peak_intensity() * std::exp(-2.0)));
  p.ellipticity = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.ellipticity = 0.0;
  p.waist = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
