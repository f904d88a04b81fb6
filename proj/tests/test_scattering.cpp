#include <doctest.h>

#include <array>
#include <cmath>

#include "approx.hpp"
#include "faraday/error.hpp"
#include "faraday/scattering.hpp"
#include "faraday/units.hpp"

using namespace faraday;
namespace u = faraday::units;

namespace {

const AtomSpecies& rb() {
  static const AtomSpecies sp = load_bundled_species("rb87");
  return sp;
}

}  // namespace

TEST_CASE("Rayleigh plus Raman equals the total for a single unresolved line") {
  const AtomSpecies bare = without_hyperfine(rb());
  for (LineLabel l : {LineLabel::D1, LineLabel::D2}) {
    const std::array<LineLabel, 1> one{l};
    const CouplingTable t = coupling_table(bare, one, 1, 770e-9);
    const ScatteringBudget b = scattering_rate(t, 1e6);
    CHECK(b.gamma_rayleigh + b.gamma_raman == rel(b.gamma_total).epsilon(1e-12));
  }
}

TEST_CASE("scattering is linear in intensity") {
  const CouplingTable t = coupling_table(rb(), 1, 790.018e-9);
  const ScatteringBudget a = scattering_rate(t, 1e6), b = scattering_rate(t, 3e6);
  CHECK(b.gamma_total == rel(3 * a.gamma_total));
  CHECK(a.tau_s == rel(1.0 / a.gamma_total));
  CHECK(std::isinf(scattering_rate(t, 0.0).tau_s));
  CHECK_THROWS_AS(scattering_rate(t, -1.0), ValidationError);
}

TEST_CASE("probe-limited lifetime") {
  ProbeConfig p;
  p.wavelength = 790.018e-9;
  p.power = 9.7e-3;
  CloudProfile c;
  const CouplingTable t = coupling_table(rb(), 1, p.wavelength);
  const LifetimeReport r = cloud_lifetime(p, c, t, 35.0);
  CHECK(r.gamma_per_watt_cloud == rel(85.0).epsilon(0.2));
  CHECK(r.gamma_per_watt_cloud < r.gamma_per_watt_peak);
  CHECK(1.0 / r.tau_combined == rel(1.0 / r.tau_s + 1.0 / 35.0));
  CHECK(combined_lifetime(85.0, 9.7e-3, 35.0) == rel(1.172).epsilon(1e-3));
  CHECK(combined_lifetime(85.0, 0.0, 35.0) == rel(35.0));
  CHECK(std::isinf(combined_lifetime(85.0, 0.0, std::nullopt)));
  CHECK_THROWS_AS(cloud_lifetime(p, c, t, -1.0), ValidationError);
}
