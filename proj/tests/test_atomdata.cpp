#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "approx.hpp"
#include "faraday/atomdata.hpp"
#include "faraday/error.hpp"
#include "faraday/units.hpp"
#include "oracles.hpp"

using namespace faraday;
namespace u = faraday::units;

namespace {

std::filesystem::path write_species(const nlohmann::json& j, const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("faraday_test_" + name + ".json");
  std::ofstream(p) << j.dump();
  return p;
}

nlohmann::json bundled_json() {
  std::ifstream in(std::filesystem::path(FARADAY_DATA_DIR) / "rb87.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("bundled rb87 loads") {
  const AtomSpecies sp = load_bundled_species("rb87");
  CHECK(sp.name == "rb87");
  CHECK(sp.nuclear_spin == half(3));
  CHECK(sp.lines.size() == 2);
  CHECK(sp.line(LineLabel::D2).wavelength == rel(780.241209686e-9).epsilon(1e-12));
  CHECK(sp.line(LineLabel::D1).excited_offsets.size() == 2);
  CHECK(sp.lande_gF(1) == rel(-0.5018267));
  CHECK(std::abs(alpha0_line_mismatch(sp)) < 0.01);
}

TEST_CASE("species validation") {
  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(load_species("/nonexistent/species.json"), IoError);
  }
  SUBCASE("offsets that are not centroid-referenced are rejected") {
    auto j = bundled_json();
    j["lines"][1]["hyperfine_offsets_MHz"]["3"] = 400.0;
    CHECK_THROWS_AS(load_species(write_species(j, "centroid")), ValidationError);
  }
  SUBCASE("missing nuclear spin") {
    auto j = bundled_json();
    j.erase("nuclear_spin");
    CHECK_THROWS_AS(load_species(write_species(j, "spin")), ValidationError);
  }
  SUBCASE("malformed json") {
    const auto p = std::filesystem::temp_directory_path() / "faraday_test_bad.json";
    std::ofstream(p) << "{\"name\": ";
    CHECK_THROWS_AS(load_species(p), ValidationError);
  }
  SUBCASE("unknown line label") {
    auto j = bundled_json();
    j["lines"][0]["label"] = "D3";
    CHECK_THROWS_AS(load_species(write_species(j, "label")), ValidationError);
  }
}

TEST_CASE("Breit-Rabi agrees with direct diagonalization") {
  const AtomSpecies sp = load_bundled_species("rb87");
  for (double B : {0.0, 0.1, 1.0, 5.0, 50.0, 500.0})
    for (int m = -1; m <= 1; ++m) {
      const double ref = oracle::zeeman_energy(sp, 1, m, B);
      CHECK(breit_rabi(sp, 1, m, B) == rel(ref).epsilon(1e-11).scale(sp.ground_hyperfine_splitting));
    }
  for (int m = -2; m <= 2; ++m)
    CHECK(breit_rabi(sp, 2, m, 3.0) == rel(oracle::zeeman_energy(sp, 2, m, 3.0)).epsilon(1e-11).scale(sp.ground_hyperfine_splitting));
}

TEST_CASE("Larmor frequency and quadratic shift near 1 G") {
  const AtomSpecies sp = load_bundled_species("rb87");
  const double oracle_fl = (oracle::zeeman_energy(sp, 1, -1, 1.0) - oracle::zeeman_energy(sp, 1, 1, 1.0)) / (2 * u::two_pi);
  const FieldPoint p = field_point(sp, 1, 1.0);
  CHECK(p.f_larmor == rel(std::abs(oracle_fl)).epsilon(1e-10));
  CHECK(p.f_larmor == rel(702.37e3).epsilon(1e-4));
  CHECK(p.q_z / u::two_pi == rel(71.9).epsilon(5e-3));
  CHECK(field_for_larmor(sp, 1, p.f_larmor) == rel(1.0).epsilon(1e-9));
  CHECK(field_for_larmor(sp, 1, 697.8e3) == rel(0.9934).epsilon(2e-4));
  CHECK_THROWS_AS(field_for_larmor(sp, 1, 1e9), ComputationError);
  CHECK(gyromagnetic_ratio(sp, 1) / u::two_pi * u::gauss == rel(0.7025e6).epsilon(1e-3));
}

TEST_CASE("Breit-Rabi input validation") {
  const AtomSpecies sp = load_bundled_species("rb87");
  CHECK_THROWS_AS(breit_rabi(sp, 3, 0, 1.0), ValidationError);
  CHECK_THROWS_AS(breit_rabi(sp, 1, 2, 1.0), ValidationError);
  CHECK_THROWS_AS(breit_rabi(sp, 1, 0, -1.0), ValidationError);
}
