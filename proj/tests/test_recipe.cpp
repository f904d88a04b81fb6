#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "approx.hpp"
#include "faraday/error.hpp"
#include "faraday/recipe.hpp"
#include "faraday/units.hpp"

using namespace faraday;
using nlohmann::json;
namespace u = faraday::units;

TEST_CASE("bundled recipes parse") {
  for (const char* name : {"fig1_tuneout", "fig2_regimes", "fig4_dressing", "fig5_vls", "fig6_magnetometry", "paper_fig6"}) {
    CAPTURE(name);
    const Recipe r = load_recipe(name);
    CHECK(r.name == name);
    CHECK(r.hash.size() == 64);
  }
  const Recipe r = load_recipe("fig6_magnetometry");
  CHECK(field_point(r.species, 1, std::hypot(r.environment.B_y, r.environment.B_z)).f_larmor == rel(697.8e3).epsilon(1e-9));
  REQUIRE(r.environment.harmonics.size() == 3);
  CHECK(r.environment.harmonics[1].frequency == 150.0);
  CHECK(r.environment.harmonics[0].amplitude == rel(162e-6));
  REQUIRE(r.dressing.has_value());
  CHECK(q_net(r.species, 1, r.environment.B_y, r.dressing) == rel(0.0).scale(1.0).epsilon(1e-9));
  CHECK(r.probe.power == rel(9.7e-3));
  CHECK(r.section("snr").contains("tau_s"));
  CHECK(r.section("nonexistent").empty());
}

TEST_CASE("defaults") {
  const Recipe r = default_recipe();
  CHECK(r.ground_F == 1);
  CHECK(r.acquisition.sample_rate == 2e6);
  CHECK(r.analysis.spectrogram.window_length == rel(5e-3));
}

TEST_CASE("recipe validation") {
  CHECK_THROWS_AS(parse_recipe({{"bogus", 1}}), ValidationError);
  CHECK_THROWS_AS(parse_recipe({{"probe", {{"power_w", 1.0}}}}), ValidationError);
  CHECK_THROWS_AS(parse_recipe({{"schema_version", 2}}), ValidationError);
  CHECK_THROWS_AS(parse_recipe({{"cloud", {{"profile", "box"}}}}), ValidationError);
  CHECK_THROWS_AS(parse_recipe({{"environment", {{"B_y_g", 1.0}, {"larmor_khz", 700.0}}}}), ValidationError);
  CHECK_THROWS_AS(parse_recipe({{"dressing", {{"rabi_khz", 10.0}, {"detuning", "fixed"}, {"detuning_khz", 20.0}}}}), ValidationError);
  CHECK_THROWS_AS(parse_recipe({{"analysis", {{"seeds", 0}}}}), ValidationError);
  CHECK_THROWS_AS(parse_recipe({{"probe", {{"power_mw", "ten"}}}}), ValidationError);
  CHECK_THROWS_AS(load_recipe("/nonexistent/recipe.json"), IoError);
}

TEST_CASE("hash and provenance") {
  const Recipe a = parse_recipe({{"probe", {{"power_mw", 5.0}}}}, "x");
  const Recipe b = parse_recipe(json::parse(R"({"probe": {"power_mw": 5.0}})"), "x");
  const Recipe c = parse_recipe({{"probe", {{"power_mw", 6.0}}}}, "x");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const json p = provenance(a, 42);
  CHECK(p["seed"] == 42);
  CHECK(p["recipe_hash"] == a.hash);
  CHECK(p["artifact_version"] == artifact_version);
}
