#include "faraday/atomdata.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

namespace {

using nlohmann::json;

HalfInt parse_half_int(const json& j, const std::string& what) {
  const double v = j.get<double>();
  const double twice = 2.0 * v;
  if (v < 0.0 || std::abs(twice - std::round(twice)) > 1e-9)
    throw ValidationError(what + " must be a non-negative half-integer, got " + j.dump());
  return HalfInt::from_twice(static_cast<int>(std::lround(twice)));
}

LineLabel parse_label(const std::string& s) {
  if (s == "D1") return LineLabel::D1;
  if (s == "D2") return LineLabel::D2;
  throw ValidationError("unknown line label '" + s + "' (expected D1 or D2)");
}

template <class T>
T require(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) throw ValidationError(ctx + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(ctx + ": field '" + key + "': " + e.what());
  }
}

void check_centroid(const TransitionLine& line) {
  double weighted = 0.0, weight = 0.0, scale = 0.0;
  for (auto [Fp, off] : line.excited_offsets) {
    weighted += (2 * Fp + 1) * off;
    weight += 2 * Fp + 1;
    scale = std::max(scale, std::abs(off));
  }
  // 50 kHz absolute or 1e-3 of the ladder span, whichever is larger.
  const double tol = std::max(units::two_pi * 0.05 * units::MHz, 1e-3 * scale);
  if (weight > 0 && std::abs(weighted / weight) > tol)
    throw ValidationError("line " + to_string(line.label) +
                          ": hyperfine offsets are not centroid-referenced (weighted mean " +
                          std::to_string(weighted / weight / units::two_pi / units::MHz) +
                          " MHz)");
}

}  // namespace

std::string to_string(LineLabel label) { return label == LineLabel::D1 ? "D1" : "D2"; }

double TransitionLine::angular_frequency() const {
  return units::wavelength_to_angular(wavelength);
}

const TransitionLine& AtomSpecies::line(LineLabel label) const {
  for (const auto& l : lines)
    if (l.label == label) return l;
  throw ValidationError("species " + name + " has no " + to_string(label) + " line");
}

double AtomSpecies::lande_gF(int F) const {
  auto it = g_F.find(F);
  if (it == g_F.end())
    throw ValidationError("species " + name + " has no g_F for F=" + std::to_string(F));
  return it->second;
}

namespace {

AtomSpecies parse_species(const std::filesystem::path& data_path) {
  std::ifstream in(data_path);
  if (!in) throw IoError("cannot open species file: " + data_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("species file " + data_path.string() + ": " + e.what());
  }
  const std::string ctx = data_path.filename().string();

  AtomSpecies s;
  s.name = require<std::string>(j, "name", ctx);
  s.source = j.value("source", "");
  if (!j.contains("nuclear_spin")) throw ValidationError(ctx + ": missing field 'nuclear_spin'");
  s.nuclear_spin = parse_half_int(j["nuclear_spin"], "nuclear_spin");
  const double hfs_mhz = require<double>(j, "hyperfine_splitting_MHz", ctx);
  if (!(hfs_mhz > 0.0)) throw ValidationError(ctx + ": hyperfine splitting must be > 0");
  s.ground_hyperfine_splitting = units::two_pi * hfs_mhz * units::MHz;
  s.g_J = j.value("g_J", 2.00233113);
  s.g_I = j.value("g_I", 0.0);
  s.mass = j.value("mass_kg", 0.0);
  const json gf = require<json>(j, "gF", ctx);
  for (auto& [key, val] : gf.items())
    s.g_F[std::stoi(key)] = val.get<double>();

  const json lines = require<json>(j, "lines", ctx);
  if (!lines.is_array()) throw ValidationError(ctx + ": 'lines' must be an array");
  for (const auto& lj : lines) {
    TransitionLine line;
    line.label = parse_label(require<std::string>(lj, "label", ctx));
    const std::string lctx = ctx + " line " + to_string(line.label);
    if (!lj.contains("J_excited")) throw ValidationError(lctx + ": missing field 'J_excited'");
    line.J_excited = parse_half_int(lj["J_excited"], "J_excited");
    const double lam_nm = require<double>(lj, "wavelength_nm", lctx);
    const double gamma_mhz = require<double>(lj, "linewidth_MHz_over_2pi", lctx);
    if (!(lam_nm > 0.0)) throw ValidationError(lctx + ": wavelength must be > 0");
    if (!(gamma_mhz > 0.0)) throw ValidationError(lctx + ": linewidth must be > 0");
    line.wavelength = lam_nm * units::nm;
    line.linewidth = units::two_pi * gamma_mhz * units::MHz;
    const json offsets = require<json>(lj, "hyperfine_offsets_MHz", lctx);
    for (auto& [key, val] : offsets.items())
      line.excited_offsets[std::stoi(key)] = units::two_pi * val.get<double>() * units::MHz;
    if (line.excited_offsets.empty()) throw ValidationError(lctx + ": no hyperfine levels");
    check_centroid(line);
    s.lines.push_back(std::move(line));
  }
  bool has_d1 = false, has_d2 = false;
  for (const auto& l : s.lines) {
    has_d1 |= l.label == LineLabel::D1;
    has_d2 |= l.label == LineLabel::D2;
  }
  if (!has_d1 || !has_d2) throw ValidationError(ctx + ": both D1 and D2 lines are required");
  return s;
}

}  // namespace

AtomSpecies load_species(const std::filesystem::path& data_path) {
  try {
    return parse_species(data_path);
  } catch (const json::exception& e) {
    throw ValidationError("species file " + data_path.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError("species file " + data_path.string() + ": " + e.what());
  }
}

AtomSpecies load_bundled_species(const std::string& name_or_path) {
  std::filesystem::path p(name_or_path);
  if (p.has_extension() || std::filesystem::exists(p)) return load_species(p);
  return load_species(std::filesystem::path(FARADAY_DATA_DIR) / (name_or_path + ".json"));
}

double breit_rabi(const AtomSpecies& s, int F, int m, double B_gauss) {
  const int twoI = s.nuclear_spin.twice();
  const int twoF = 2 * F;
  if (twoF != twoI + 1 && twoF != twoI - 1)
    throw ValidationError("F=" + std::to_string(F) + " is not a ground hyperfine level");
  if (std::abs(m) > F) throw ValidationError("|m| > F in breit_rabi");
  if (B_gauss < 0.0) throw ValidationError("negative field in breit_rabi");

  const double dE = s.ground_hyperfine_splitting;  // rad/s
  const double I = 0.5 * twoI;
  const double muB_B = units::mu_B * B_gauss * units::gauss / units::hbar;  // rad/s
  const double x = (s.g_J - s.g_I) * muB_B / dE;

  if (twoF == twoI + 1 && std::abs(m) == F) {
    // Stretched states are exact eigenstates; linear in B.
    const double sign = m > 0 ? 1.0 : -1.0;
    return dE * I / (2 * I + 1) + 0.5 * sign * (s.g_J + 2 * I * s.g_I) * muB_B;
  }
  const double upper = twoF == twoI + 1 ? 1.0 : -1.0;
  return -dE / (2 * (2 * I + 1)) + s.g_I * m * muB_B +
         upper * 0.5 * dE * std::sqrt(1.0 + 4.0 * m * x / (2 * I + 1) + x * x);
}

FieldPoint field_point(const AtomSpecies& s, int F, double B_gauss) {
  if (F < 1) throw ValidationError("field_point needs F >= 1");
  const double ep = breit_rabi(s, F, +1, B_gauss);
  const double em = breit_rabi(s, F, -1, B_gauss);
  const double e0 = breit_rabi(s, F, 0, B_gauss);
  FieldPoint fp;
  fp.B = B_gauss;
  fp.f_larmor = std::abs(ep - em) / 2.0 / units::two_pi;
  fp.q_z = (ep + em - 2.0 * e0) / 2.0;
  return fp;
}

double field_for_larmor(const AtomSpecies& s, int F, double f_larmor_hz) {
  if (f_larmor_hz < 0.0) throw ValidationError("negative Larmor frequency");
  double lo = 0.0, hi = 20.0;
  if (field_point(s, F, hi).f_larmor < f_larmor_hz)
    throw ComputationError("Larmor frequency beyond the 20 G inversion range");
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (field_point(s, F, mid).f_larmor < f_larmor_hz ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gyromagnetic_ratio(const AtomSpecies& s, int F) {
  return std::abs(s.lande_gF(F)) * units::mu_B / units::hbar;
}

double alpha0_line_mismatch(const AtomSpecies& s) {
  auto strength = [](const TransitionLine& l) { return std::pow(l.wavelength, 3) * l.linewidth; };
  return strength(s.line(LineLabel::D1)) / strength(s.line(LineLabel::D2)) - 1.0;
}

}  // namespace faraday
