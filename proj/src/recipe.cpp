#include "faraday/recipe.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

using nlohmann::json;

namespace {

const std::set<std::string> figure_sections = {"tuneout", "regimes", "dressing_scan", "vls", "lifetime", "snr", "aperture"};

class Section {
 public:
  Section(const json& doc, const std::string& key, const std::string& ctx) : ctx_(ctx.empty() ? key : ctx + "." + key) {
    if (doc.contains(key)) {
      j_ = doc.at(key);
      if (!j_.is_object()) throw ValidationError("recipe: '" + ctx_ + "' must be an object");
    }
  }
  explicit Section(const json& obj, std::string ctx) : j_(obj), ctx_(std::move(ctx)) {}

  bool has(const std::string& k) {
    used_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }

  template <class T>
  T get(const std::string& k, T fallback) {
    used_.insert(k);
    if (!j_.contains(k) || j_.at(k).is_null()) return fallback;
    try {
      return j_.at(k).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError("recipe: '" + ctx_ + "." + k + "': " + e.what());
    }
  }

  double num(const std::string& k, double fallback) {
    const double v = get<double>(k, fallback);
    if (!std::isfinite(v)) throw ValidationError("recipe: '" + ctx_ + "." + k + "' must be finite");
    return v;
  }

  const json& at(const std::string& k) {
    used_.insert(k);
    return j_.at(k);
  }

  void finish() const {
    if (!j_.is_object()) return;
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ValidationError("recipe: unknown key '" + ctx_ + "." + k + "'");
  }

  const std::string& ctx() const { return ctx_; }

 private:
  json j_ = json::object();
  std::string ctx_;
  std::set<std::string> used_;
};

ProfileKind parse_profile(const std::string& s) {
  if (s == "thomas_fermi") return ProfileKind::ThomasFermi;
  if (s == "gaussian") return ProfileKind::Gaussian;
  throw ValidationError("recipe: cloud.profile must be 'thomas_fermi' or 'gaussian'");
}

WindowKind parse_window(const std::string& s) {
  if (s == "rectangular") return WindowKind::Rectangular;
  if (s == "hann") return WindowKind::Hann;
  throw ValidationError("recipe: analysis.window must be 'rectangular' or 'hann'");
}

}  // namespace

json Recipe::section(const std::string& key) const {
  return raw.contains(key) ? raw.at(key) : json::object();
}

Recipe parse_recipe(const json& doc, const std::string& name) {
  if (!doc.is_object()) throw ValidationError("recipe: top level must be an object");
  Recipe r;
  r.raw = doc;
  r.name = name;
  r.hash = sha256_hex(doc.dump());

  Section top(doc, "recipe");
  const int version = top.get<int>("schema_version", 1);
  if (version != 1) throw ValidationError("recipe: unsupported schema_version " + std::to_string(version));
  r.species = load_bundled_species(top.get<std::string>("species", "rb87"));
  r.ground_F = top.get<int>("ground_F", 1);
  if (!r.species.g_F.count(r.ground_F)) throw ValidationError("recipe: ground_F not present in species");
  top.get<std::string>("description", "");
  for (const auto& s : {"probe", "cloud", "detection", "environment", "dressing", "spin", "acquisition", "analysis"})
    top.has(s);
  for (const auto& s : figure_sections) {
    if (top.has(s) && !doc.at(s).is_object()) throw ValidationError("recipe: '" + s + "' must be an object");
  }
  top.finish();

  {
    Section s(doc, "probe", "");
    r.probe.wavelength = s.num("wavelength_nm", 790.018) * units::nm;
    r.probe.power = s.num("power_mw", 9.7) * 1e-3;
    r.probe.waist = s.num("waist_um", 75.0) * units::um;
    r.probe.polarization_angle = s.num("polarization_angle_deg", 0.0) * units::pi / 180.0;
    r.probe.ellipticity = s.num("ellipticity", 0.0);
    s.finish();
    r.probe.validate();
  }
  {
    Section s(doc, "cloud", "");
    r.cloud.atom_number = s.num("atom_number", 3e5);
    r.cloud.kind = parse_profile(s.get<std::string>("profile", "thomas_fermi"));
    r.cloud.radius = s.num("radius_um", 19.0) * units::um;
    s.finish();
    r.cloud.validate();
  }
  {
    Section s(doc, "detection", "");
    r.detection.aperture = s.num("aperture_um", 38.0) * units::um;
    r.detection.transmission = s.num("transmission", 0.2);
    r.detection.window = s.num("window_ms", 5.0) * 1e-3;
    r.detection.noise_equivalent_power = s.num("noise_equivalent_power_w_rthz", 0.0);
    s.finish();
    r.detection.validate();
  }
  {
    Section s(doc, "environment", "");
    if (s.has("B_y_g") && s.has("larmor_khz"))
      throw ValidationError("recipe: give either environment.B_y_g or environment.larmor_khz, not both");
    r.environment.B_z = s.num("B_z_mg", 0.0) * 1e-3;
    r.environment.B_vls = s.num("B_vls_mg", 0.0) * 1e-3;
    if (s.has("B_y_g")) {
      r.environment.B_y = s.num("B_y_g", 1.0);
    } else {
      const double fl = s.num("larmor_khz", 697.8) * 1e3;
      const double b = field_for_larmor(r.species, r.ground_F, fl);
      const double bz = r.environment.B_z + r.environment.B_vls;
      if (b <= std::abs(bz)) throw ValidationError("recipe: larmor_khz too small for the given B_z + B_vls");
      r.environment.B_y = std::sqrt(b * b - bz * bz);
    }
    r.environment.gradient = s.num("gradient_mg_per_cm", 0.0) * 1e-3;
    r.environment.line_frequency = s.num("line_frequency_hz", 50.0);
    r.environment.harmonics.clear();
    json harm = s.has("harmonics") ? s.at("harmonics")
                                   : json::array({{{"multiple", 1}, {"amplitude_ug", 162.0}},
                                                  {{"multiple", 3}, {"amplitude_ug", 46.0}},
                                                  {{"multiple", 5}, {"amplitude_ug", 7.0}}});
    if (!harm.is_array()) throw ValidationError("recipe: environment.harmonics must be an array");
    for (std::size_t i = 0; i < harm.size(); ++i) {
      Section h(harm[i], "environment.harmonics[" + std::to_string(i) + "]");
      FieldHarmonic fh;
      if (h.has("frequency_hz") == h.has("multiple"))
        throw ValidationError("recipe: " + h.ctx() + " needs exactly one of frequency_hz or multiple");
      fh.frequency = h.has("frequency_hz") ? h.num("frequency_hz", 0.0)
                                           : h.get<int>("multiple", 1) * r.environment.line_frequency;
      fh.amplitude = h.num("amplitude_ug", 0.0) * 1e-6;
      fh.phase = h.num("phase_deg", 0.0) * units::pi / 180.0;
      h.finish();
      r.environment.harmonics.push_back(fh);
    }
    s.finish();
    r.environment.validate();
  }
  if (!doc.contains("dressing") || doc.at("dressing").is_object()) {
    Section s(doc, "dressing", "");
    const bool enabled = s.get<bool>("enabled", true);
    const double rabi = units::two_pi * s.num("rabi_khz", 8.5) * 1e3;
    double detuning;
    const std::string mode = s.get<std::string>("detuning", "null");
    if (mode == "null") {
      if (s.has("detuning_khz")) throw ValidationError("recipe: dressing.detuning_khz requires detuning = 'fixed'");
      const double b = std::hypot(r.environment.B_y, r.environment.B_z + r.environment.B_vls);
      detuning = null_dressing_detuning(r.species, r.ground_F, b, rabi);
    } else if (mode == "fixed") {
      detuning = units::two_pi * s.num("detuning_khz", 307.0) * 1e3;
    } else {
      throw ValidationError("recipe: dressing.detuning must be 'null' or 'fixed'");
    }
    s.finish();
    if (enabled) {
      r.dressing = DressingConfig{rabi, detuning};
      r.dressing->validate();
    }
  } else if (!doc.at("dressing").is_null()) {
    throw ValidationError("recipe: 'dressing' must be an object or null");
  }
  {
    Section s(doc, "spin", "");
    r.spin.initial.rho0 = s.num("rho0", 0.5);
    r.spin.initial.theta = s.num("theta_rad", 0.0);
    r.spin.initial.magnetization = s.num("magnetization", 0.0);
    r.spin.initial.larmor_phase = s.num("larmor_phase_rad", 0.0);
    r.spin.mixing.c = units::two_pi * s.num("c_hz", -10.0);
    r.spin.output_step = s.num("output_step_ms", 0.1) * 1e-3;
    s.finish();
    r.spin.initial.validate();
    r.spin.mixing.validate();
  }
  {
    Section s(doc, "acquisition", "");
    r.acquisition.sample_rate = s.num("sample_rate_hz", 2e6);
    r.acquisition.duration = s.num("duration_s", 1.02);
    r.acquisition.pre_tip_interval = s.num("pre_tip_ms", 20.0) * 1e-3;
    r.acquisition.rng_seed = s.get<std::uint64_t>("seed", 1);
    r.acquisition.gain = s.num("gain_v_per_w", 1.0);
    r.acquisition.shot_noise = s.get<bool>("shot_noise", true);
    r.acquisition.dephasing = s.get<bool>("dephasing", true);
    if (s.has("technical_noise_v_rthz") && s.has("target_snr_db"))
      throw ValidationError("recipe: give either technical_noise_v_rthz or target_snr_db, not both");
    r.acquisition.technical_noise_density = s.num("technical_noise_v_rthz", 0.0);
    if (s.has("target_snr_db")) r.target_snr_db = s.num("target_snr_db", 16.3);
    else if (!s.has("technical_noise_v_rthz")) r.target_snr_db = 16.3;
    s.finish();
    r.acquisition.validate();
  }
  {
    Section s(doc, "analysis", "");
    auto& a = r.analysis;
    a.spectrogram.window_length = s.num("window_ms", 5.0) * 1e-3;
    a.spectrogram.hop = s.num("hop_ms", 1.0) * 1e-3;
    a.spectrogram.zero_pad_factor = s.get<int>("zero_pad_factor", 8);
    a.spectrogram.window = parse_window(s.get<std::string>("window", "rectangular"));
    a.band = s.num("band_khz", 10.0) * 1e3;
    a.half_band = s.num("search_half_band_hz", 1000.0);
    a.max_missing = s.get<std::size_t>("max_missing_windows", 50);
    a.harmonics.line_frequency = s.num("line_hz", r.environment.line_frequency);
    a.harmonics.multiples = s.get<std::vector<int>>("harmonic_multiples", {1, 3, 5});
    a.harmonics.window_correction = s.get<bool>("window_correction", true);
    a.refine_iterations = s.get<int>("refine_iterations", 3);
    a.seeds = s.get<int>("seeds", 1);
    s.finish();
    a.spectrogram.validate();
    if (!(a.band > 0.0) || !(a.half_band > 0.0)) throw ValidationError("recipe: analysis bands must be > 0");
    if (a.harmonics.multiples.empty()) throw ValidationError("recipe: analysis.harmonic_multiples is empty");
    for (int m : a.harmonics.multiples)
      if (m < 1) throw ValidationError("recipe: harmonic multiples must be >= 1");
    if (a.refine_iterations < 0) throw ValidationError("recipe: refine_iterations must be >= 0");
    if (a.seeds < 1) throw ValidationError("recipe: seeds must be >= 1");
  }
  return r;
}

Recipe load_recipe(const std::string& path_or_name) {
  std::filesystem::path p(path_or_name);
  if (!std::filesystem::exists(p)) {
    std::filesystem::path bundled = std::filesystem::path(FARADAY_RECIPE_DIR) / path_or_name;
    if (bundled.extension() != ".json") bundled += ".json";
    if (std::filesystem::exists(bundled)) p = bundled;
  }
  std::ifstream f(p);
  if (!f) throw IoError("cannot open recipe '" + path_or_name + "'");
  json doc;
  try {
    f >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("recipe '" + p.string() + "': " + e.what());
  }
  return parse_recipe(doc, p.stem().string());
}

Recipe default_recipe() { return parse_recipe(json::object(), "default"); }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw ComputationError("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

json provenance(const Recipe& r, std::uint64_t seed) {
  return {{"recipe", r.name}, {"recipe_hash", r.hash}, {"seed", seed}, {"artifact_version", artifact_version}};
}

}  // namespace faraday
