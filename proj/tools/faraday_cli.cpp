#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "faraday/angular.hpp"
#include "faraday/atomdata.hpp"
#include "faraday/dsp.hpp"
#include "faraday/error.hpp"
#include "faraday/geometry.hpp"
#include "faraday/polarizability.hpp"
#include "faraday/recipe.hpp"
#include "faraday/roundtrip.hpp"
#include "faraday/scattering.hpp"
#include "faraday/snrmodel.hpp"
#include "faraday/spindyn.hpp"
#include "faraday/synth.hpp"
#include "faraday/units.hpp"

using namespace faraday;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Global {
  std::uint64_t seed = 1;
  bool seed_given = false;
  unsigned threads = 1;
  std::string out_dir = ".";
  std::string recipe;
};

Recipe recipe_of(const Global& g) { return g.recipe.empty() ? default_recipe() : load_recipe(g.recipe); }

std::uint64_t seed_of(const Global& g, const Recipe& r) { return g.seed_given ? g.seed : r.acquisition.rng_seed; }

fs::path out_path(const Global& g, const std::string& file) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir / file;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write " + p.string());
  f << j.dump(2) << '\n';
  if (!f) throw IoError("write failed for " + p.string());
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& p, const json& prov, const std::string& header) : path_(p), f_(p) {
    if (!f_) throw IoError("cannot write " + p.string());
    f_ << "# provenance: " << prov.dump() << '\n' << header << '\n';
    f_.precision(12);
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((f_ << (first ? "" : ",") << v, first = false), ...);
    f_ << '\n';
  }
  ~CsvWriter() = default;
  void close() {
    f_.close();
    if (!f_) throw IoError("write failed for " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream f_;
};

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

double to_nm(double m) { return m / units::nm; }

// ---------------------------------------------------------------- tuneout
struct TuneoutOpts {
  std::string species;
  std::optional<double> from_nm, to_nm;
  bool no_hyperfine = false;
};

void run_tuneout(const Global& g, const TuneoutOpts& o) {
  const Recipe r = recipe_of(g);
  const json sec = r.section("tuneout");
  const AtomSpecies sp = o.species.empty() ? r.species : load_bundled_species(o.species);
  const double lo = o.from_nm.value_or(sec.value("from_nm", 776.0));
  const double hi = o.to_nm.value_or(sec.value("to_nm", 800.0));
  if (!(lo < hi)) throw ValidationError("tuneout: --from-nm must be below --to-nm");
  const AtomSpecies model = o.no_hyperfine ? without_hyperfine(sp) : sp;
  const auto roots = magic_zero_wavelengths(model, r.ground_F, lo * units::nm, hi * units::nm);
  const double w1 = sp.line(LineLabel::D1).angular_frequency(), w2 = sp.line(LineLabel::D2).angular_frequency();
  json arr = json::array();
  for (double lam : roots) {
    const double w = units::wavelength_to_angular(lam);
    arr.push_back({{"wavelength_nm", to_nm(lam)},
                   {"detuning_d1_ghz", (w - w1) / units::two_pi / 1e9},
                   {"detuning_d2_ghz", (w - w2) / units::two_pi / 1e9},
                   {"detuning_over_fine_structure", (w - w2) / (w2 - w1)}});
  }
  const json out = {{"species", sp.name}, {"ground_F", r.ground_F}, {"hyperfine", !o.no_hyperfine},
                    {"range_nm", {lo, hi}}, {"roots", arr}, {"provenance", provenance(r, seed_of(g, r))}};
  write_json(out_path(g, "tuneout.json"), out);
  print(out);
}

// ---------------------------------------------------------------- coeffs
struct CoeffOpts {
  std::string species;
  std::optional<int> F;
  std::optional<double> wavelength_nm;
};

void run_coeffs(const Global& g, const CoeffOpts& o) {
  const Recipe r = recipe_of(g);
  const AtomSpecies sp = o.species.empty() ? r.species : load_bundled_species(o.species);
  const int F = o.F.value_or(r.ground_F);
  const auto rows = coupling_coefficients(sp, F);
  const json prov = provenance(r, seed_of(g, r));
  CsvWriter csv(out_path(g, "coeffs.csv"), prov, "line,J_excited,F_excited,rank0,rank1,rank2,resonance_thz");
  double s0 = 0, s1 = 0;
  for (const auto& c : rows) {
    csv.row(to_string(c.line), c.J_excited.str(), c.F_excited, c.rank0, c.rank1, c.rank2,
            c.resonance / units::two_pi / 1e12);
    s0 += c.rank0;
    s1 += c.rank1;
  }
  csv.close();
  json out = {{"species", sp.name}, {"ground_F", F}, {"rows", rows.size()}, {"sum_rank0", s0}, {"sum_rank1", s1},
              {"provenance", prov}};
  if (o.wavelength_nm) {
    const CouplingTable t = coupling_table(sp, F, *o.wavelength_nm * units::nm);
    const WeightedDetunings wd = weighted_detunings(t);
    out["at_wavelength"] = {{"wavelength_nm", *o.wavelength_nm},
                            {"xi_f_ghz", wd.xi_f() / units::two_pi / 1e9},
                            {"xi_s_ghz", wd.xi_s() / units::two_pi / 1e9},
                            {"xi_ratio", wd.ratio()},
                            {"scalar_sum_per_ghz", t.sum(0, 1) * units::two_pi * 1e9}};
  }
  print(out);
}

// ---------------------------------------------------------------- snr-scan
struct ScanOpts {
  std::optional<double> from_nm, to_nm;
  std::optional<int> points;
};

void run_snr_scan(const Global& g, const ScanOpts& o) {
  const Recipe r = recipe_of(g);
  const json sec = r.section("regimes");
  const double lo = o.from_nm.value_or(sec.value("from_nm", 776.0));
  const double hi = o.to_nm.value_or(sec.value("to_nm", 800.0));
  const int n = o.points.value_or(sec.value("points", 2401));
  if (!(lo < hi) || n < 2) throw ValidationError("snr-scan: need from < to and at least 2 points");
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = (lo + (hi - lo) * i / (n - 1)) * units::nm;
  const auto pts = regime_scan(r.species, r.ground_F, grid);
  const json prov = provenance(r, seed_of(g, r));
  CsvWriter csv(out_path(g, "snr_scan.csv"), prov, "wavelength_nm,detuning_d2_ghz,xi_ratio,valid");
  for (const auto& p : pts)
    csv.row(to_nm(p.wavelength), p.detuning_d2 / units::two_pi / 1e9, p.ratio, p.valid ? 1 : 0);
  csv.close();

  const CouplingTable table = coupling_table(r.species, r.ground_F, r.probe.wavelength);
  const json snr_sec = r.section("snr");
  SnrInputs in;
  in.probe = r.probe;
  in.cloud = r.cloud;
  in.detection = r.detection;
  in.xi_ratio = snr_sec.value("xi_ratio", std::abs(weighted_detunings(table).ratio()));
  in.tau_s = snr_sec.value("tau_s", cloud_lifetime(r.probe, r.cloud, table).tau_s);
  in.Fz = snr_sec.value("Fz", 1.0);
  in.sql_cross_section = resonant_cross_section(r.species.line(LineLabel::D2));
  const double gamma = gyromagnetic_ratio(r.species, r.ground_F);
  const SnrReport rep = snr_general(in, gamma);
  const SqlResult sql = sql_ratio(in.detection.transmission, in.sql_cross_section, r.cloud.column_density(0.0),
                                  in.detection.window, in.tau_s);
  const json out = {{"points", n},
                    {"prediction",
                     {{"xi_ratio", in.xi_ratio},
                      {"tau_s", in.tau_s},
                      {"snr_linear", rep.snr_linear},
                      {"snr_db", rep.snr_db},
                      {"sensitivity_t_rthz", rep.sensitivity},
                      {"sql_ratio", sql.ratio},
                      {"sql_crossover_s", sql.crossover}}},
                    {"provenance", prov}};
  write_json(out_path(g, "snr.json"), out);
  print(out);
}

// ---------------------------------------------------------------- aperture
struct ApertureOpts {
  std::string profile;
  std::optional<double> radius_um;
};

void run_aperture(const Global& g, const ApertureOpts& o) {
  const Recipe r = recipe_of(g);
  CloudProfile cloud = r.cloud;
  if (!o.profile.empty()) {
    if (o.profile == "gaussian") cloud.kind = ProfileKind::Gaussian;
    else if (o.profile == "thomas_fermi") cloud.kind = ProfileKind::ThomasFermi;
    else throw ValidationError("aperture: --profile must be gaussian or thomas_fermi");
  }
  if (o.radius_um) cloud.radius = *o.radius_um * units::um;
  cloud.validate();
  const double a = optimize_aperture(cloud);
  const json prov = provenance(r, seed_of(g, r));
  CsvWriter csv(out_path(g, "aperture.csv"), prov, "a_over_R,atoms_within,merit");
  for (int i = 1; i <= 300; ++i) {
    const double x = 0.01 * i;
    const double na = cloud.atoms_within(x * cloud.radius);
    csv.row(x, na, na / (x * cloud.radius));
  }
  csv.close();
  const json out = {{"profile", cloud.kind == ProfileKind::Gaussian ? "gaussian" : "thomas_fermi"},
                    {"radius_um", cloud.radius / units::um},
                    {"a_opt_um", a / units::um},
                    {"a_opt_over_R", a / cloud.radius},
                    {"provenance", prov}};
  write_json(out_path(g, "aperture.json"), out);
  print(out);
}

// ---------------------------------------------------------------- lifetime
struct LifetimeOpts {
  std::optional<double> power_mw;
  std::optional<double> waist_um;
  std::optional<double> wavelength_nm;
  std::optional<double> one_body_s;
};

void run_lifetime(const Global& g, const LifetimeOpts& o) {
  const Recipe r = recipe_of(g);
  const json sec = r.section("lifetime");
  ProbeConfig probe = r.probe;
  if (o.power_mw) probe.power = *o.power_mw * 1e-3;
  if (o.waist_um) probe.waist = *o.waist_um * 1e-6;
  if (o.wavelength_nm) probe.wavelength = *o.wavelength_nm * 1e-9;
  probe.validate();
  std::optional<double> tau1;
  if (o.one_body_s) tau1 = *o.one_body_s;
  else if (sec.contains("one_body_s")) tau1 = sec["one_body_s"].get<double>();
  const CouplingTable table = coupling_table(r.species, r.ground_F, probe.wavelength);
  const LifetimeReport lr = cloud_lifetime(probe, r.cloud, table, tau1);
  const ScatteringBudget sb = scattering_rate(table, probe.peak_intensity());
  const json out = {{"power_mw", probe.power * 1e3},
                    {"waist_um", probe.waist * 1e6},
                    {"wavelength_nm", probe.wavelength * 1e9},
                    {"gamma_per_watt", lr.gamma_per_watt_cloud},
                    {"gamma_per_watt_peak", lr.gamma_per_watt_peak},
                    {"gamma_per_watt_cloud", lr.gamma_per_watt_cloud},
                    {"tau_s", lr.tau_s},
                    {"one_body_s", tau1 ? json(*tau1) : json(nullptr)},
                    {"tau_combined", lr.tau_combined},
                    {"peak_rates", {{"rayleigh", sb.gamma_rayleigh}, {"raman", sb.gamma_raman}, {"total", sb.gamma_total}}},
                    {"provenance", provenance(r, seed_of(g, r))}};
  write_json(out_path(g, "lifetime.json"), out);
  print(out);
}

// ---------------------------------------------------------------- spinor
struct SpinorOpts {
  std::optional<double> q_hz, c_hz, duration_s, rho0, theta, step_ms;
};

void run_spinor(const Global& g, const SpinorOpts& o) {
  const Recipe r = recipe_of(g);
  const double b0 = std::hypot(r.environment.B_y, r.environment.B_z + r.environment.B_vls);
  const double q = o.q_hz ? units::two_pi * *o.q_hz : q_net(r.species, r.ground_F, b0, r.dressing);
  const double c = o.c_hz ? units::two_pi * *o.c_hz : r.spin.mixing.c;
  SpinorState s = r.spin.initial;
  if (o.rho0) s.rho0 = *o.rho0;
  if (o.theta) s.theta = *o.theta;
  const double dur = o.duration_s.value_or(r.acquisition.duration - r.acquisition.pre_tip_interval);
  EvolveOptions opts;
  opts.output_step = o.step_ms ? *o.step_ms * 1e-3 : r.spin.output_step;
  const SpinTrajectory tr = evolve_spinor(s, q, c, dur, opts);
  const json prov = provenance(r, seed_of(g, r));
  CsvWriter csv(out_path(g, "spinor.csv"), prov, "t,rho0,Theta,Fz_envelope");
  for (std::size_t i = 0; i < tr.t.size(); ++i) csv.row(tr.t[i], tr.rho0[i], tr.theta[i], tr.fz_envelope[i]);
  csv.close();
  SpinorState end = s;
  end.rho0 = tr.rho0.back();
  end.theta = tr.theta.back();
  const double e0 = spinor_energy(s, q, c), e1 = spinor_energy(end, q, c);
  print({{"q_net_hz", q / units::two_pi}, {"c_hz", c / units::two_pi}, {"samples", tr.t.size()},
         {"energy_drift", std::abs(e1 - e0)}, {"provenance", prov}});
}

// ---------------------------------------------------------------- dressing
void run_dressing(const Global& g) {
  const Recipe r = recipe_of(g);
  const json sec = r.section("dressing_scan");
  const double rabi = r.dressing ? r.dressing->rabi : units::two_pi * 8.5e3;
  const double b0 = std::hypot(r.environment.B_y, r.environment.B_z + r.environment.B_vls);
  const double lo = sec.value("from_khz", 150.0), hi = sec.value("to_khz", 600.0);
  const int n = sec.value("points", 451);
  const double qz = field_point(r.species, r.ground_F, b0).q_z;
  const json prov = provenance(r, seed_of(g, r));
  CsvWriter csv(out_path(g, "dressing.csv"), prov, "detuning_khz,q_mw_hz,q_net_hz");
  for (int i = 0; i < n; ++i) {
    const double d = units::two_pi * (lo + (hi - lo) * i / std::max(1, n - 1)) * 1e3;
    if (std::abs(d) <= 5.0 * rabi) continue;
    const DressingConfig dc{rabi, d};
    csv.row(d / units::two_pi / 1e3, q_microwave(dc) / units::two_pi, q_net(r.species, r.ground_F, b0, dc) / units::two_pi);
  }
  csv.close();
  const double null_d = null_dressing_detuning(r.species, r.ground_F, b0, rabi);
  const double reference = sec.value("reference_null_khz", 307.0);
  const json out = {{"B_g", b0},
                    {"q_z_hz", qz / units::two_pi},
                    {"rabi_khz", rabi / units::two_pi / 1e3},
                    {"null_detuning_khz", null_d / units::two_pi / 1e3},
                    {"reference_null_khz", reference},
                    {"relative_discrepancy", (reference - null_d / units::two_pi / 1e3) / reference},
                    {"q_mw_at_reference_hz", q_microwave({rabi, units::two_pi * reference * 1e3}) / units::two_pi},
                    {"provenance", prov}};
  write_json(out_path(g, "dressing.json"), out);
  print(out);
}

// ---------------------------------------------------------------- vls
void run_vls(const Global& g) {
  const Recipe r = recipe_of(g);
  const json sec = r.section("vls");
  const double bz = sec.value("B_z_mg", 19.6) * 1e-3;
  const double b0 = sec.value("B_vls0_mg", 43.0) * 1e-3;
  const double th0 = sec.value("theta0_deg", 78.9) * units::pi / 180.0;
  const int n = sec.value("angles", 37);
  const double sigma = sec.value("noise_hz", 20.0);
  const double k = gyromagnetic_ratio(r.species, r.ground_F) / units::two_pi * units::gauss;
  const std::uint64_t seed = seed_of(g, r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> th(n), f(n);
  const json prov = provenance(r, seed);
  CsvWriter csv(out_path(g, "vls_data.csv"), prov, "theta_deg,f_larmor_hz");
  for (int i = 0; i < n; ++i) {
    th[i] = units::pi * i / n;
    f[i] = larmor_frequency_with_vls(r.environment.B_y, bz, vls_waveplate(b0, th[i], th0), k) + noise(rng);
    csv.row(th[i] * 180.0 / units::pi, f[i]);
  }
  csv.close();
  const VlsFit fit = fit_vls(th, f, sigma, k);
  const json out = {{"injected", {{"B_z_mg", bz * 1e3}, {"B_vls0_mg", b0 * 1e3}, {"theta0_deg", th0 * 180 / units::pi}}},
                    {"fit",
                     {{"B_y_g", fit.B_y}, {"B_z_mg", fit.B_z * 1e3}, {"B_vls0_mg", fit.B_vls0 * 1e3},
                      {"theta0_deg", fit.theta0 * 180 / units::pi}, {"err_B_z_mg", fit.err_B_z * 1e3},
                      {"err_B_vls0_mg", fit.err_B_vls0 * 1e3}, {"err_theta0_deg", fit.err_theta0 * 180 / units::pi},
                      {"chi2_per_dof", fit.chi2_per_dof}}},
                    {"provenance", prov}};
  write_json(out_path(g, "vls_fit.json"), out);
  print(out);
}

// ---------------------------------------------------------------- simulate
struct SimOpts {
  std::string name = "signal";
  bool csv = false;
};

void run_simulate(const Global& g, const SimOpts& o) {
  const Recipe r = recipe_of(g);
  const std::uint64_t seed = seed_of(g, r);
  ShotArtifacts art = run_shot(r, seed, g.threads);
  art.signal.metadata["provenance"] = provenance(r, seed);
  write_signal(art.signal, out_path(g, o.name));
  if (o.csv) write_signal_csv(art.signal, out_path(g, o.name + ".csv"));
  print({{"signal", out_path(g, o.name).string()},
         {"samples", art.signal.samples.size()},
         {"injected_snr_db", art.result.injected_snr_db},
         {"provenance", provenance(r, seed)}});
}

// ---------------------------------------------------------------- analyze
struct AnalyzeOpts {
  std::string input;
  std::optional<double> window_ms, hop_ms, band_khz, line_hz;
  std::optional<int> harmonics;
  bool spectrogram = false;
  int decimate = 10;
};

void run_analyze(const Global& g, const AnalyzeOpts& o) {
  Recipe r = recipe_of(g);
  auto& an = r.analysis;
  if (o.window_ms) an.spectrogram.window_length = *o.window_ms * 1e-3;
  if (o.hop_ms) an.spectrogram.hop = *o.hop_ms * 1e-3;
  if (o.band_khz) an.band = *o.band_khz * 1e3;
  if (o.line_hz) an.harmonics.line_frequency = *o.line_hz;
  if (o.harmonics) {
    if (*o.harmonics < 1) throw ValidationError("analyze: --harmonics must be >= 1");
    an.harmonics.multiples.clear();
    for (int k = 0; k < *o.harmonics; ++k) an.harmonics.multiples.push_back(2 * k + 1);
  }
  an.spectrogram.validate();
  const fs::path in(o.input);
  const RawSignal sig = in.extension() == ".csv" ? read_signal_csv(in) : read_signal(in);
  const ShotArtifacts art = analyze_signal(r, sig, g.threads);
  const json prov = sig.metadata.contains("provenance") ? sig.metadata["provenance"] : provenance(r, seed_of(g, r));

  CsvWriter csv(out_path(g, "track.csv"), prov, "t,f_hz,f_err_hz,amp,snr_db");
  for (const auto& p : art.track.points) {
    if (p.missing) csv.row(p.t, "nan", "nan", "nan", "nan");
    else csv.row(p.t, p.frequency, p.std_error, p.amplitude, p.snr_db);
  }
  csv.close();

  json harm = json::array();
  for (const auto& h : art.refined_fit.harmonics)
    harm.push_back({{"frequency_hz", h.frequency}, {"amplitude_ug", h.amplitude * 1e6},
                    {"amplitude_err_ug", h.amplitude_err * 1e6}, {"phase_rad", h.phase}, {"phase_err_rad", h.phase_err}});
  const auto& res = art.result;
  const json out = {{"mean_frequency_hz", art.refined_fit.mean_frequency},
                    {"mean_field_g", res.recovered_mean_field},
                    {"hz_per_gauss", art.refined_fit.hz_per_gauss},
                    {"harmonics", harm},
                    {"peak_to_peak_ug", res.recovered_peak_to_peak * 1e6},
                    {"residual_rms_hz", art.kernel_fit.residual_rms},
                    {"initial_snr_db", res.initial_snr_db},
                    {"median_snr_db", res.median_snr_db},
                    {"sensitivity_t_rthz", res.sensitivity},
                    {"valid_windows", res.valid_windows},
                    {"total_windows", res.total_windows},
                    {"track_truncated", art.track.truncated},
                    {"diagnostic", art.track.diagnostic},
                    {"provenance", prov}};
  write_json(out_path(g, "harmonics.json"), out);

  if (o.spectrogram) {
    if (o.decimate < 1) throw ValidationError("analyze: --decimate must be >= 1");
    CsvWriter sp(out_path(g, "spectrogram.csv"), prov, "t,f_hz,magnitude");
    const auto& s = art.spectrogram;
    for (std::size_t w = 0; w < s.times.size(); w += o.decimate)
      for (std::size_t j = 0; j < s.frequencies.size(); j += o.decimate) sp.row(s.times[w], s.frequencies[j], s.magnitude[w][j]);
    sp.close();
  }
  print(out);
}

// ---------------------------------------------------------------- roundtrip
void run_roundtrip(const Global& g, std::optional<int> seeds) {
  Recipe r = recipe_of(g);
  if (seeds) {
    if (*seeds < 1) throw ValidationError("roundtrip: --seeds must be >= 1");
    r.analysis.seeds = *seeds;
  }
  const std::uint64_t seed = seed_of(g, r);
  const RoundTripReport rep = roundtrip(r, seed, g.threads);
  json out = rep.to_json();
  out["provenance"] = provenance(r, seed);
  write_json(out_path(g, "roundtrip.json"), out);
  json summary = out;
  summary.erase("shots");
  print(summary);
}

json error_json(const std::string& kind, const std::string& msg, int code) {
  return {{"error", kind}, {"message", msg}, {"exit_code", code}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Faraday magnetometry toolkit: polarizability, SNR model, spinor dynamics, signal synthesis and analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "RNG seed (overrides the recipe)")->each([&](const std::string&) { g.seed_given = true; });
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--recipe", g.recipe, "recipe file or bundled recipe name");

  TuneoutOpts to;
  auto* c_tune = app.add_subcommand("tuneout", "magic-zero (tune-out) wavelengths");
  c_tune->add_option("--species", to.species);
  c_tune->add_option("--from-nm", to.from_nm);
  c_tune->add_option("--to-nm", to.to_nm);
  c_tune->add_flag("--no-hyperfine", to.no_hyperfine, "zero all excited hyperfine offsets");

  CoeffOpts co;
  auto* c_coeffs = app.add_subcommand("coeffs", "rank-0/1/2 coupling coefficients");
  c_coeffs->add_option("--species", co.species);
  c_coeffs->add_option("-F,--ground-F", co.F);
  c_coeffs->add_option("--wavelength-nm", co.wavelength_nm, "also report weighted detunings here");

  ScanOpts so;
  auto* c_scan = app.add_subcommand("snr-scan", "|xi_s/xi_f| scan and SNR point prediction");
  c_scan->add_option("--from-nm", so.from_nm);
  c_scan->add_option("--to-nm", so.to_nm);
  c_scan->add_option("--points", so.points);

  ApertureOpts ao;
  auto* c_ap = app.add_subcommand("aperture", "optimal polarimeter aperture");
  c_ap->add_option("--profile", ao.profile, "gaussian or thomas_fermi");
  c_ap->add_option("--radius-um", ao.radius_um);

  LifetimeOpts lo;
  auto* c_life = app.add_subcommand("lifetime", "probe-limited lifetime");
  c_life->add_option("--power-mw", lo.power_mw);
  c_life->add_option("--waist-um", lo.waist_um);
  c_life->add_option("--wavelength-nm", lo.wavelength_nm);
  c_life->add_option("--one-body-s", lo.one_body_s);

  SpinorOpts spo;
  auto* c_spin = app.add_subcommand("spinor", "single-mode spinor trajectory CSV");
  c_spin->add_option("--q-hz", spo.q_hz, "q_net/2pi (default from the recipe field and dressing)");
  c_spin->add_option("--c-hz", spo.c_hz);
  c_spin->add_option("--duration-s", spo.duration_s);
  c_spin->add_option("--rho0", spo.rho0);
  c_spin->add_option("--theta", spo.theta);
  c_spin->add_option("--step-ms", spo.step_ms);

  auto* c_dress = app.add_subcommand("dressing", "microwave dressing scan and in-model null detuning");
  auto* c_vls = app.add_subcommand("vls", "synthetic waveplate scan and VLS fit");

  SimOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "synthesize a raw polarimeter signal");
  c_sim->add_option("--name", sim.name, "output stem");
  c_sim->add_flag("--csv", sim.csv, "also write a (t, volts) CSV");

  AnalyzeOpts an;
  auto* c_an = app.add_subcommand("analyze", "spectrogram, Larmor track, harmonics");
  c_an->add_option("--input", an.input, "signal stem, .meta.json, .f64le or .csv")->required();
  c_an->add_option("--window-ms", an.window_ms);
  c_an->add_option("--hop-ms", an.hop_ms);
  c_an->add_option("--band-khz", an.band_khz);
  c_an->add_option("--line-hz", an.line_hz);
  c_an->add_option("--harmonics", an.harmonics, "number of odd harmonics");
  c_an->add_flag("--spectrogram", an.spectrogram, "write a decimated spectrogram.csv");
  c_an->add_option("--decimate", an.decimate);

  std::optional<int> rt_seeds;
  auto* c_rt = app.add_subcommand("roundtrip", "simulate + analyze + comparison report");
  c_rt->add_option("--seeds", rt_seeds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("usage", e.what(), 1).dump() << '\n';
    return 1;
  }

  try {
    if (*c_tune) run_tuneout(g, to);
    else if (*c_coeffs) run_coeffs(g, co);
    else if (*c_scan) run_snr_scan(g, so);
    else if (*c_ap) run_aperture(g, ao);
    else if (*c_life) run_lifetime(g, lo);
    else if (*c_spin) run_spinor(g, spo);
    else if (*c_dress) run_dressing(g);
    else if (*c_vls) run_vls(g);
    else if (*c_sim) run_simulate(g, sim);
    else if (*c_an) run_analyze(g, an);
    else if (*c_rt) run_roundtrip(g, rt_seeds);
  } catch (const ValidationError& e) {
    std::cerr << error_json("validation", e.what(), 1).dump() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << error_json("io", e.what(), 3).dump() << '\n';
    return 3;
  } catch (const ComputationError& e) {
    std::cerr << error_json("computation", e.what(), 2).dump() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << error_json("validation", e.what(), 1).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("computation", e.what(), 2).dump() << '\n';
    return 2;
  }
  return 0;
}
