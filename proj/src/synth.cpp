#include "faraday/synth.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

using nlohmann::json;

void AcquisitionConfig::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw ValidationError("sample rate must be > 0");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ValidationError("duration must be > 0");
  if (!(pre_tip_interval >= 0.0) || pre_tip_interval >= duration)
    throw ValidationError("pre-tip interval must lie in [0, duration)");
  if (!(gain > 0.0)) throw ValidationError("detector gain must be > 0");
  if (!(technical_noise_density >= 0.0)) throw ValidationError("technical noise density must be >= 0");
}

std::size_t AcquisitionConfig::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

double instantaneous_field(const FieldEnvironment& env, double t) {
  double by = env.B_y;
  for (const auto& h : env.harmonics) by += h.amplitude * std::sin(units::two_pi * h.frequency * t + h.phase);
  return std::hypot(by, env.B_z + env.B_vls);
}

double CarrierModel::frequency(double t) const {
  double d = 0.0;
  for (const auto& h : harmonics) d += h.amplitude * std::sin(units::two_pi * h.frequency * t + h.phase);
  return f0 + slope * projection * d;
}

double CarrierModel::phase(double t) const {
  double integral = 0.0;
  for (const auto& h : harmonics) {
    const double w = units::two_pi * h.frequency;
    integral += h.amplitude * (std::cos(h.phase) - std::cos(w * t + h.phase)) / w;
  }
  return units::two_pi * (f0 * t + slope * projection * integral);
}

double CarrierModel::max_frequency() const {
  double a = 0.0;
  for (const auto& h : harmonics) a += h.amplitude;
  return f0 + std::abs(slope * projection) * a;
}

CarrierModel carrier_model(const AtomSpecies& species, int F, const FieldEnvironment& env) {
  env.validate();
  CarrierModel m;
  m.B0 = std::hypot(env.B_y, env.B_z + env.B_vls);
  m.f0 = field_point(species, F, m.B0).f_larmor;
  const double h = std::max(1e-6, 1e-4 * m.B0);
  m.slope = (field_point(species, F, m.B0 + h).f_larmor - field_point(species, F, m.B0 - h).f_larmor) /
            (2.0 * h);
  m.projection = env.B_y / m.B0;
  m.harmonics = env.harmonics;
  return m;
}

double SignalBudget::total_sigma() const { return std::hypot(shot_sigma, technical_sigma); }

double SignalBudget::window_snr(double tau_f, double sample_rate) const {
  const double s = total_sigma();
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return amplitude * std::sqrt(tau_f * sample_rate) / s;
}

SignalBudget signal_budget(const AtomSpecies& species, int F, const ProbeConfig& probe,
                           const CloudProfile& cloud, const DetectionConfig& detect,
                           const AcquisitionConfig& acq) {
  probe.validate();
  cloud.validate();
  detect.validate();
  acq.validate();
  const CouplingTable table = coupling_table(species, F, probe.wavelength);
  const WeightedDetunings wd = weighted_detunings(table);
  const double a = detect.aperture;
  const double rho_a = intensity_weighted_average(probe, cloud, Weighted::ColumnDensity, a);
  const double one_a = intensity_weighted_average(probe, cloud, Weighted::Unity, a);

  SignalBudget b;
  b.phi_per_fz = std::abs(faraday_phi0(table.alpha0, rho_a, probe.wavelength) * wd.inv_xi_f);
  b.amplitude = 2.0 * detect.transmission * probe.power * b.phi_per_fz * acq.gain;
  b.detected_power = detect.transmission * probe.power * one_a;
  b.shot_sigma = acq.shot_noise ? acq.gain * std::sqrt(units::hbar * probe.angular_frequency() *
                                                       b.detected_power * acq.sample_rate)
                                : 0.0;
  b.technical_sigma = acq.technical_noise_density * std::sqrt(acq.sample_rate);
  return b;
}

double technical_noise_for_snr(const SignalBudget& budget, double target_db, double tau_f,
                               double sample_rate) {
  const double target = from_db(target_db);
  const double sigma_total = budget.amplitude * std::sqrt(tau_f * sample_rate) / target;
  if (sigma_total < budget.shot_sigma) {
    std::ostringstream os;
    os << "target SNR " << target_db << " dB is below the shot-noise floor ("
       << to_db(budget.amplitude * std::sqrt(tau_f * sample_rate) / budget.shot_sigma) << " dB)";
    throw ValidationError(os.str());
  }
  return std::sqrt(sigma_total * sigma_total - budget.shot_sigma * budget.shot_sigma) /
         std::sqrt(sample_rate);
}

RawSignal synthesize(const AtomSpecies& species, int F, const ProbeConfig& probe,
                     const CloudProfile& cloud, const DetectionConfig& detect,
                     const FieldEnvironment& env, const std::optional<DressingConfig>& dressing,
                     const SpinTrajectory& trajectory, const AcquisitionConfig& acq,
                     double initial_larmor_phase) {
  acq.validate();
  env.validate();
  if (dressing) dressing->validate();
  const CarrierModel carrier = carrier_model(species, F, env);
  const double qn = std::abs(q_net(species, F, carrier.B0, dressing)) / units::two_pi;
  const double fmax = carrier.max_frequency() + qn;
  if (fmax >= 0.5 * acq.sample_rate) {
    std::ostringstream os;
    os << "signal frequency " << fmax << " Hz exceeds the Nyquist limit " << 0.5 * acq.sample_rate
       << " Hz; at 2 MS/s this caps the Larmor frequency, and thus the field, near 1.4 G "
          "without under-sampling";
    throw ValidationError(os.str());
  }
  const double post_tip = acq.duration - acq.pre_tip_interval;
  if (trajectory.t.empty() || trajectory.duration() < post_tip * (1.0 - 1e-9) - 1.0 / acq.sample_rate)
    throw ValidationError("spin trajectory does not cover the acquisition after the tip");

  const SignalBudget budget = signal_budget(species, F, probe, cloud, detect, acq);
  const double tau_D = acq.dephasing ? dephasing_time(units::two_pi * carrier.slope, env.gradient, cloud.radius)
                                     : std::numeric_limits<double>::infinity();

  const std::size_t n = acq.sample_count();
  RawSignal out;
  out.sample_rate = acq.sample_rate;
  out.samples.resize(n);
  std::mt19937_64 rng(acq.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = budget.total_sigma();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / acq.sample_rate;
    double v = 0.0;
    if (t >= acq.pre_tip_interval) {
      const double ts = t - acq.pre_tip_interval;
      v = budget.amplitude * trajectory.envelope_at(ts) * dephasing_envelope(ts, tau_D) *
          std::cos(carrier.phase(t) + initial_larmor_phase);
    }
    if (sigma > 0.0) v += sigma * normal(rng);
    out.samples[i] = v;
  }

  json h = json::array();
  for (const auto& x : env.harmonics) h.push_back({{"frequency_hz", x.frequency}, {"amplitude_g", x.amplitude}, {"phase_rad", x.phase}});
  out.metadata = {
      {"schema_version", 1},
      {"kind", "faraday_raw_signal"},
      {"species", species.name},
      {"ground_F", F},
      {"sample_rate_hz", acq.sample_rate},
      {"sample_count", n},
      {"duration_s", acq.duration},
      {"pre_tip_interval_s", acq.pre_tip_interval},
      {"rng_seed", acq.rng_seed},
      {"gain_v_per_w", acq.gain},
      {"technical_noise_density_v_rthz", acq.technical_noise_density},
      {"shot_noise", acq.shot_noise},
      {"dephasing", acq.dephasing},
      {"probe", {{"wavelength_m", probe.wavelength}, {"power_w", probe.power}, {"waist_m", probe.waist},
                 {"polarization_angle_rad", probe.polarization_angle}, {"ellipticity", probe.ellipticity}}},
      {"cloud", {{"atom_number", cloud.atom_number},
                 {"profile", cloud.kind == ProfileKind::Gaussian ? "gaussian" : "thomas_fermi"},
                 {"radius_m", cloud.radius}}},
      {"detection", {{"aperture_m", detect.aperture}, {"transmission", detect.transmission}, {"window_s", detect.window}}},
      {"environment", {{"B_y_g", env.B_y}, {"B_z_g", env.B_z}, {"B_vls_g", env.B_vls},
                       {"gradient_g_per_cm", env.gradient}, {"line_frequency_hz", env.line_frequency},
                       {"harmonics", h}}},
      {"carrier", {{"B0_g", carrier.B0}, {"f0_hz", carrier.f0}, {"slope_hz_per_g", carrier.slope},
                   {"projection", carrier.projection}}},
      {"budget", {{"amplitude_v", budget.amplitude}, {"shot_sigma_v", budget.shot_sigma},
                  {"technical_sigma_v", budget.technical_sigma}, {"detected_power_w", budget.detected_power},
                  {"window_snr_db", to_db(budget.window_snr(detect.window, acq.sample_rate))}}},
      {"q_net_hz", q_net(species, F, carrier.B0, dressing) / units::two_pi},
      {"tau_dephasing_s", std::isfinite(tau_D) ? json(tau_D) : json(nullptr)},
      {"initial_larmor_phase_rad", initial_larmor_phase},
  };
  if (dressing)
    out.metadata["dressing"] = {{"rabi_rad_s", dressing->rabi}, {"detuning_rad_s", dressing->detuning}};
  return out;
}

namespace {

std::filesystem::path stem_of(const std::filesystem::path& p) {
  std::string s = p.string();
  for (const char* ext : {".meta.json", ".f64le"}) {
    const std::string e(ext);
    if (s.size() > e.size() && s.compare(s.size() - e.size(), e.size(), e) == 0)
      return s.substr(0, s.size() - e.size());
  }
  return p;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_signal(const RawSignal& s, const std::filesystem::path& stem_in) {
  const auto stem = stem_of(stem_in);
  json meta = s.metadata;
  meta["sample_rate_hz"] = s.sample_rate;
  meta["sample_count"] = s.samples.size();
  meta["encoding"] = "f64le";
  {
    std::ofstream f(stem.string() + ".meta.json");
    if (!f) throw IoError("cannot write " + stem.string() + ".meta.json");
    f << meta.dump(2) << '\n';
  }
  std::ofstream f(stem.string() + ".f64le", std::ios::binary);
  if (!f) throw IoError("cannot write " + stem.string() + ".f64le");
  for (double v : s.samples) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    bits = to_little(bits);
    f.write(reinterpret_cast<const char*>(&bits), 8);
  }
  if (!f) throw IoError("write failed for " + stem.string() + ".f64le");
}

RawSignal read_signal(const std::filesystem::path& path) {
  const auto stem = stem_of(path);
  const std::string meta_path = stem.string() + ".meta.json";
  std::ifstream mf(meta_path);
  if (!mf) throw IoError("cannot open " + meta_path);
  RawSignal s;
  try {
    mf >> s.metadata;
  } catch (const json::exception& e) {
    throw ValidationError(meta_path + ": " + e.what());
  }
  if (!s.metadata.contains("sample_rate_hz") || !s.metadata.contains("sample_count"))
    throw ValidationError(meta_path + ": missing sample_rate_hz or sample_count");
  s.sample_rate = s.metadata["sample_rate_hz"].get<double>();
  const auto n = s.metadata["sample_count"].get<std::size_t>();
  const std::string data_path = stem.string() + ".f64le";
  std::ifstream df(data_path, std::ios::binary);
  if (!df) throw IoError("cannot open " + data_path);
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    if (!df.read(reinterpret_cast<char*>(&bits), 8)) throw IoError(data_path + ": truncated sample data");
    bits = to_little(bits);
    std::memcpy(&s.samples[i], &bits, 8);
  }
  return s;
}

void write_signal_csv(const RawSignal& s, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << "t,volts\n";
  f.precision(17);
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    f << static_cast<double>(i) / s.sample_rate << ',' << s.samples[i] << '\n';
}

RawSignal read_signal_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::string line;
  std::vector<double> t;
  RawSignal s;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError(path.string() + ": expected 't,volts' rows");
    try {
      const double tv = std::stod(line.substr(0, comma));
      const double vv = std::stod(line.substr(comma + 1));
      t.push_back(tv);
      s.samples.push_back(vv);
    } catch (const std::exception&) {
      if (t.empty() && s.samples.empty()) continue;  // header
      throw ValidationError(path.string() + ": malformed row '" + line + "'");
    }
  }
  if (t.size() < 2) throw ValidationError(path.string() + ": need at least two samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) throw ValidationError(path.string() + ": time column must increase");
  s.sample_rate = 1.0 / dt;
  s.metadata = {{"schema_version", 1}, {"kind", "faraday_raw_signal"}, {"source_csv", path.string()}};
  return s;
}

}  // namespace faraday
