#include "faraday/spindyn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "faraday/error.hpp"
#include "faraday/units.hpp"

namespace faraday {

void SpinorState::validate() const {
  if (!std::isfinite(rho0) || rho0 < 0.0 || rho0 > 1.0)
    throw ValidationError("rho0 must lie in [0, 1]");
  if (!std::isfinite(theta) || !std::isfinite(larmor_phase))
    throw ValidationError("spinor phases must be finite");
  if (!std::isfinite(magnetization) || std::abs(magnetization) > 1.0 - rho0 + 1e-15)
    throw ValidationError("|rho+ - rho-| must not exceed 1 - rho0");
}

double SpinorState::fz_envelope() const {
  const double a = 1.0 - rho0;
  const double root = std::sqrt(std::max(0.0, a * a - magnetization * magnetization));
  const double amp2 = 2.0 * rho0 * (a + root * std::cos(theta));
  const double sgn = std::cos(0.5 * theta) < 0.0 ? -1.0 : 1.0;
  return sgn * std::sqrt(std::max(0.0, amp2));
}

void FieldEnvironment::validate() const {
  if (!(B_y > 0.0) || !std::isfinite(B_y)) throw ValidationError("B_y must be positive");
  if (!std::isfinite(B_z) || !std::isfinite(B_vls)) throw ValidationError("B_z, B_vls must be finite");
  if (!std::isfinite(gradient) || gradient < 0.0) throw ValidationError("gradient must be >= 0");
  if (!(line_frequency > 0.0)) throw ValidationError("line frequency must be positive");
  for (const auto& h : harmonics) {
    if (!(h.frequency > 0.0)) throw ValidationError("harmonic frequency must be positive");
    if (!(h.amplitude >= 0.0)) throw ValidationError("harmonic amplitude must be >= 0");
    if (!std::isfinite(h.phase)) throw ValidationError("harmonic phase must be finite");
  }
}

void SpinMixing::validate() const {
  if (!std::isfinite(c)) throw ValidationError("spin-mixing coefficient must be finite");
}

void DressingConfig::validate() const {
  if (!std::isfinite(rabi) || rabi < 0.0) throw ValidationError("microwave Rabi frequency must be >= 0");
  if (!std::isfinite(detuning) || detuning == 0.0)
    throw ValidationError("microwave detuning must be nonzero");
  if (std::abs(detuning) <= 5.0 * rabi)
    throw ValidationError("microwave dressing requires |Delta| > 5 Omega");
}

bool DressingConfig::marginal() const { return std::abs(detuning) < 10.0 * rabi; }

double q_microwave(const DressingConfig& d) {
  if (d.detuning == 0.0 || !std::isfinite(d.detuning))
    throw ValidationError("q_microwave: detuning must be nonzero");
  return -d.rabi * d.rabi / (4.0 * d.detuning);
}

double q_net(const AtomSpecies& species, int F, double B_gauss,
             const std::optional<DressingConfig>& dressing) {
  const double qz = field_point(species, F, B_gauss).q_z;
  return dressing ? qz + q_microwave(*dressing) : qz;
}

double null_dressing_detuning(const AtomSpecies& species, int F, double B_gauss, double rabi) {
  const double qz = field_point(species, F, B_gauss).q_z;
  if (qz == 0.0) throw ComputationError("q_z vanishes; no finite null detuning");
  return rabi * rabi / (4.0 * qz);
}

double spinor_energy(const SpinorState& s, double q, double c) {
  const double a = 1.0 - s.rho0;
  const double root = std::sqrt(std::max(0.0, a * a - s.magnetization * s.magnetization));
  return c * s.rho0 * (a + root * std::cos(s.theta)) + q * a;
}

double SpinTrajectory::envelope_at(double time) const {
  if (t.empty()) return 0.0;
  if (time <= t.front()) return fz_envelope.front();
  if (time >= t.back()) return fz_envelope.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double w = (time - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - w) * fz_envelope[i - 1] + w * fz_envelope[i];
}

namespace {

using State = std::array<double, 2>;

struct SpinorRhs {
  double q, c, m;
  void operator()(const State& x, State& dx, double) const {
    const double r = x[0];
    const double a = 1.0 - r;
    const double root2 = a * a - m * m;
    const double root = std::sqrt(std::max(0.0, root2));
    const double s = std::sin(x[1]);
    const double co = std::cos(x[1]);
    dx[0] = 2.0 * c * r * root * s;
    double mix = 1.0 - 2.0 * r;
    if (root > 1e-300) mix += (a * (1.0 - 2.0 * r) - m * m) / root * co;
    dx[1] = -2.0 * q + 2.0 * c * mix;
  }
};

}  // namespace

SpinTrajectory evolve_spinor(const SpinorState& initial, double q, double c, double duration,
                             const EvolveOptions& opts) {
  namespace ode = boost::numeric::odeint;
  initial.validate();
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw ValidationError("duration must be >= 0");
  if (!std::isfinite(q) || !std::isfinite(c)) throw ValidationError("q and c must be finite");
  if (!(opts.output_step > 0.0)) throw ValidationError("output step must be positive");
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0)) throw ValidationError("tolerances must be positive");

  SpinTrajectory tr;
  tr.magnetization = initial.magnetization;
  const SpinorRhs rhs{q, c, initial.magnetization};
  auto record = [&](double time, const State& x) {
    SpinorState s = initial;
    s.rho0 = std::clamp(x[0], 0.0, 1.0);
    s.theta = x[1];
    tr.t.push_back(time);
    tr.rho0.push_back(s.rho0);
    tr.theta.push_back(s.theta);
    tr.fz_envelope.push_back(s.fz_envelope());
  };

  State x{initial.rho0, initial.theta};
  record(0.0, x);
  if (duration == 0.0) return tr;

  const std::size_t n_out = static_cast<std::size_t>(std::ceil(duration / opts.output_step - 1e-9));
  auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<State>());
  const double rate = std::abs(q) + 4.0 * std::abs(c) + 1.0;
  stepper.initialize(x, 0.0, std::min(opts.output_step, 0.01 / rate));

  const double min_dt = 1e-14 * std::max(duration, 1e-9);
  std::size_t k = 1;
  std::size_t steps = 0;
  State tmp{};
  while (k <= n_out) {
    const double target = std::min(duration, static_cast<double>(k) * opts.output_step);
    while (stepper.current_time() < target) {
      stepper.do_step(rhs);
      if (++steps > 100000000 || stepper.current_time_step() < min_dt) {
        std::ostringstream os;
        os << "spinor integration step-size underflow at t=" << stepper.current_time()
           << " s (dt=" << stepper.current_time_step() << ", q=" << q << ", c=" << c << ")";
        throw ComputationError(os.str());
      }
    }
    stepper.calc_state(target, tmp);
    if (!std::isfinite(tmp[0]) || !std::isfinite(tmp[1]))
      throw ComputationError("spinor integration produced non-finite state");
    record(target, tmp);
    ++k;
  }
  return tr;
}

double larmor_frequency_with_vls(double B_y, double B_z, double B_vls, double gyromagnetic) {
  if (!(B_y > 0.0)) throw ValidationError("B_y must be positive");
  return gyromagnetic * std::hypot(B_y, B_z + B_vls);
}

namespace {

struct VlsModel {
  double k;  // Hz per G
  double value(const Eigen::Vector4d& p, double th) const {
    const double bz = p[1] + p[2] * std::sin(2.0 * (th - p[3]));
    return k * std::hypot(p[0], bz);
  }
  Eigen::Vector4d grad(const Eigen::Vector4d& p, double th) const {
    const double s = std::sin(2.0 * (th - p[3]));
    const double co = std::cos(2.0 * (th - p[3]));
    const double bz = p[1] + p[2] * s;
    const double r = std::max(std::hypot(p[0], bz), 1e-300);
    Eigen::Vector4d g;
    g[0] = k * p[0] / r;
    g[1] = k * bz / r;
    g[2] = k * bz * s / r;
    g[3] = k * bz * p[2] * (-2.0 * co) / r;
    return g;
  }
};

struct LmResult {
  Eigen::Vector4d p;
  double chi2;
  Eigen::Matrix4d jtj;
};

LmResult levenberg_marquardt(const VlsModel& model, const std::vector<double>& th,
                             const std::vector<double>& f, double sigma, Eigen::Vector4d p) {
  const std::size_t n = th.size();
  auto chi2_of = [&](const Eigen::Vector4d& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = (f[i] - model.value(q, th[i])) / sigma;
      s += r * r;
    }
    return s;
  };
  double chi2 = chi2_of(p);
  double lambda = 1e-3;
  Eigen::Matrix4d jtj;
  for (int it = 0; it < 500; ++it) {
    jtj.setZero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector4d g = model.grad(p, th[i]) / sigma;
      const double r = (f[i] - model.value(p, th[i])) / sigma;
      jtj += g * g.transpose();
      jtr += g * r;
    }
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix4d a = jtj;
      for (int d = 0; d < 4; ++d) a(d, d) *= 1.0 + lambda;
      const Eigen::Vector4d step = a.ldlt().solve(jtr);
      const Eigen::Vector4d cand = p + step;
      const double c2 = chi2_of(cand);
      if (std::isfinite(c2) && c2 < chi2) {
        const double rel = (chi2 - c2) / std::max(chi2, 1e-300);
        p = cand;
        chi2 = c2;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel < 1e-14) it = 1000;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  jtj.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector4d g = model.grad(p, th[i]) / sigma;
    jtj += g * g.transpose();
  }
  return {p, chi2, jtj};
}

}  // namespace

VlsFit fit_vls(const std::vector<double>& theta, const std::vector<double>& f_larmor, double sigma_hz,
               double gyromagnetic_hz_per_gauss) {
  if (theta.size() != f_larmor.size()) throw ValidationError("fit_vls: theta and f_L sizes differ");
  if (theta.size() < 5) throw ValidationError("fit_vls: need at least 5 points for 4 parameters");
  if (!(sigma_hz > 0.0) || !(gyromagnetic_hz_per_gauss > 0.0))
    throw ValidationError("fit_vls: sigma and gyromagnetic ratio must be positive");
  const VlsModel model{gyromagnetic_hz_per_gauss};

  const auto [fmin_it, fmax_it] = std::minmax_element(f_larmor.begin(), f_larmor.end());
  const double bmin = *fmin_it / model.k;
  const double bmax = *fmax_it / model.k;
  const double by0 = bmin;
  const double swing = std::sqrt(std::max(bmax * bmax - bmin * bmin, 0.0));

  LmResult best{};
  best.chi2 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 12; ++a) {
    for (double frac : {0.1, 0.3, 0.5}) {
      Eigen::Vector4d p0(by0, frac * swing, (1.0 - frac) * swing + 1e-9, a * units::pi / 12.0);
      const LmResult r = levenberg_marquardt(model, theta, f_larmor, sigma_hz, p0);
      if (r.chi2 < best.chi2) best = r;
    }
  }
  if (!std::isfinite(best.chi2)) throw ComputationError("fit_vls: no converged solution");

  Eigen::Vector4d p = best.p;
  Eigen::Matrix4d cov = best.jtj.inverse();
  if (!cov.allFinite()) throw ComputationError("fit_vls: singular normal matrix");
  if (p[0] < 0.0) p[0] = -p[0];
  if (p[1] < 0.0) {
    p[1] = -p[1];
    p[2] = -p[2];
  }
  if (p[2] < 0.0) {
    p[2] = -p[2];
    p[3] += 0.5 * units::pi;
  }
  p[3] = std::fmod(p[3], units::pi);
  if (p[3] < 0.0) p[3] += units::pi;

  VlsFit out;
  out.B_y = p[0];
  out.B_z = p[1];
  out.B_vls0 = p[2];
  out.theta0 = p[3];
  out.err_B_y = std::sqrt(cov(0, 0));
  out.err_B_z = std::sqrt(cov(1, 1));
  out.err_B_vls0 = std::sqrt(cov(2, 2));
  out.err_theta0 = std::sqrt(cov(3, 3));
  out.chi2_per_dof = best.chi2 / static_cast<double>(theta.size() - 4);
  return out;
}

double dephasing_time(double gyromagnetic, double gradient_g_per_cm, double radius) {
  if (!(gyromagnetic > 0.0) || !(radius > 0.0)) throw ValidationError("gamma and R must be positive");
  if (!(gradient_g_per_cm >= 0.0)) throw ValidationError("gradient must be >= 0");
  if (gradient_g_per_cm == 0.0) return std::numeric_limits<double>::infinity();
  const double b_per_m = gradient_g_per_cm * 100.0;
  return units::pi / (2.0 * gyromagnetic * b_per_m * radius);
}

double dephasing_envelope(double t, double tau_D) {
  if (std::isinf(tau_D)) return 1.0;
  if (!(tau_D > 0.0)) throw ValidationError("tau_D must be positive");
  const double x = units::pi * t / tau_D;
  return std::exp(-x * x / 32.0);
}

}  // namespace faraday
