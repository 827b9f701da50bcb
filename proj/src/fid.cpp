#include "stq/fid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stq/fitting.hpp"
#include "stq/vmath.hpp"

namespace stq {

namespace {

// (e^{-x} + x - 1) / f^2 with x = 2 pi f t, cancellation-free.
inline double phase_kernel(double f_hz, double t_s) {
  double x = 2.0 * M_PI * f_hz * t_s;
  return (std::expm1(-x) + x) / (f_hz * f_hz);
}

NoiseAxis mode_axis(FIDMode mode) {
  return mode == FIDMode::charge ? NoiseAxis::charge : NoiseAxis::magnetic;
}

}  // namespace

void FIDConfig::validate() const {
  if (realizations < 100)
    throw std::invalid_argument("FIDConfig: realizations must be >= 100");
  double prev = -1.0;
  for (double t : times_s) {
    if (t < 0.0 || t <= prev)
      throw std::invalid_argument("FIDConfig: times must be nonnegative and increasing");
    prev = t;
  }
}

double sigma2_charge(double t_s, std::span<const OUComponent> comps, double jfid_hz,
                     double insensitivity_v) {
  if (t_s < 0.0) throw std::invalid_argument("sigma2: t must be >= 0");
  double prefactor = jfid_hz / insensitivity_v;
  prefactor *= prefactor;
  double s = 0.0;
  for (const auto& c : comps) {
    if (c.axis != NoiseAxis::charge)
      throw std::invalid_argument("sigma2_charge: component on wrong axis");
    s += c.power * phase_kernel(c.frequency_hz, t_s);
  }
  return prefactor * s;
}

double sigma2_magnetic(double t_s, std::span<const OUComponent> comps) {
  if (t_s < 0.0) throw std::invalid_argument("sigma2: t must be >= 0");
  double s = 0.0;
  for (const auto& c : comps) {
    if (c.axis != NoiseAxis::magnetic)
      throw std::invalid_argument("sigma2_magnetic: component on wrong axis");
    s += c.power * phase_kernel(c.frequency_hz, t_s);
  }
  return s;
}

namespace {

std::vector<OUComponent> axis_components(const NoiseModel& model, NoiseAxis axis) {
  std::vector<OUComponent> comps;
  for (const auto& c : model.components)
    if (c.axis == axis) comps.push_back(c);
  return comps;
}

}  // namespace

double sigma2(double t_s, const NoiseModel& model, const FIDConfig& config) {
  auto comps = axis_components(model, mode_axis(config.mode));
  if (config.mode == FIDMode::charge)
    return sigma2_charge(t_s, comps, config.jfid_hz, config.insensitivity_v);
  return sigma2_magnetic(t_s, comps);
}

double analytic_return_probability(double t_s, const FIDConfig& config,
                                   const NoiseModel& model) {
  double s2 = sigma2(t_s, model, config);
  return 0.5 * (1.0 + std::exp(-0.5 * s2) * std::cos(2.0 * M_PI * config.drive_hz() * t_s));
}

double solve_t2star(const NoiseModel& model, const FIDConfig& config) {
  auto comps = axis_components(model, mode_axis(config.mode));
  double total_power = 0.0;
  for (const auto& c : comps) total_power += c.power;
  if (total_power == 0.0) return std::numeric_limits<double>::infinity();

  auto gap = [&](double t) { return sigma2(t, model, config) - 2.0; };
  double lo = 1e-9, hi = 1e-2;
  while (gap(hi) < 0.0 && hi < 1e3) hi *= 10.0;
  if (gap(hi) < 0.0) return std::numeric_limits<double>::infinity();
  while (gap(lo) > 0.0 && lo > 1e-15) lo *= 0.1;
  return bisect_root(gap, lo, hi, 1e-6);
}

double calibrate_power(double t2star_target_s, std::span<const double> frequencies_hz,
                       const FIDConfig& config) {
  if (frequencies_hz.empty())
    throw std::invalid_argument("calibrate_power: empty frequency list");
  if (!(t2star_target_s > 0.0))
    throw std::invalid_argument("calibrate_power: target T2* must be > 0");
  double coeff_sum = 0.0;
  for (double f : frequencies_hz) coeff_sum += phase_kernel(f, t2star_target_s);
  if (config.mode == FIDMode::charge) {
    double prefactor = config.jfid_hz / config.insensitivity_v;
    coeff_sum *= prefactor * prefactor;
  }
  return 2.0 / coeff_sum;
}

namespace {

// Gaussian envelope fit on extrema samples e_k ~ exp(-(t_k/T2)^2).
// One-parameter least squares via Brent on log T2.
bool fit_envelope(const std::vector<double>& times, const std::vector<double>& env,
                  double* t2star) {
  double tmax = times.empty() ? 0.0 : times.back();
  if (times.size() < 3 || tmax <= 0.0) return false;

  bool decayed = false;
  for (double e : env)
    if (e < 0.8) decayed = true;
  if (!decayed) {
    *t2star = std::numeric_limits<double>::infinity();
    return false;
  }

  auto sse = [&](double log_t2) {
    double t2 = std::exp(log_t2);
    double s = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      double model = std::exp(-(times[k] / t2) * (times[k] / t2));
      double d = env[k] - model;
      s += d * d;
    }
    return s;
  };
  double lo = std::log(tmax * 1e-3), hi = std::log(tmax * 1e3);
  double best = brent_minimize(sse, lo, hi, 1e-10);
  *t2star = std::exp(best);
  return true;
}

}  // namespace

FIDTrace simulate_fid(const NoiseModel& model, const FIDConfig& config,
                      const QubitParams& params, uint64_t master_seed) {
  config.validate();
  params.validate();
  NoiseAxis axis = mode_axis(config.mode);
  auto active = model.axis_indices(axis);

  FIDTrace trace;
  double f_drive = config.drive_hz();
  double half_period = 0.5 / f_drive;
  if (config.times_s.empty()) {
    FIDConfig probe = config;
    double t2 = solve_t2star(model, probe);
    if (!std::isfinite(t2)) t2 = 64.0 * half_period;
    int n_extrema = std::max(4, static_cast<int>(std::floor(2.0 * t2 / half_period)));
    for (int k = 1; k <= n_extrema; ++k)
      trace.times_s.push_back(static_cast<double>(k) * half_period);
  } else {
    trace.times_s = config.times_s;
  }

  const auto& times = trace.times_s;
  std::size_t nt = times.size();
  trace.p_montecarlo.assign(nt, 0.0);
  trace.p_analytic.resize(nt);
  trace.sigma2_values.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    trace.p_analytic[k] = analytic_return_probability(times[k], config, model);
    trace.sigma2_values[k] = sigma2(times[k], model, config);
  }

  // substep cap: keep f_max * dt small so the ZOH path integral is unbiased
  double f_max = 0.0;
  for (std::size_t i : active) f_max = std::max(f_max, model.components[i].frequency_hz);
  double dt_cap = f_max > 0.0 ? 0.02 / f_max : std::numeric_limits<double>::infinity();

  // charge mode drives V_FID with the full exponential map (no linearization)
  double v_fid = config.insensitivity_v * std::log(config.jfid_hz / params.j0_hz);

  for (int r = 0; r < config.realizations; ++r) {
    TrajectoryCursor cursor(model, master_seed, static_cast<uint64_t>(r));
    cursor.set_mask(active);
    double theta = 0.0;
    double t_prev = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
      double gap = times[k] - t_prev;
      int substeps = gap > 0.0 ? std::max(1, static_cast<int>(std::ceil(gap / dt_cap))) : 0;
      double dt = substeps > 0 ? gap / substeps : 0.0;
      for (int ss = 0; ss < substeps; ++ss) {
        AxisSample s = cursor.current_sum();
        double inst_hz;
        if (config.mode == FIDMode::charge) {
          inst_hz = params.j0_hz * vm::vm_exp((v_fid + s.charge_v) / params.insensitivity_v);
        } else {
          inst_hz = config.dbz_hz + s.magnetic_hz;
        }
        theta += 2.0 * M_PI * inst_hz * dt;
        cursor.fast_forward(dt);
      }
      t_prev = times[k];
      double amp = std::cos(0.5 * theta);
      trace.p_montecarlo[k] += amp * amp;
    }
  }
  for (double& p : trace.p_montecarlo) p /= config.realizations;

  // envelope samples at extrema times t = k / (2 f_drive)
  std::vector<double> ext_t, ext_e;
  for (std::size_t k = 0; k < nt; ++k) {
    double ratio = times[k] * 2.0 * f_drive;
    double rk = std::nearbyint(ratio);
    if (rk >= 1.0 && std::abs(ratio - rk) < 1e-6) {
      double sign = (static_cast<long long>(rk) % 2 == 0) ? 1.0 : -1.0;
      ext_t.push_back(times[k]);
      ext_e.push_back(sign * (2.0 * trace.p_montecarlo[k] - 1.0));
    }
  }
  trace.fit_ok = fit_envelope(ext_t, ext_e, &trace.fitted_t2star_s);
  return trace;
}

}  // namespace stq
