#include "stq/noise.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "stq/kernels.hpp"

namespace stq {

std::string component_label(NoiseAxis axis, double frequency_hz) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s@%.6gHz", axis == NoiseAxis::charge ? "V" : "bz",
                frequency_hz);
  return buf;
}

std::vector<double> decade_frequencies(double f_ir_hz, double f_uv_hz) {
  if (!(f_ir_hz > 0.0) || !(f_uv_hz >= f_ir_hz))
    throw std::invalid_argument("decade band requires 0 < f_ir <= f_uv");
  double decades = std::log10(f_uv_hz / f_ir_hz);
  int count = static_cast<int>(std::lround(decades)) + 1;
  if (std::abs(decades - std::lround(decades)) > 1e-9)
    throw std::invalid_argument("band edges must be whole decades apart");
  std::vector<double> freqs(count);
  for (int i = 0; i < count; ++i) freqs[i] = f_ir_hz * std::pow(10.0, i);
  return freqs;
}

void NoiseModel::add_component(NoiseAxis axis, double frequency_hz, double power) {
  if (!(frequency_hz > 0.0)) throw std::invalid_argument("component frequency must be > 0");
  if (!(power >= 0.0)) throw std::invalid_argument("component power must be >= 0");
  components.push_back({power, frequency_hz, axis, component_label(axis, frequency_hz)});
}

void NoiseModel::add_decade_ladder(NoiseAxis axis, double f_ir_hz, double f_uv_hz,
                                   double power) {
  for (double f : decade_frequencies(f_ir_hz, f_uv_hz)) add_component(axis, f, power);
}

std::vector<std::size_t> NoiseModel::axis_indices(NoiseAxis axis) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < components.size(); ++i)
    if (components[i].axis == axis) idx.push_back(i);
  return idx;
}

void NoiseModel::validate() const {
  for (const auto& c : components) {
    if (!(c.frequency_hz > 0.0)) throw std::invalid_argument("component frequency must be > 0");
    if (!(c.power >= 0.0)) throw std::invalid_argument("component power must be >= 0");
  }
}

double psd_continuous(std::span<const OUComponent> comps, double f_hz) {
  if (f_hz < 0.0) throw std::invalid_argument("psd_continuous: f must be >= 0");
  double s = 0.0;
  for (const auto& c : comps)
    s += c.power * c.frequency_hz /
         (M_PI * (c.frequency_hz * c.frequency_hz + f_hz * f_hz));
  return s;
}

double psd_discrete(std::span<const OUComponent> comps, double f_hz, double fs_hz) {
  if (!(fs_hz > 0.0)) throw std::invalid_argument("psd_discrete: fs must be > 0");
  if (f_hz < 0.0) throw std::invalid_argument("psd_discrete: f must be >= 0");
  if (f_hz > 0.5 * fs_hz) throw std::invalid_argument("psd_discrete: f above Nyquist");
  // Image sum in closed form. Multiplying the cot/coth expression through by
  // sin^2(pi f / fs) removes the singularity at f = 0:
  //   S_d = sum_j p_j k_j / (fs (cos^2(pi f/fs) + k_j^2 sin^2(pi f/fs))),
  // with k_j = coth(pi f_j / fs).
  double phase = M_PI * f_hz / fs_hz;
  double cs = std::cos(phase), sn = std::sin(phase);
  double cs2 = cs * cs, sn2 = sn * sn;
  double total = 0.0;
  for (const auto& c : comps) {
    double k = 1.0 / std::tanh(M_PI * c.frequency_hz / fs_hz);
    total += c.power * k / (fs_hz * (cs2 + k * k * sn2));
  }
  return total;
}

TrajectoryCursor::TrajectoryCursor(const NoiseModel& model, uint64_t master_seed,
                                   uint64_t seed_index)
    : model_(model) {
  model_.validate();
  std::size_t n = model_.components.size();
  keys_.resize(n);
  values_.resize(n);
  draw_index_.assign(n, 1);  // draw 0 is the stationary initial value
  mask_.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    keys_[i] = derive_stream_key(master_seed, StreamPurpose::noise_component,
                                 model_.hash(), seed_index, i);
    values_[i] = std::sqrt(0.5 * model_.components[i].power) * gaussian_draw(keys_[i], 0);
  }
}

void TrajectoryCursor::refresh_coefficients(double dt_s) {
  if (dt_s == coeff_dt_s_) return;
  std::size_t n = model_.components.size();
  decay_.resize(n);
  kick_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f = model_.components[i].frequency_hz;
    double p = model_.components[i].power;
    decay_[i] = std::exp(-2.0 * M_PI * f * dt_s);
    kick_[i] = std::sqrt(0.5 * p * -std::expm1(-4.0 * M_PI * f * dt_s));
  }
  coeff_dt_s_ = dt_s;
}

AxisSample TrajectoryCursor::advance(double dt_s) {
  if (dt_s < 0.0) throw std::invalid_argument("advance: negative dt");
  refresh_coefficients(dt_s);
  AxisSample out;
  for (std::size_t i = 0; i < model_.components.size(); ++i) {
    double g = gaussian_draw(keys_[i], draw_index_[i]++);
    values_[i] = std::fma(decay_[i], values_[i], kick_[i] * g);
    if (mask_[i]) {
      if (model_.components[i].axis == NoiseAxis::charge)
        out.charge_v += values_[i];
      else
        out.magnetic_hz += values_[i];
    }
  }
  time_ps_ += llround(dt_s * 1e12);
  return out;
}

void TrajectoryCursor::fast_forward(double window_s) { (void)advance(window_s); }

void TrajectoryCursor::advance_block(double dt_s, std::size_t n, double* charge_out,
                                     double* magnetic_out) {
  if (dt_s < 0.0) throw std::invalid_argument("advance_block: negative dt");
  refresh_coefficients(dt_s);
  for (std::size_t k = 0; k < n; ++k) {
    charge_out[k] = 0.0;
    magnetic_out[k] = 0.0;
  }
  gauss_buf_.resize(n);
  const KernelOps& ops = active_kernel_ops();
  // Left-endpoint convention: slot k carries the component value at the
  // start of step k, i.e. before the k-th update.
  for (std::size_t i = 0; i < model_.components.size(); ++i) {
    ops.gauss_fill(keys_[i], draw_index_[i], n, gauss_buf_.data());
    draw_index_[i] += n;
    double a = decay_[i], b = kick_[i];
    double eta = values_[i];
    double* out = model_.components[i].axis == NoiseAxis::charge ? charge_out : magnetic_out;
    if (mask_[i]) {
      for (std::size_t k = 0; k < n; ++k) {
        out[k] += eta;
        eta = std::fma(a, eta, b * gauss_buf_[k]);
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) eta = std::fma(a, eta, b * gauss_buf_[k]);
    }
    values_[i] = eta;
  }
  time_ps_ += static_cast<int64_t>(n) * llround(dt_s * 1e12);
}

AxisSample TrajectoryCursor::current_sum() const {
  AxisSample out;
  for (std::size_t i = 0; i < model_.components.size(); ++i) {
    if (!mask_[i]) continue;
    if (model_.components[i].axis == NoiseAxis::charge)
      out.charge_v += values_[i];
    else
      out.magnetic_hz += values_[i];
  }
  return out;
}

void TrajectoryCursor::mask_all_on() { mask_.assign(model_.components.size(), 1); }

void TrajectoryCursor::set_mask(const std::vector<std::size_t>& keep) {
  mask_.assign(model_.components.size(), 0);
  for (std::size_t i : keep) {
    if (i >= mask_.size()) throw std::out_of_range("set_mask: component index out of range");
    mask_[i] = 1;
  }
}

}  // namespace stq
