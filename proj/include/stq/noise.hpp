#pragma once

// Sums of independent Ornstein-Uhlenbeck processes on the charge (voltage)
// and magnetic axes, with exact conditional updates so a trajectory can be
// advanced by any window in O(#components):
//
//   eta <- eta * e^{-2 pi f dt} + g * sqrt((p/2)(1 - e^{-4 pi f dt}))
//
// which reproduces the stationary autocorrelation (p/2) e^{-2 pi f |tau|} at
// every lag. Charge components carry volts, magnetic components carry the
// gradient as a true frequency (Hz), i.e. power is (delta bz / h)^2.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stq/rng.hpp"

namespace stq {

enum class NoiseAxis { charge, magnetic };

struct OUComponent {
  double power = 0.0;         // V^2 (charge) or Hz^2 (magnetic)
  double frequency_hz = 1.0;  // characteristic frequency, > 0
  NoiseAxis axis = NoiseAxis::charge;
  std::string label;
};

std::string component_label(NoiseAxis axis, double frequency_hz);

struct NoiseModel {
  std::string id;
  std::vector<OUComponent> components;

  // One component per decade from f_ir to f_uv inclusive, equal powers.
  void add_decade_ladder(NoiseAxis axis, double f_ir_hz, double f_uv_hz, double power);
  void add_component(NoiseAxis axis, double frequency_hz, double power);

  std::vector<std::size_t> axis_indices(NoiseAxis axis) const;
  uint64_t hash() const { return fnv1a64(id); }
  void validate() const;
};

// Decade ladder frequency list helper (shared with calibration).
std::vector<double> decade_frequencies(double f_ir_hz, double f_uv_hz);

// One-sided PSD, Eq-of-the-model: sum_i p_i f_i / (pi (f_i^2 + f^2)).
double psd_continuous(std::span<const OUComponent> comps, double f_hz);

// Aliased discrete-time PSD for sampling rate fs. Stable closed form of the
// folded image sum; converges to psd_continuous as fs -> inf.
double psd_discrete(std::span<const OUComponent> comps, double f_hz, double fs_hz);

struct AxisSample {
  double charge_v = 0.0;
  double magnetic_hz = 0.0;
};

// A single stochastic trajectory of all components of one model. Components
// are keyed independently per (master_seed, model, seed_index, component),
// so masked re-execution consumes identical randomness per component.
// Masked-off components still evolve; they are only excluded from the sum.
class TrajectoryCursor {
 public:
  TrajectoryCursor(const NoiseModel& model, uint64_t master_seed, uint64_t seed_index);

  // Advance wall-clock by dt and return the per-axis sums over unmasked
  // components. Consumes exactly one normal draw per component per call.
  AxisSample advance(double dt_s);

  // Statistically identical to advance(window); the sample is discarded.
  void fast_forward(double window_s);

  // Advance n steps of equal dt, accumulating per-axis sums per step into
  // charge_out / magnetic_out. Bit-identical to n advance(dt) calls.
  void advance_block(double dt_s, std::size_t n, double* charge_out, double* magnetic_out);

  AxisSample current_sum() const;

  void mask_all_on();
  // Keep only components selected by `keep` (index into model components).
  void set_mask(const std::vector<std::size_t>& keep);
  const std::vector<uint8_t>& mask() const { return mask_; }

  int64_t time_ps() const { return time_ps_; }
  double time_s() const { return static_cast<double>(time_ps_) * 1e-12; }

  const NoiseModel& model() const { return model_; }
  double component_value(std::size_t i) const { return values_[i]; }
  uint64_t component_draws(std::size_t i) const { return draw_index_[i]; }

 private:
  void refresh_coefficients(double dt_s);

  NoiseModel model_;
  std::vector<PhiloxKey> keys_;
  std::vector<double> values_;
  std::vector<uint64_t> draw_index_;
  std::vector<uint8_t> mask_;
  int64_t time_ps_ = 0;

  // per-dt update coefficients, rebuilt when dt changes
  double coeff_dt_s_ = -1.0;
  std::vector<double> decay_;
  std::vector<double> kick_;

  std::vector<double> gauss_buf_;
};

}  // namespace stq
