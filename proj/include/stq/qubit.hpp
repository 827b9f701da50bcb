#pragma once

// Singlet-triplet qubit under H = (J(t) sz + dbz(t) sx)/2, J and dbz in true
// frequency (J/h, dbz/h); the 2*pi angular factors live inside step_unitary.
// Propagation is zero-order-hold at the sampling rate: one exact axis-angle
// exponential per sample. Noise is sampled at the left endpoint of each
// step; control timelines carry one constant per step (the renderer
// evaluates shapes at step midpoints, see render_pulse).

#include <cstdint>
#include <string>
#include <vector>

#include "stq/noise.hpp"
#include "stq/su2.hpp"

namespace stq {

struct QubitParams {
  double j0_hz = 0.075e6;          // residual exchange J0/h
  double insensitivity_v = 18e-3;  // voltage scale of the exponential map
  double dbz_hz = 10e6;            // static gradient dbz/h
  double sample_rate_hz = 1e9;

  void validate() const;
};

// J/h = (J0/h) exp(V / I)
double exchange_from_voltage(double v_volts, const QubitParams& params);

// exp(-i 2 pi dt (j sz + dbz sx) / 2) via the closed-form axis-angle SU(2)
// exponential: rotation angle 2 pi dt sqrt(j^2+dbz^2) about (dbz, 0, j).
Su2 step_unitary(double j_hz, double dbz_hz, double dt_s);

struct ControlTimeline {
  double fs_hz = 1e9;
  std::vector<double> samples_v;  // programmed voltage, volts

  struct Segment {
    std::size_t start = 0;
    std::size_t count = 0;
    std::string label;
  };
  std::vector<Segment> segments;

  double dt_s() const { return 1.0 / fs_hz; }
  double duration_s() const { return static_cast<double>(samples_v.size()) / fs_hz; }
  int64_t duration_ps() const;

  // Append `other` back to back (no idle), keeping its segments.
  void append(const ControlTimeline& other, const std::string& label = "");
};

// Time-ordered product of per-sample unitaries. `cursor == nullptr` runs the
// noiseless physics (used by the pulse compiler). The accumulated product is
// re-unitarized every 10^4 steps and once at the end.
Su2 propagate(const ControlTimeline& timeline, TrajectoryCursor* cursor,
              const QubitParams& params);

// Per-sample exchange values for a timeline (noiseless), for dumps/analysis.
std::vector<double> exchange_profile(const ControlTimeline& timeline,
                                     const QubitParams& params);

}  // namespace stq
