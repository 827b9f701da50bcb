#pragma once

// Free-induction-decay analytics and calibration. The dephasing variance of
// the accumulated phase under a sum of OU processes is
//
//   sigma^2(t) = K * sum_i (p_i / f_i^2) (e^{-2 pi f_i t} + 2 pi f_i t - 1)
//
// with K = (J_FID / (I h))^2 for charge noise (linearized exponential map)
// and K = 1/h^2 for magnetic noise; powers here are stored pre-divided by
// h^2, so magnetic K = 1. Since sigma^2 is linear in the (equal) component
// powers, calibrating power to a target T2* (sigma^2(T2*)/2 = 1) is closed
// form. The Monte Carlo path cross-validates with the full exponential map.

#include <cstdint>
#include <span>
#include <vector>

#include "stq/noise.hpp"
#include "stq/qubit.hpp"

namespace stq {

enum class FIDMode { charge, magnetic };

struct FIDConfig {
  FIDMode mode = FIDMode::charge;
  double jfid_hz = 12e6;           // charge-mode drive J_FID/h
  double insensitivity_v = 18e-3;  // charge-mode exponential-map scale
  double dbz_hz = 10e6;            // magnetic-mode drive dbz/h
  std::vector<double> times_s;     // empty -> extrema grid up to 2 * T2*
  int realizations = 1000;

  double drive_hz() const { return mode == FIDMode::charge ? jfid_hz : dbz_hz; }
  void validate() const;
};

// Phase variance at time t; comps must live on the matching axis.
double sigma2_charge(double t_s, std::span<const OUComponent> comps, double jfid_hz,
                     double insensitivity_v);
double sigma2_magnetic(double t_s, std::span<const OUComponent> comps);
double sigma2(double t_s, const NoiseModel& model, const FIDConfig& config);

// 1/2 (1 + e^{-sigma^2/2} cos(2 pi f_drive t))
double analytic_return_probability(double t_s, const FIDConfig& config,
                                   const NoiseModel& model);

// Root of sigma^2(T)/2 = 1. Returns +inf when all powers vanish.
double solve_t2star(const NoiseModel& model, const FIDConfig& config);

// Equal per-component power p with sigma^2(T2*)/2 = 1, closed form.
double calibrate_power(double t2star_target_s, std::span<const double> frequencies_hz,
                       const FIDConfig& config);

struct FIDTrace {
  std::vector<double> times_s;
  std::vector<double> p_analytic;
  std::vector<double> p_montecarlo;
  std::vector<double> sigma2_values;
  double fitted_t2star_s = 0.0;  // +inf when non-decaying
  bool fit_ok = false;
};

// Monte Carlo FID averaged over `config.realizations` trajectories, plus a
// Gaussian envelope fit 1/2 (1 +- e^{-(t/T2*)^2}) on the oscillation extrema.
FIDTrace simulate_fid(const NoiseModel& model, const FIDConfig& config,
                      const QubitParams& params, uint64_t master_seed);

}  // namespace stq
