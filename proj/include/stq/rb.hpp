#pragma once

// Wall-clock randomized benchmarking: a fixed circuit set is replayed every
// pass against one persistent noise trajectory, fast-forwarding through SPAM
// windows, and each pass is fitted to P = 1/2 + 1/2 (1-2r)^L.

#include <cstdint>
#include <string>
#include <vector>

#include "stq/clifford.hpp"
#include "stq/noise.hpp"
#include "stq/pulse.hpp"
#include "stq/qubit.hpp"

namespace stq {

struct RBSchedule {
  std::vector<int> depths = {2, 4, 8, 16, 32, 64, 128, 256, 512};
  int circuits_per_depth = 10;
  int passes = 100;
  double spam_prep_s = 50e-6;
  double spam_meas_s = 50e-6;
  double inter_pass_idle_s = 0.0;
  bool shots_mode = false;

  void validate() const;
  int64_t spam_prep_ps() const { return llround(spam_prep_s * 1e12); }
  int64_t spam_meas_ps() const { return llround(spam_meas_s * 1e12); }
  int64_t inter_pass_idle_ps() const { return llround(inter_pass_idle_s * 1e12); }
};

struct RBCircuit {
  int circuit_id = 0;  // global index, depth-major
  int depth = 0;
  std::vector<int> clifford_indices;  // the L-1 random draws
  int inverse_index = 0;
  ControlTimeline timeline;
  int64_t duration_ps = 0;
};

struct CircuitSet {
  std::vector<RBCircuit> circuits;  // ascending (depth, index)
  uint64_t circuit_seed = 0;
  // exact per-pass laboratory time including both SPAM windows per circuit
  int64_t pass_duration_ps(const RBSchedule& schedule) const;
};

// First L-1 gates uniform over the 24 classes; the L-th is the group inverse
// of their time-ordered product. The same set is reused across all passes,
// models and seeds (the circuit seed is independent of the noise seeds).
CircuitSet sample_circuits(const CliffordGroup& group, const GateCache& cache,
                           const RBSchedule& schedule, uint64_t circuit_seed);

struct RBFit {
  double r = 0.0;
  double ci_2sigma = 0.0;
  bool converged = false;
  bool at_boundary = false;
  double sse = 0.0;
};

// Unweighted least squares of P = 1/2 + 1/2 (1-2r)^L over r in [0, 1/2];
// coarse grid seeded from the log-linearized slope, then Brent. When the
// caller knows the per-point sampling noise (e.g. binomial shot noise),
// `sigma` feeds the covariance; the depth means are strongly
// heteroscedastic, so the pooled-residual covariance undercovers there.
RBFit fit_rb(std::span<const int> depths, std::span<const double> mean_survival,
             std::span<const double> sigma = {});

struct CircuitOutcome {
  int pass = 0;
  int circuit_id = 0;
  int depth = 0;
  double t_start_s = 0.0;  // wall-clock at circuit start (after prep window)
  double p_survive = 0.0;
  double p_bitflip = 0.0;
  int shot = -1;  // -1 unless shots_mode
};

struct PassResult {
  int pass_index = 0;
  std::vector<CircuitOutcome> outcomes;
  RBFit fit;
};

struct RBRun {
  std::string model_id;
  uint64_t seed_index = 0;
  std::vector<PassResult> passes;
  int64_t lab_time_ps = 0;
};

struct ShotStream {
  PhiloxKey key;
  uint64_t index = 0;
};

PassResult run_pass(const CircuitSet& circuits, TrajectoryCursor& cursor,
                    const RBSchedule& schedule, const QubitParams& params, int pass_index,
                    ShotStream* shots = nullptr);

// One full wall-clock simulation: `passes` back-to-back passes on a single
// trajectory. The cursor mask (when narrower than the model) selects the
// active noise components; see attribution.
RBRun run_experiment(const NoiseModel& model, const QubitParams& params,
                     const RBSchedule& schedule, const CircuitSet& circuits,
                     uint64_t master_seed, uint64_t seed_index,
                     const std::vector<std::size_t>* mask = nullptr);

// dataset extractors
std::vector<double> r_series(const RBRun& run);
std::vector<double> bitflip_series(const RBRun& run, int circuit_id);
std::vector<int> circuit_ids_at_depth(const CircuitSet& circuits, int depth);

}  // namespace stq
