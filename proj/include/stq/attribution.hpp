#pragma once

// Error attribution by correlated re-execution: the same noise realization
// is replayed with component subsets masked on, then per-pass metrics are
// co-sorted by the parent trajectory's ranking and summarized per percentile
// rank with a bootstrap over realizations.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stq/noise.hpp"
#include "stq/rb.hpp"

namespace stq {

struct TrajectoryPartition {
  std::string kind;  // "axis" | "frequency" | "custom"
  std::vector<std::pair<std::string, std::vector<std::size_t>>> parts;

  // parts must be pairwise disjoint and their union must equal `scope`.
  void validate(const NoiseModel& model, const std::vector<std::size_t>& scope) const;

  static TrajectoryPartition axis_split(const NoiseModel& model);
  // split of the charge components at a frequency boundary: low <= boundary < high
  static TrajectoryPartition frequency_split(const NoiseModel& model, double boundary_hz);
};

// All component indices of the model (the default parent scope).
std::vector<std::size_t> full_scope(const NoiseModel& model);
std::vector<std::size_t> charge_scope(const NoiseModel& model);

struct SplitRunResult {
  RBRun parent;
  std::vector<std::pair<std::string, RBRun>> parts;
};

// Parent and per-part runs consume identical per-component noise streams;
// only the mask differs. `scope` selects the parent's active components.
SplitRunResult split_run(const NoiseModel& model, const QubitParams& params,
                         const RBSchedule& schedule, const CircuitSet& circuits,
                         uint64_t master_seed, uint64_t seed_index,
                         const std::vector<std::size_t>& scope,
                         const TrajectoryPartition& partition);

struct CurveBand {
  std::vector<double> mean, lo, hi;  // one entry per percentile rank
};

struct AttributionResult {
  std::vector<std::string> part_names;
  CurveBand parent;
  std::vector<CurveBand> parts;
  CurveBand gap;  // parent - sum(parts), paired bootstrap
  std::vector<std::vector<std::size_t>> permutations;  // parent argsort per realization
};

using MetricExtractor = std::function<std::vector<double>(const RBRun&)>;

// Per realization, sort passes by the parent metric and apply the same
// permutation to every part; per rank, bootstrap (B replicates, resampling
// realizations) the median across realizations and report its mean with the
// 2.5% / 97.5% replicate quantiles.
AttributionResult sorted_percentile_curves(const std::vector<SplitRunResult>& realizations,
                                           const MetricExtractor& metric, int bootstrap_b,
                                           uint64_t bootstrap_seed);

// convenience wrappers for the shipped metrics
AttributionResult attribute_rb_number(const std::vector<SplitRunResult>& realizations,
                                      int bootstrap_b, uint64_t bootstrap_seed);
AttributionResult attribute_circuit_bitflip(const std::vector<SplitRunResult>& realizations,
                                            int circuit_id, int bootstrap_b,
                                            uint64_t bootstrap_seed);

// signed per-percentile additivity gap with its bootstrap confidence band
const CurveBand& additivity_gap(const AttributionResult& result);

}  // namespace stq
