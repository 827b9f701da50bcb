#include "stq/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "stq/fitting.hpp"

namespace stq {

void TrajectoryPartition::validate(const NoiseModel& model,
                                   const std::vector<std::size_t>& scope) const {
  std::set<std::size_t> scope_set(scope.begin(), scope.end());
  std::set<std::size_t> seen;
  for (const auto& [name, indices] : parts) {
    if (indices.empty()) throw std::invalid_argument("partition: empty part '" + name + "'");
    for (std::size_t i : indices) {
      if (i >= model.components.size())
        throw std::invalid_argument("partition: component index out of range");
      if (!scope_set.count(i))
        throw std::invalid_argument("partition: component outside the parent scope");
      if (!seen.insert(i).second)
        throw std::invalid_argument("partition: parts are not pairwise disjoint");
    }
  }
  if (seen.size() != scope_set.size())
    throw std::invalid_argument("partition: union of parts does not cover the scope");
}

std::vector<std::size_t> full_scope(const NoiseModel& model) {
  std::vector<std::size_t> all(model.components.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

std::vector<std::size_t> charge_scope(const NoiseModel& model) {
  return model.axis_indices(NoiseAxis::charge);
}

TrajectoryPartition TrajectoryPartition::axis_split(const NoiseModel& model) {
  TrajectoryPartition p;
  p.kind = "axis";
  p.parts.emplace_back("charge", model.axis_indices(NoiseAxis::charge));
  p.parts.emplace_back("magnetic", model.axis_indices(NoiseAxis::magnetic));
  return p;
}

TrajectoryPartition TrajectoryPartition::frequency_split(const NoiseModel& model,
                                                         double boundary_hz) {
  TrajectoryPartition p;
  p.kind = "frequency";
  std::vector<std::size_t> low, high;
  for (std::size_t i : model.axis_indices(NoiseAxis::charge)) {
    if (model.components[i].frequency_hz <= boundary_hz)
      low.push_back(i);
    else
      high.push_back(i);
  }
  p.parts.emplace_back("low", std::move(low));
  p.parts.emplace_back("high", std::move(high));
  return p;
}

SplitRunResult split_run(const NoiseModel& model, const QubitParams& params,
                         const RBSchedule& schedule, const CircuitSet& circuits,
                         uint64_t master_seed, uint64_t seed_index,
                         const std::vector<std::size_t>& scope,
                         const TrajectoryPartition& partition) {
  partition.validate(model, scope);
  SplitRunResult result;
  result.parent = run_experiment(model, params, schedule, circuits, master_seed,
                                 seed_index, &scope);
  for (const auto& [name, indices] : partition.parts)
    result.parts.emplace_back(
        name, run_experiment(model, params, schedule, circuits, master_seed, seed_index,
                             &indices));
  return result;
}

namespace {

struct SortedMetrics {
  // [realization][rank], rank ordered by the parent's ascending metric
  std::vector<std::vector<double>> parent;
  std::vector<std::vector<std::vector<double>>> parts;  // [part][realization][rank]
  std::vector<std::vector<std::size_t>> permutations;
};

SortedMetrics collect(const std::vector<SplitRunResult>& realizations,
                      const MetricExtractor& metric) {
  if (realizations.size() < 10)
    throw std::invalid_argument("sorted_percentile_curves: need >= 10 realizations");
  SortedMetrics sm;
  std::size_t n_parts = realizations.front().parts.size();
  std::size_t n_pass = realizations.front().parent.passes.size();
  if (n_pass < 10)
    throw std::invalid_argument("sorted_percentile_curves: need >= 10 passes");
  sm.parts.resize(n_parts);
  for (const auto& real : realizations) {
    std::vector<double> p = metric(real.parent);
    if (p.size() != n_pass)
      throw std::invalid_argument("sorted_percentile_curves: mismatched pass counts");
    auto perm = argsort(p);
    std::vector<double> ps(n_pass);
    for (std::size_t k = 0; k < n_pass; ++k) ps[k] = p[perm[k]];
    sm.parent.push_back(std::move(ps));
    sm.permutations.push_back(perm);
    if (real.parts.size() != n_parts)
      throw std::invalid_argument("sorted_percentile_curves: mismatched part lists");
    for (std::size_t j = 0; j < n_parts; ++j) {
      std::vector<double> v = metric(real.parts[j].second);
      if (v.size() != n_pass)
        throw std::invalid_argument("sorted_percentile_curves: mismatched pass counts");
      std::vector<double> vs(n_pass);
      for (std::size_t k = 0; k < n_pass; ++k) vs[k] = v[perm[k]];
      sm.parts[j].push_back(std::move(vs));
    }
  }
  return sm;
}

double median_of(std::vector<double>& scratch) {
  std::sort(scratch.begin(), scratch.end());
  std::size_t n = scratch.size();
  return (n % 2) ? scratch[n / 2] : 0.5 * (scratch[n / 2 - 1] + scratch[n / 2]);
}

CurveBand summarize(const std::vector<std::vector<double>>& replicates) {
  // replicates[b][rank] -> mean and 2.5/97.5 percentile bands per rank
  std::size_t n_rank = replicates.front().size();
  CurveBand band;
  band.mean.resize(n_rank);
  band.lo.resize(n_rank);
  band.hi.resize(n_rank);
  std::vector<double> col(replicates.size());
  for (std::size_t k = 0; k < n_rank; ++k) {
    for (std::size_t b = 0; b < replicates.size(); ++b) col[b] = replicates[b][k];
    band.mean[k] = mean(col);
    std::sort(col.begin(), col.end());
    band.lo[k] = percentile_nearest_rank_sorted(col, 2.5);
    band.hi[k] = percentile_nearest_rank_sorted(col, 97.5);
  }
  return band;
}

}  // namespace

AttributionResult sorted_percentile_curves(const std::vector<SplitRunResult>& realizations,
                                           const MetricExtractor& metric, int bootstrap_b,
                                           uint64_t bootstrap_seed) {
  SortedMetrics sm = collect(realizations, metric);
  std::size_t n_real = sm.parent.size();
  std::size_t n_rank = sm.parent.front().size();
  std::size_t n_parts = sm.parts.size();

  PhiloxKey key = derive_key(bootstrap_seed, {static_cast<uint64_t>(StreamPurpose::bootstrap)});
  uint64_t cursor = 0;

  std::vector<std::vector<double>> parent_reps(bootstrap_b);
  std::vector<std::vector<std::vector<double>>> part_reps(n_parts);
  for (auto& pr : part_reps) pr.resize(bootstrap_b);
  std::vector<std::vector<double>> gap_reps(bootstrap_b);

  std::vector<std::size_t> pick(n_real);
  std::vector<double> scratch(n_real);
  for (int b = 0; b < bootstrap_b; ++b) {
    for (std::size_t i = 0; i < n_real; ++i)
      pick[i] = uniform_below(key, cursor, static_cast<uint32_t>(n_real));
    parent_reps[b].resize(n_rank);
    for (auto& pr : part_reps) pr[b].resize(n_rank);
    gap_reps[b].resize(n_rank);
    for (std::size_t k = 0; k < n_rank; ++k) {
      for (std::size_t i = 0; i < n_real; ++i) scratch[i] = sm.parent[pick[i]][k];
      double p_med = median_of(scratch);
      parent_reps[b][k] = p_med;
      double part_sum = 0.0;
      for (std::size_t j = 0; j < n_parts; ++j) {
        for (std::size_t i = 0; i < n_real; ++i) scratch[i] = sm.parts[j][pick[i]][k];
        double m = median_of(scratch);
        part_reps[j][b][k] = m;
        part_sum += m;
      }
      gap_reps[b][k] = p_med - part_sum;
    }
  }

  AttributionResult out;
  for (const auto& [name, run] : realizations.front().parts) {
    (void)run;
    out.part_names.push_back(name);
  }
  out.parent = summarize(parent_reps);
  for (std::size_t j = 0; j < n_parts; ++j) out.parts.push_back(summarize(part_reps[j]));
  out.gap = summarize(gap_reps);
  out.permutations = std::move(sm.permutations);
  return out;
}

AttributionResult attribute_rb_number(const std::vector<SplitRunResult>& realizations,
                                      int bootstrap_b, uint64_t bootstrap_seed) {
  return sorted_percentile_curves(realizations, [](const RBRun& run) { return r_series(run); },
                                  bootstrap_b, bootstrap_seed);
}

AttributionResult attribute_circuit_bitflip(const std::vector<SplitRunResult>& realizations,
                                            int circuit_id, int bootstrap_b,
                                            uint64_t bootstrap_seed) {
  return sorted_percentile_curves(
      realizations,
      [circuit_id](const RBRun& run) { return bitflip_series(run, circuit_id); },
      bootstrap_b, bootstrap_seed);
}

const CurveBand& additivity_gap(const AttributionResult& result) { return result.gap; }

}  // namespace stq
