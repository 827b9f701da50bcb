// Attribution tests: partition validation, bit-identical component streams
// across masked re-executions, permutation integrity, and estimator limits.

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "stq/attribution.hpp"
#include "stq/fitting.hpp"

using namespace stq;

namespace {

QubitParams device_params() { return QubitParams{}; }

const CliffordGroup& group() {
  static CliffordGroup g = CliffordGroup::build();
  return g;
}

const GateCache& cache() {
  static GateCache c = [] {
    CompileOptions o;
    o.seed = 20260808;
    return compile_all(device_params(), o);
  }();
  return c;
}

NoiseModel two_axis_model() {
  NoiseModel m;
  m.id = "attr";
  m.add_decade_ladder(NoiseAxis::charge, 1e-1, 1e2, (150e-6) * (150e-6));
  m.add_decade_ladder(NoiseAxis::magnetic, 1e-1, 1e1, (30e3) * (30e3));
  return m;
}

RBSchedule tiny_schedule() {
  RBSchedule s;
  s.depths = {2, 4, 8, 16};
  s.circuits_per_depth = 3;
  s.passes = 10;
  return s;
}

}  // namespace

TEST_CASE("partition validation: disjoint cover of the scope") {
  NoiseModel m = two_axis_model();
  auto scope = full_scope(m);

  TrajectoryPartition ok = TrajectoryPartition::axis_split(m);
  ok.validate(m, scope);

  TrajectoryPartition overlap = ok;
  overlap.parts[1].second.push_back(overlap.parts[0].second[0]);
  CHECK_THROWS_AS(overlap.validate(m, scope), std::invalid_argument);

  TrajectoryPartition hole = TrajectoryPartition::axis_split(m);
  hole.parts[1].second.pop_back();
  CHECK_THROWS_AS(hole.validate(m, scope), std::invalid_argument);

  TrajectoryPartition foreign = TrajectoryPartition::axis_split(m);
  foreign.parts[0].second[0] = 999;
  CHECK_THROWS_AS(foreign.validate(m, scope), std::invalid_argument);
}

TEST_CASE("frequency split respects the boundary") {
  NoiseModel m = two_axis_model();
  TrajectoryPartition p = TrajectoryPartition::frequency_split(m, 1e0);
  REQUIRE(p.parts.size() == 2);
  for (std::size_t i : p.parts[0].second)
    CHECK(m.components[i].frequency_hz <= 1e0);
  for (std::size_t i : p.parts[1].second)
    CHECK(m.components[i].frequency_hz > 1e0);
  p.validate(m, charge_scope(m));
}

TEST_CASE("split_run: single-part partition reproduces the parent bit-for-bit") {
  NoiseModel m = two_axis_model();
  RBSchedule s = tiny_schedule();
  s.passes = 2;
  CircuitSet set = sample_circuits(group(), cache(), s, 4);

  TrajectoryPartition whole;
  whole.kind = "custom";
  whole.parts.emplace_back("everything", full_scope(m));

  SplitRunResult r = split_run(m, device_params(), s, set, 55, 0, full_scope(m), whole);
  REQUIRE(r.parts.size() == 1);
  for (std::size_t p = 0; p < r.parent.passes.size(); ++p) {
    CHECK(r.parent.passes[p].fit.r == r.parts[0].second.passes[p].fit.r);
    for (std::size_t k = 0; k < r.parent.passes[p].outcomes.size(); ++k)
      CHECK(r.parent.passes[p].outcomes[k].p_survive ==
            r.parts[0].second.passes[p].outcomes[k].p_survive);
  }
}

TEST_CASE("axis split: per-pass noise decomposes additively per step") {
  // Partition completeness at the Hamiltonian level: the per-axis sums of
  // the part cursors add up to the parent's sums, exactly.
  NoiseModel m = two_axis_model();
  TrajectoryCursor parent(m, 9, 2);
  TrajectoryCursor charge_only(m, 9, 2);
  TrajectoryCursor magnetic_only(m, 9, 2);
  charge_only.set_mask(m.axis_indices(NoiseAxis::charge));
  magnetic_only.set_mask(m.axis_indices(NoiseAxis::magnetic));
  for (int k = 0; k < 200; ++k) {
    AxisSample sp = parent.advance(1e-6);
    AxisSample sc = charge_only.advance(1e-6);
    AxisSample sm = magnetic_only.advance(1e-6);
    CHECK(sp.charge_v == sc.charge_v + sm.charge_v);      // sm.charge == 0
    CHECK(sp.magnetic_hz == sc.magnetic_hz + sm.magnetic_hz);
    CHECK(sc.magnetic_hz == 0.0);
    CHECK(sm.charge_v == 0.0);
  }
}

TEST_CASE("component streams are bit-identical between parent and part runs") {
  NoiseModel m = two_axis_model();
  RBSchedule s = tiny_schedule();
  s.passes = 1;
  CircuitSet set = sample_circuits(group(), cache(), s, 4);
  TrajectoryPartition axis = TrajectoryPartition::axis_split(m);

  // replicate split_run's cursors and compare full component states after
  // identical schedules
  TrajectoryCursor a(m, 31, 7);
  TrajectoryCursor b(m, 31, 7);
  b.set_mask(axis.parts[0].second);
  run_pass(set, a, s, device_params(), 0);
  run_pass(set, b, s, device_params(), 0);
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    CHECK(a.component_value(i) == b.component_value(i));
    CHECK(a.component_draws(i) == b.component_draws(i));
  }
}

TEST_CASE("sorted_percentile_curves: trivial partition gives zero gap") {
  NoiseModel m = two_axis_model();
  RBSchedule s = tiny_schedule();
  CircuitSet set = sample_circuits(group(), cache(), s, 4);
  TrajectoryPartition whole;
  whole.kind = "custom";
  whole.parts.emplace_back("everything", full_scope(m));

  std::vector<SplitRunResult> realizations;
  for (uint64_t r = 0; r < 10; ++r)
    realizations.push_back(split_run(m, device_params(), s, set, 123, r, full_scope(m), whole));

  AttributionResult res = attribute_rb_number(realizations, 200, 77);
  for (std::size_t k = 0; k < res.gap.mean.size(); ++k) {
    CHECK(res.gap.mean[k] == 0.0);
    CHECK(res.gap.lo[k] == 0.0);
    CHECK(res.gap.hi[k] == 0.0);
    CHECK(res.parent.mean[k] == res.parts[0].mean[k]);
  }
}

TEST_CASE("permutation integrity: stored permutations argsort the parent") {
  NoiseModel m = two_axis_model();
  RBSchedule s = tiny_schedule();
  CircuitSet set = sample_circuits(group(), cache(), s, 4);
  TrajectoryPartition axis = TrajectoryPartition::axis_split(m);

  std::vector<SplitRunResult> realizations;
  for (uint64_t r = 0; r < 10; ++r)
    realizations.push_back(split_run(m, device_params(), s, set, 321, r, full_scope(m), axis));

  AttributionResult res = attribute_rb_number(realizations, 100, 5);
  REQUIRE(res.permutations.size() == realizations.size());
  for (std::size_t i = 0; i < realizations.size(); ++i) {
    auto rs = r_series(realizations[i].parent);
    auto expect = argsort(rs);
    CHECK(res.permutations[i] == expect);
  }
}

TEST_CASE("a constant component metric yields a flat curve") {
  // permutation invariance of a constant series
  std::vector<SplitRunResult> realizations;
  NoiseModel m = two_axis_model();
  RBSchedule s = tiny_schedule();
  CircuitSet set = sample_circuits(group(), cache(), s, 4);
  TrajectoryPartition axis = TrajectoryPartition::axis_split(m);
  for (uint64_t r = 0; r < 10; ++r)
    realizations.push_back(split_run(m, device_params(), s, set, 9, r, full_scope(m), axis));

  auto constant_metric = [](const RBRun& run) {
    return std::vector<double>(run.passes.size(), 0.125);
  };
  // abuse: feed the constant as the part metric by substituting runs; easier:
  // apply metric returning parent r for parent and constant for everything,
  // then check the "parts" curves are flat. Implemented by checking directly
  // that a constant series is unchanged under any permutation summary.
  AttributionResult res = sorted_percentile_curves(realizations, constant_metric, 100, 3);
  for (std::size_t k = 0; k < res.parent.mean.size(); ++k) {
    CHECK(res.parent.mean[k] == doctest::Approx(0.125));
    for (const auto& part : res.parts) CHECK(part.mean[k] == doctest::Approx(0.125));
  }
}

TEST_CASE("bootstrap CI width shrinks like 1/sqrt(realizations)") {
  // Exercise the resampling machinery with a clean iid metric: Gaussian
  // pseudo-values keyed by (realization, pass). Doubling the realization
  // count should shrink the replicate CI width by ~ sqrt(2).
  NoiseModel m = two_axis_model();
  RBSchedule s = tiny_schedule();
  s.passes = 10;
  CircuitSet set = sample_circuits(group(), cache(), s, 4);
  TrajectoryPartition axis = TrajectoryPartition::axis_split(m);

  std::vector<SplitRunResult> many;
  for (uint64_t r = 0; r < 40; ++r)
    many.push_back(split_run(m, device_params(), s, set, 55, r, full_scope(m), axis));
  std::vector<SplitRunResult> few(many.begin(), many.begin() + 20);

  auto gaussian_metric = [](const RBRun& run) {
    PhiloxKey key = derive_key(run.seed_index, {991});
    std::vector<double> v(run.passes.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = gaussian_draw(key, i);
    return v;
  };
  AttributionResult res_many = sorted_percentile_curves(many, gaussian_metric, 600, 11);
  AttributionResult res_few = sorted_percentile_curves(few, gaussian_metric, 600, 11);
  double w_many = 0.0, w_few = 0.0;
  for (std::size_t k = 0; k < res_many.parent.mean.size(); ++k) {
    w_many += res_many.parent.hi[k] - res_many.parent.lo[k];
    w_few += res_few.parent.hi[k] - res_few.parent.lo[k];
  }
  double ratio = w_few / w_many;
  CHECK(ratio > 1.15);  // sqrt(2) expected at 2x realizations
  CHECK(ratio < 1.75);
}

TEST_CASE("preconditions: realization and pass floors, mismatched passes") {
  NoiseModel m = two_axis_model();
  RBSchedule s = tiny_schedule();
  CircuitSet set = sample_circuits(group(), cache(), s, 4);
  TrajectoryPartition axis = TrajectoryPartition::axis_split(m);
  std::vector<SplitRunResult> realizations;
  for (uint64_t r = 0; r < 5; ++r)
    realizations.push_back(split_run(m, device_params(), s, set, 1, r, full_scope(m), axis));
  CHECK_THROWS_AS(attribute_rb_number(realizations, 50, 1), std::invalid_argument);

  // unknown circuit id in the per-circuit metric
  for (uint64_t r = 5; r < 10; ++r)
    realizations.push_back(split_run(m, device_params(), s, set, 1, r, full_scope(m), axis));
  CHECK_THROWS_AS(attribute_circuit_bitflip(realizations, 9999, 50, 1),
                  std::invalid_argument);
}

TEST_CASE("per-circuit attribution: zero-noise depth-2 circuit stays at the floor") {
  NoiseModel null_model;
  null_model.id = "null";
  null_model.add_component(NoiseAxis::charge, 1.0, 0.0);
  null_model.add_component(NoiseAxis::magnetic, 1.0, 0.0);
  RBSchedule s = tiny_schedule();
  CircuitSet set = sample_circuits(group(), cache(), s, 4);
  TrajectoryPartition axis = TrajectoryPartition::axis_split(null_model);

  std::vector<SplitRunResult> realizations;
  for (uint64_t r = 0; r < 10; ++r)
    realizations.push_back(
        split_run(null_model, device_params(), s, set, 2, r, full_scope(null_model), axis));

  int depth2_id = circuit_ids_at_depth(set, 2).front();
  AttributionResult res = attribute_circuit_bitflip(realizations, depth2_id, 100, 9);
  for (std::size_t k = 0; k < res.parent.mean.size(); ++k) {
    CHECK(res.parent.mean[k] <= 1e-4);
    for (const auto& part : res.parts) CHECK(part.mean[k] <= 1e-4);
  }
}
