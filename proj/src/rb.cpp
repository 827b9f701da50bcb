#include "stq/rb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stq/fitting.hpp"

namespace stq {

void RBSchedule::validate() const {
  if (depths.size() < 3) throw std::invalid_argument("schedule: need >= 3 depths");
  int prev = 0;
  for (int d : depths) {
    if (d < 2 || (d & (d - 1)) != 0)
      throw std::invalid_argument("schedule: depths must be powers of two >= 2");
    if (d <= prev) throw std::invalid_argument("schedule: depths must be ascending");
    prev = d;
  }
  if (circuits_per_depth < 1 || passes < 1)
    throw std::invalid_argument("schedule: circuits per depth and passes must be >= 1");
  if (spam_prep_s < 0.0 || spam_meas_s < 0.0 || inter_pass_idle_s < 0.0)
    throw std::invalid_argument("schedule: windows must be >= 0");
}

int64_t CircuitSet::pass_duration_ps(const RBSchedule& schedule) const {
  int64_t total = 0;
  for (const auto& c : circuits)
    total += schedule.spam_prep_ps() + c.duration_ps + schedule.spam_meas_ps();
  return total;
}

CircuitSet sample_circuits(const CliffordGroup& group, const GateCache& cache,
                           const RBSchedule& schedule, uint64_t circuit_seed) {
  schedule.validate();
  if (!cache.complete()) throw std::runtime_error("gate cache incomplete: compile first");

  PhiloxKey key = derive_key(circuit_seed,
                             {static_cast<uint64_t>(StreamPurpose::circuit_sampling)});
  uint64_t cursor = 0;

  CircuitSet set;
  set.circuit_seed = circuit_seed;
  int id = 0;
  for (int depth : schedule.depths) {
    for (int i = 0; i < schedule.circuits_per_depth; ++i) {
      RBCircuit c;
      c.circuit_id = id++;
      c.depth = depth;
      int prod = group.identity_index();
      for (int g = 0; g < depth - 1; ++g) {
        int k = static_cast<int>(uniform_below(key, cursor, 24));
        c.clifford_indices.push_back(k);
        prod = group.product(k, prod);  // time-ordered: new gate acts after
      }
      c.inverse_index = group.inverse(prod);

      c.timeline.fs_hz = cache.params.sample_rate_hz;
      auto append_clifford = [&](int index) {
        for (GeneratorId gen : group.element(index).word)
          c.timeline.append(cache.gate(gen).timeline, generator_name(gen));
      };
      for (int k : c.clifford_indices) append_clifford(k);
      append_clifford(c.inverse_index);
      c.duration_ps = c.timeline.duration_ps();
      set.circuits.push_back(std::move(c));
    }
  }
  return set;
}

namespace {

double rb_sse(std::span<const int> depths, std::span<const double> p, double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    double model = 0.5 + 0.5 * std::pow(lambda, depths[i]);
    double d = p[i] - model;
    s += d * d;
  }
  return s;
}

}  // namespace

RBFit fit_rb(std::span<const int> depths, std::span<const double> mean_survival,
             std::span<const double> sigma) {
  if (depths.size() < 3 || depths.size() != mean_survival.size())
    throw std::invalid_argument("fit_rb: need >= 3 depths with matching survivals");
  if (!sigma.empty() && sigma.size() != depths.size())
    throw std::invalid_argument("fit_rb: sigma length mismatch");

  // log-linearized slope through the origin as the seed estimate
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    double y = 2.0 * mean_survival[i] - 1.0;
    if (y > 1e-12) {
      num += depths[i] * std::log(y);
      den += static_cast<double>(depths[i]) * depths[i];
    }
  }
  double lambda0 = den > 0.0 ? std::exp(num / den) : 0.0;
  lambda0 = std::clamp(lambda0, 0.0, 1.0);

  auto sse = [&](double lam) { return rb_sse(depths, mean_survival, lam); };

  // coarse scan guards against flat/multi-welled objectives, then Brent
  const int n_grid = 256;
  double best_lam = lambda0, best_sse = sse(lambda0);
  for (int i = 0; i <= n_grid; ++i) {
    double lam = static_cast<double>(i) / n_grid;
    double s = sse(lam);
    if (s < best_sse) {
      best_sse = s;
      best_lam = lam;
    }
  }
  double lo = std::max(0.0, best_lam - 1.5 / n_grid);
  double hi = std::min(1.0, best_lam + 1.5 / n_grid);
  double lam_hat = brent_minimize(sse, lo, hi, 1e-15);
  if (sse(best_lam) < sse(lam_hat)) lam_hat = best_lam;

  RBFit fit;
  fit.r = std::clamp(0.5 * (1.0 - lam_hat), 0.0, 0.5);
  fit.sse = sse(lam_hat);
  fit.converged = std::isfinite(fit.sse);
  fit.at_boundary = lam_hat <= 1e-12 || lam_hat >= 1.0 - 1e-12;

  // 2 sigma CI from the linearized covariance. With known per-point sigma:
  // var_lambda = sum(J^2 s_i^2) / (sum J^2)^2; otherwise the pooled-residual
  // estimate var_lambda = SSE/(n-1) / sum J^2.
  double jtj = 0.0;
  for (int d : depths) jtj += 0.25 * d * d * std::pow(lam_hat, 2 * (d - 1));
  double var_lambda;
  if (!sigma.empty()) {
    double num = 0.0;
    for (std::size_t i = 0; i < depths.size(); ++i) {
      double ji = 0.5 * depths[i] * std::pow(lam_hat, depths[i] - 1);
      num += ji * ji * sigma[i] * sigma[i];
    }
    var_lambda = jtj > 0.0 ? num / (jtj * jtj) : 0.25;
  } else {
    double dof = static_cast<double>(depths.size()) - 1.0;
    double s2 = fit.sse / std::max(dof, 1.0);
    var_lambda = jtj > 0.0 ? s2 / jtj : 0.25;
  }
  fit.ci_2sigma = std::sqrt(var_lambda);  // sigma_lambda = 2 * sigma_r
  return fit;
}

PassResult run_pass(const CircuitSet& circuits, TrajectoryCursor& cursor,
                    const RBSchedule& schedule, const QubitParams& params, int pass_index,
                    ShotStream* shots) {
  PassResult result;
  result.pass_index = pass_index;
  int64_t expected = cursor.time_ps();
  for (const auto& c : circuits.circuits) {
    cursor.fast_forward(schedule.spam_prep_s);
    expected += schedule.spam_prep_ps();
    if (cursor.time_ps() != expected)
      throw std::logic_error("run_pass: cursor clock deviates from the schedule");

    CircuitOutcome out;
    out.pass = pass_index;
    out.circuit_id = c.circuit_id;
    out.depth = c.depth;
    out.t_start_s = cursor.time_s();
    Su2 u = propagate(c.timeline, &cursor, params);
    out.p_survive = u.w * u.w + u.z * u.z;
    out.p_bitflip = u.x * u.x + u.y * u.y;
    if (shots) out.shot = uniform_draw(shots->key, shots->index++) < out.p_survive ? 1 : 0;
    expected += c.duration_ps;

    cursor.fast_forward(schedule.spam_meas_s);
    expected += schedule.spam_meas_ps();
    result.outcomes.push_back(out);
  }

  std::vector<double> means(schedule.depths.size(), 0.0);
  std::vector<int> counts(schedule.depths.size(), 0);
  for (const auto& out : result.outcomes) {
    auto it = std::find(schedule.depths.begin(), schedule.depths.end(), out.depth);
    std::size_t di = static_cast<std::size_t>(it - schedule.depths.begin());
    means[di] += out.p_survive;
    counts[di] += 1;
  }
  for (std::size_t i = 0; i < means.size(); ++i) means[i] /= counts[i];
  result.fit = fit_rb(schedule.depths, means);
  return result;
}

RBRun run_experiment(const NoiseModel& model, const QubitParams& params,
                     const RBSchedule& schedule, const CircuitSet& circuits,
                     uint64_t master_seed, uint64_t seed_index,
                     const std::vector<std::size_t>* mask) {
  schedule.validate();
  params.validate();
  if (circuits.circuits.empty()) throw std::runtime_error("empty circuit set: sample first");

  RBRun run;
  run.model_id = model.id;
  run.seed_index = seed_index;

  TrajectoryCursor cursor(model, master_seed, seed_index);
  if (mask) cursor.set_mask(*mask);

  ShotStream shots;
  ShotStream* shots_ptr = nullptr;
  if (schedule.shots_mode) {
    shots.key = derive_stream_key(master_seed, StreamPurpose::measurement_shot,
                                  model.hash(), seed_index, 0);
    shots_ptr = &shots;
  }

  for (int pass = 0; pass < schedule.passes; ++pass) {
    if (pass > 0 && schedule.inter_pass_idle_s > 0.0)
      cursor.fast_forward(schedule.inter_pass_idle_s);
    run.passes.push_back(run_pass(circuits, cursor, schedule, params, pass, shots_ptr));
  }

  run.lab_time_ps = cursor.time_ps();
  int64_t expected = static_cast<int64_t>(schedule.passes) * circuits.pass_duration_ps(schedule) +
                     static_cast<int64_t>(schedule.passes - 1) * schedule.inter_pass_idle_ps();
  if (run.lab_time_ps != expected)
    throw std::logic_error("run_experiment: laboratory time does not match the schedule sum");
  return run;
}

std::vector<double> r_series(const RBRun& run) {
  std::vector<double> r;
  r.reserve(run.passes.size());
  for (const auto& p : run.passes) r.push_back(p.fit.r);
  return r;
}

std::vector<double> bitflip_series(const RBRun& run, int circuit_id) {
  std::vector<double> series;
  for (const auto& p : run.passes) {
    bool found = false;
    for (const auto& o : p.outcomes) {
      if (o.circuit_id == circuit_id) {
        series.push_back(o.p_bitflip);
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("bitflip_series: unknown circuit id");
  }
  return series;
}

std::vector<int> circuit_ids_at_depth(const CircuitSet& circuits, int depth) {
  std::vector<int> ids;
  for (const auto& c : circuits.circuits)
    if (c.depth == depth) ids.push_back(c.circuit_id);
  return ids;
}

}  // namespace stq
