#include "stq/pulse.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "stq/nelder_mead.hpp"
#include "stq/rng.hpp"

namespace stq {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kAmpLoV = 70e-3, kAmpHiV = 120e-3;
constexpr double kWidthLoS = 30e-9, kWidthHiS = 50e-9;
constexpr double kRiseLoS = 4e-9, kRiseHiS = 6e-9;
constexpr double kPadS = 10e-9;  // clearance so smoothed edges fit the window

}  // namespace

std::string generator_name(GeneratorId id) {
  switch (id) {
    case GeneratorId::identity: return "I";
    case GeneratorId::x_p90: return "X+90";
    case GeneratorId::x_m90: return "X-90";
    case GeneratorId::z_p90: return "Z+90";
    default: return "Z-90";
  }
}

GeneratorId generator_from_name(const std::string& name) {
  for (GeneratorId id : kAllGenerators)
    if (generator_name(id) == name) return id;
  throw std::invalid_argument("unknown generator name: " + name);
}

Su2 generator_target(GeneratorId id) {
  constexpr double r = 0.70710678118654752440;
  switch (id) {
    case GeneratorId::identity: return {1.0, 0.0, 0.0, 0.0};
    case GeneratorId::x_p90: return {r, r, 0.0, 0.0};
    case GeneratorId::x_m90: return {r, -r, 0.0, 0.0};
    case GeneratorId::z_p90: return {r, 0.0, 0.0, r};
    default: return {r, 0.0, 0.0, -r};
  }
}

void PulseShapeParams::validate() const {
  if (pulses.empty() || pulses.size() > 5)
    throw std::invalid_argument("shape: pulse count must be 1-5");
  double rise = kRisePerSigma * sigma_s;
  if (rise < kRiseLoS - 1e-12 || rise > kRiseHiS + 1e-12)
    throw std::invalid_argument("shape: rise/decay time outside 4-6 ns");
  for (const auto& p : pulses) {
    if (p.amplitude_v != 0.0 &&
        (p.amplitude_v < kAmpLoV - 1e-12 || p.amplitude_v > kAmpHiV + 1e-12))
      throw std::invalid_argument("shape: amplitude outside 70-120 mV band");
    if (p.width_s < kWidthLoS - 1e-15 || p.width_s > kWidthHiS + 1e-15)
      throw std::invalid_argument("shape: peak duration outside 30-50 ns");
    if (p.start_s < 0.0 || p.start_s + p.width_s > duration_s)
      throw std::invalid_argument("shape: pulse exceeds the timeline");
  }
}

ControlTimeline render_pulse(const PulseShapeParams& params, double fs_hz) {
  if (!(fs_hz > 0.0)) throw std::invalid_argument("render_pulse: fs must be > 0");
  double n_d = params.duration_s * fs_hz;
  double n_round = std::nearbyint(n_d);
  if (std::abs(n_d - n_round) > 1e-6)
    throw std::invalid_argument("render_pulse: duration not sample-aligned");
  auto n = static_cast<std::size_t>(n_round);

  ControlTimeline tl;
  tl.fs_hz = fs_hz;
  tl.samples_v.assign(n, 0.0);
  double dt = 1.0 / fs_hz;
  // Each sample holds the step over [k dt, (k+1) dt); the shape is evaluated
  // at the step midpoint, which keeps the propagated gate second-order
  // accurate in dt (left-endpoint sampling leaves a first-order residual in
  // the time-ordered product and fails the dt-halving convergence check).
  for (const auto& p : params.pulses) {
    double e = p.start_s + p.width_s;
    if (params.sigma_s > 0.0) {
      double inv = 1.0 / (kSqrt2 * params.sigma_s);
      for (std::size_t k = 0; k < n; ++k) {
        double t = (static_cast<double>(k) + 0.5) * dt;
        tl.samples_v[k] +=
            0.5 * p.amplitude_v * (std::erf((t - p.start_s) * inv) - std::erf((t - e) * inv));
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        double t = (static_cast<double>(k) + 0.5) * dt;
        double step_s = t > p.start_s ? 1.0 : (t == p.start_s ? 0.5 : 0.0);
        double step_e = t > e ? 1.0 : (t == e ? 0.5 : 0.0);
        tl.samples_v[k] += p.amplitude_v * (step_s - step_e);
      }
    }
  }
  tl.segments.push_back({0, n, "pulse_train"});
  return tl;
}

namespace {

struct ShapeSpace {
  int n_pulses = 1;
  double duration_s = 0.0;

  std::size_t dims() const { return 1 + 3 * static_cast<std::size_t>(n_pulses); }

  // x layout: [sigma_ns, (amp_mv, width_ns, start_ns) * n]
  PulseShapeParams clamp(std::span<const double> x, double* penalty) const {
    PulseShapeParams shape;
    shape.duration_s = duration_s;
    double pen = 0.0;
    auto clamped = [&pen](double v, double lo, double hi) {
      double c = std::clamp(v, lo, hi);
      pen += (v - c) * (v - c);
      return c;
    };
    shape.sigma_s = clamped(x[0], kRiseLoS / kRisePerSigma * 1e9, kRiseHiS / kRisePerSigma * 1e9) * 1e-9;
    for (int i = 0; i < n_pulses; ++i) {
      double amp = clamped(x[1 + 3 * i], kAmpLoV * 1e3, kAmpHiV * 1e3) * 1e-3;
      double width = clamped(x[2 + 3 * i], kWidthLoS * 1e9, kWidthHiS * 1e9) * 1e-9;
      double s_hi = (duration_s - kPadS - width) * 1e9;
      double start = clamped(x[3 + 3 * i], kPadS * 1e9, s_hi) * 1e-9;
      shape.pulses.push_back({start, width, amp});
    }
    if (penalty) *penalty = pen;
    return shape;
  }
};

double shape_infidelity(const PulseShapeParams& shape, const QubitParams& params,
                        const Su2& target) {
  ControlTimeline tl = render_pulse(shape, params.sample_rate_hz);
  Su2 u = propagate(tl, nullptr, params);
  return 1.0 - su2_fidelity(u, target);
}

// Snap samples to their mV decimal representation so that the persisted
// cache reproduces the in-memory gate bit for bit.
void quantize_to_mv(ControlTimeline* tl) {
  for (double& v : tl->samples_v) v = (v * 1e3) / 1e3;
}

}  // namespace

uint64_t compute_params_hash(const QubitParams& params, const CompileOptions& options) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "j0=%.17g;I=%.17g;dbz=%.17g;fs=%.17g;seed=%llu;amp=%g-%g",
                params.j0_hz, params.insensitivity_v, params.dbz_hz, params.sample_rate_hz,
                static_cast<unsigned long long>(options.seed), kAmpLoV, kAmpHiV);
  return fnv1a64(buf);
}

CompileResult compile_generator(GeneratorId id, const QubitParams& params,
                                const CompileOptions& options) {
  params.validate();
  CompileResult result;
  result.gate.id = id;

  if (id == GeneratorId::identity) {
    // zero-duration no-op; idles are scheduled explicitly by the RB engine
    result.gate.timeline.fs_hz = params.sample_rate_hz;
    result.gate.infidelity = 0.0;
    result.gate.duration_ps = 0;
    result.best_infidelity = 0.0;
    result.met_threshold = true;
    return result;
  }

  const Su2 target = generator_target(id);
  PhiloxKey key = derive_key(options.seed, {static_cast<uint64_t>(StreamPurpose::compile_start),
                                            static_cast<uint64_t>(id)});
  uint64_t draw = 0;

  double best_f = 2.0;
  PulseShapeParams best_shape;
  std::vector<double> best_x;
  ShapeSpace best_space;

  auto consider = [&](const ShapeSpace& space, std::span<const double> x, double fx) {
    if (fx < best_f) {
      best_f = fx;
      best_x.assign(x.begin(), x.end());
      best_space = space;
      double pen = 0.0;
      best_shape = space.clamp(x, &pen);
    }
  };

  for (int n_pulses : options.pulse_counts) {
    for (int t_ns : options.duration_ladder_ns) {
      ShapeSpace space{n_pulses, t_ns * 1e-9};
      auto objective = [&](std::span<const double> x) {
        double pen = 0.0;
        PulseShapeParams shape = space.clamp(x, &pen);
        result.evals += 1;
        return shape_infidelity(shape, params, target) + 0.1 * pen;
      };
      for (int s = 0; s < options.starts_per_config; ++s) {
        std::vector<double> x0(space.dims());
        x0[0] = 1.6 + 0.7 * uniform_draw(key, draw++);
        for (int i = 0; i < n_pulses; ++i) {
          x0[1 + 3 * i] = 70.0 + 50.0 * uniform_draw(key, draw++);
          x0[2 + 3 * i] = 30.0 + 20.0 * uniform_draw(key, draw++);
          double span = std::max(1.0, t_ns - 10.0 - x0[2 + 3 * i] - 10.0);
          x0[3 + 3 * i] = 10.0 + span * uniform_draw(key, draw++);
        }
        std::vector<double> step(space.dims(), 4.0);
        step[0] = 0.2;
        auto r = nelder_mead(objective, x0, step, 1e-16, 1e-10,
                             options.max_evals / 2);
        consider(space, r.x, r.fx);
        if (best_f <= options.target_infidelity) break;
      }
      if (best_f <= options.target_infidelity) break;
    }
    if (best_f <= options.target_infidelity) break;
  }

  // polish from the best start with a tight simplex
  if (!best_x.empty()) {
    auto objective = [&](std::span<const double> x) {
      double pen = 0.0;
      PulseShapeParams shape = best_space.clamp(x, &pen);
      result.evals += 1;
      return shape_infidelity(shape, params, target) + 0.1 * pen;
    };
    std::vector<double> step(best_space.dims(), 0.05);
    step[0] = 0.01;
    auto r = nelder_mead(objective, best_x, step, 0.0, 1e-13, options.max_evals);
    consider(best_space, r.x, r.fx);
  }

  result.gate.shape = best_shape;
  result.gate.timeline = render_pulse(best_shape, params.sample_rate_hz);
  quantize_to_mv(&result.gate.timeline);
  result.gate.timeline.segments.front().label = generator_name(id);
  result.gate.infidelity =
      1.0 - su2_fidelity(propagate(result.gate.timeline, nullptr, params), target);
  result.gate.duration_ps = result.gate.timeline.duration_ps();
  result.best_infidelity = result.gate.infidelity;
  result.met_threshold = result.gate.infidelity <= options.accept_threshold;
  return result;
}

const CompiledGate& GateCache::gate(GeneratorId id) const {
  auto it = gates.find(id);
  if (it == gates.end())
    throw std::runtime_error("gate cache missing generator " + generator_name(id));
  return it->second;
}

GateCache compile_all(const QubitParams& params, const CompileOptions& options,
                      std::vector<CompileResult>* reports) {
  GateCache cache;
  cache.params = params;
  cache.params_hash = compute_params_hash(params, options);
  for (GeneratorId id : kAllGenerators) {
    CompileResult r = compile_generator(id, params, options);
    if (reports) reports->push_back(r);
    cache.gates[id] = r.gate;
  }
  return cache;
}

void save_gate_cache(const GateCache& cache, const std::string& path) {
  nlohmann::json root;
  root["schema"] = "stq-gate-cache-v1";
  root["params_hash"] = cache.params_hash;
  root["qubit"] = {{"j0_hz", cache.params.j0_hz},
                   {"insensitivity_v", cache.params.insensitivity_v},
                   {"dbz_hz", cache.params.dbz_hz},
                   {"sample_rate_hz", cache.params.sample_rate_hz}};
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& [id, gate] : cache.gates) {
    nlohmann::json g;
    g["params_hash"] = cache.params_hash;
    g["word"] = generator_name(id);
    std::vector<double> mv(gate.timeline.samples_v.size());
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = gate.timeline.samples_v[i] * 1e3;
    g["samples_mV"] = mv;
    g["duration_ns"] = gate.timeline.samples_v.size();
    g["infidelity"] = gate.infidelity;
    gates.push_back(std::move(g));
  }
  root["gates"] = std::move(gates);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gate cache: " + path);
  out << root.dump(2) << "\n";
}

GateCache load_gate_cache(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read gate cache: " + path);
  nlohmann::json root = nlohmann::json::parse(in);
  GateCache cache;
  cache.params_hash = root.at("params_hash").get<uint64_t>();
  const auto& q = root.at("qubit");
  cache.params.j0_hz = q.at("j0_hz").get<double>();
  cache.params.insensitivity_v = q.at("insensitivity_v").get<double>();
  cache.params.dbz_hz = q.at("dbz_hz").get<double>();
  cache.params.sample_rate_hz = q.at("sample_rate_hz").get<double>();
  for (const auto& g : root.at("gates")) {
    CompiledGate gate;
    gate.id = generator_from_name(g.at("word").get<std::string>());
    gate.timeline.fs_hz = cache.params.sample_rate_hz;
    for (double mv : g.at("samples_mV").get<std::vector<double>>())
      gate.timeline.samples_v.push_back(mv / 1e3);
    gate.timeline.segments.push_back(
        {0, gate.timeline.samples_v.size(), generator_name(gate.id)});
    gate.infidelity = g.at("infidelity").get<double>();
    gate.duration_ps = gate.timeline.duration_ps();
    cache.gates[gate.id] = gate;
  }
  return cache;
}

}  // namespace stq
