// Pulse rendering and generator compilation tests.

#include <cmath>

#include "doctest.h"
#include "stq/pulse.hpp"

using namespace stq;

namespace {

QubitParams device_params() {
  QubitParams p;
  p.j0_hz = 0.075e6;
  p.insensitivity_v = 18e-3;
  p.dbz_hz = 10e6;
  p.sample_rate_hz = 1e9;
  return p;
}

CompileOptions fast_options() {
  CompileOptions o;
  o.seed = 20260808;
  return o;
}

// compile once, share across test cases
const GateCache& shared_cache() {
  static GateCache cache = compile_all(device_params(), fast_options());
  return cache;
}

}  // namespace

TEST_CASE("render_pulse: zero amplitude gives a flat zero timeline") {
  PulseShapeParams shape;
  shape.duration_s = 60e-9;
  shape.sigma_s = 2e-9;
  shape.pulses.push_back({20e-9, 30e-9, 0.0});
  ControlTimeline tl = render_pulse(shape, 1e9);
  REQUIRE(tl.samples_v.size() == 60);
  for (double v : tl.samples_v) CHECK(v == 0.0);
}

TEST_CASE("render_pulse: 10-90% rise time is 2.5631 sigma") {
  PulseShapeParams shape;
  shape.duration_s = 80e-9;
  shape.sigma_s = 2e-9;
  shape.pulses.push_back({25e-9, 30e-9, 100e-3});
  ControlTimeline tl = render_pulse(shape, 1e9);

  auto crossing = [&](double level) {
    for (std::size_t k = 1; k < 40; ++k) {
      if (tl.samples_v[k - 1] < level && tl.samples_v[k] >= level) {
        double f = (level - tl.samples_v[k - 1]) / (tl.samples_v[k] - tl.samples_v[k - 1]);
        return (static_cast<double>(k - 1) + f) * 1e-9;
      }
    }
    return -1.0;
  };
  double rise = crossing(0.9 * 100e-3) - crossing(0.1 * 100e-3);
  CHECK(rise == doctest::Approx(kRisePerSigma * 2e-9).epsilon(0.02));
}

TEST_CASE("render_pulse: zero smoothing recovers the square train exactly") {
  PulseShapeParams shape;
  shape.duration_s = 60e-9;
  shape.sigma_s = 0.0;
  shape.pulses.push_back({10.3e-9, 30e-9, 90e-3});
  ControlTimeline tl = render_pulse(shape, 1e9);
  for (std::size_t k = 0; k < tl.samples_v.size(); ++k) {
    double t = (k + 0.5) * 1e-9;  // samples represent step midpoints
    double expect = (t > 10.3e-9 && t < 40.3e-9) ? 90e-3 : 0.0;
    CHECK(tl.samples_v[k] == expect);
  }
}

TEST_CASE("render_pulse: convolution preserves interior pulse area") {
  PulseShapeParams shape;
  shape.duration_s = 100e-9;
  shape.sigma_s = 2.2e-9;
  shape.pulses.push_back({30e-9, 40e-9, 110e-3});
  ControlTimeline tl = render_pulse(shape, 1e9);
  double area = 0.0;
  for (double v : tl.samples_v) area += v * tl.dt_s();
  CHECK(area == doctest::Approx(110e-3 * 40e-9).epsilon(1e-6));
}

TEST_CASE("render_pulse rejects non-sample-aligned durations") {
  PulseShapeParams shape;
  shape.duration_s = 60.4e-9;
  shape.sigma_s = 2e-9;
  shape.pulses.push_back({20e-9, 30e-9, 0.1});
  CHECK_THROWS_AS(render_pulse(shape, 1e9), std::invalid_argument);
}

TEST_CASE("gate_fidelity closed forms") {
  Unitary2 id;
  CHECK(gate_fidelity(id, id) == doctest::Approx(1.0));
  // Z(pi) vs X(pi): trace of sz sx vanishes
  Unitary2 zpi = Unitary2::from_su2({0.0, 0.0, 0.0, 1.0});
  Unitary2 xpi = Unitary2::from_su2({0.0, 1.0, 0.0, 0.0});
  CHECK(gate_fidelity(zpi, xpi) == doctest::Approx(0.0).epsilon(1e-14));
  for (double theta : {0.3, 1.1, 2.9}) {
    Unitary2 z = Unitary2::from_su2({std::cos(theta / 2), 0.0, 0.0, std::sin(theta / 2)});
    double c = std::cos(theta / 2);
    CHECK(gate_fidelity(id, z) == doctest::Approx(c * c).epsilon(1e-12));
  }
}

TEST_CASE("analytic single-pulse inversion: Z(pi) voltage is about 97.2 mV") {
  // suppressed-gradient limit: 2 pi (J/h) T = pi over T = 30 ns
  QubitParams p = device_params();
  double j_needed = 1.0 / (2.0 * 30e-9);
  CHECK(j_needed == doctest::Approx(16.6667e6).epsilon(1e-4));
  double v = p.insensitivity_v * std::log(j_needed / p.j0_hz);
  CHECK(v == doctest::Approx(97.2e-3).epsilon(1e-3));
}

TEST_CASE("compile_generator: identity is a zero-duration no-op") {
  CompileResult r = compile_generator(GeneratorId::identity, device_params(), fast_options());
  CHECK(r.met_threshold);
  CHECK(r.gate.timeline.samples_v.empty());
  CHECK(r.gate.infidelity == 0.0);
}

TEST_CASE("all generators compile below the acceptance threshold") {
  const GateCache& cache = shared_cache();
  for (GeneratorId id : {GeneratorId::x_p90, GeneratorId::x_m90, GeneratorId::z_p90,
                         GeneratorId::z_m90}) {
    const CompiledGate& g = cache.gate(id);
    INFO("generator ", generator_name(id), " infidelity ", g.infidelity);
    CHECK(g.infidelity <= 1e-5);
    CHECK(g.duration_ps % 1000 == 0);  // integer ns
    // rendered samples stay inside the control band with smoothing overshoot margin
    for (double v : g.timeline.samples_v) {
      CHECK(v >= -1e-6);
      CHECK(v <= 121e-3);
    }
  }
}

TEST_CASE("compiled pulses realize their targets through the real propagator") {
  const GateCache& cache = shared_cache();
  QubitParams p = device_params();
  for (GeneratorId id : {GeneratorId::x_p90, GeneratorId::x_m90, GeneratorId::z_p90,
                         GeneratorId::z_m90}) {
    Su2 u = propagate(cache.gate(id).timeline, nullptr, p);
    CHECK(su2_fidelity(u, generator_target(id)) >= 1.0 - 1e-5);
  }
}

TEST_CASE("compilation is reproducible bit-for-bit under one seed") {
  CompileOptions o = fast_options();
  CompileResult a = compile_generator(GeneratorId::z_p90, device_params(), o);
  CompileResult b = compile_generator(GeneratorId::z_p90, device_params(), o);
  CHECK(a.gate.infidelity == b.gate.infidelity);
  REQUIRE(a.gate.timeline.samples_v.size() == b.gate.timeline.samples_v.size());
  for (std::size_t i = 0; i < a.gate.timeline.samples_v.size(); ++i)
    CHECK(a.gate.timeline.samples_v[i] == b.gate.timeline.samples_v[i]);
}

TEST_CASE("gate cache round-trips through JSON") {
  const GateCache& cache = shared_cache();
  std::string path = "test_gate_cache.json";
  save_gate_cache(cache, path);
  GateCache loaded = load_gate_cache(path);
  CHECK(loaded.params_hash == cache.params_hash);
  REQUIRE(loaded.complete());
  for (GeneratorId id : kAllGenerators) {
    const auto& a = cache.gate(id).timeline.samples_v;
    const auto& b = loaded.gate(id).timeline.samples_v;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  std::remove(path.c_str());
}
