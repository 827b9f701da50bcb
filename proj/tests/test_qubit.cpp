// Qubit-dynamics tests: closed-form step exponential against a dense
// scaling-and-squaring oracle, propagation structure, survival probabilities,
// unitarity accounting, and scalar/SIMD full-path equivalence.

#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "stq/kernels.hpp"
#include "stq/qubit.hpp"

using namespace stq;

namespace {

struct C2x2 {
  std::complex<double> a, b, c, d;
  C2x2 operator*(const C2x2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  C2x2 operator+(const C2x2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  C2x2 scaled(std::complex<double> s) const { return {a * s, b * s, c * s, d * s}; }
};

// Dense matrix exponential by scaling-and-squaring on the Taylor series;
// independent of the axis-angle closed form under test.
C2x2 expm_oracle(double j_hz, double dbz_hz, double dt_s) {
  std::complex<double> mi(0.0, -1.0);
  double wz = M_PI * dt_s * j_hz;   // 2 pi dt * j / 2
  double wx = M_PI * dt_s * dbz_hz;
  C2x2 h{mi * wz, mi * wx, mi * wx, -mi * wz};  // -i * dt * H(angular)
  double scale = std::sqrt(wz * wz + wx * wx);
  int squarings = 0;
  while (scale > 0.25) {
    scale *= 0.5;
    ++squarings;
    h = h.scaled(0.5);
  }
  C2x2 result{1, 0, 0, 1};
  C2x2 term{1, 0, 0, 1};
  for (int k = 1; k <= 20; ++k) {
    term = term * h;
    term = term.scaled(1.0 / k);
    result = result + term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

double max_abs_diff(const C2x2& a, const Unitary2& u) {
  double m = 0.0;
  m = std::max(m, std::abs(a.a - u.m00));
  m = std::max(m, std::abs(a.b - u.m01));
  m = std::max(m, std::abs(a.c - u.m10));
  m = std::max(m, std::abs(a.d - u.m11));
  return m;
}

QubitParams device_params() {
  QubitParams p;
  p.j0_hz = 0.075e6;
  p.insensitivity_v = 18e-3;
  p.dbz_hz = 10e6;
  p.sample_rate_hz = 1e9;
  return p;
}

}  // namespace

TEST_CASE("exchange map: V = 0 gives the residual exchange") {
  QubitParams p = device_params();
  CHECK(exchange_from_voltage(0.0, p) == doctest::Approx(0.075e6).epsilon(1e-12));
  CHECK(exchange_from_voltage(p.insensitivity_v, p) ==
        doctest::Approx(0.075e6 * std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("exchange map: 91.35 mV drives 12 MHz within 0.1%") {
  QubitParams p = device_params();
  CHECK(exchange_from_voltage(91.35e-3, p) == doctest::Approx(12e6).epsilon(1e-3));
}

TEST_CASE("step_unitary trivial cases") {
  Su2 id = step_unitary(0.0, 0.0, 1e-9);
  CHECK(su2_fidelity(id, Su2::identity()) == doctest::Approx(1.0).epsilon(1e-14));

  // pure z rotation by pi: 2 pi j dt = pi
  double j = 0.5e9;
  Su2 zpi = step_unitary(j, 0.0, 1e-9);
  CHECK(survival_probability(zpi, BasisState::zero, BasisState::zero) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(survival_probability(zpi, BasisState::plus, BasisState::plus) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(step_unitary(1e6, 1e6, 0.0), std::invalid_argument);
}

TEST_CASE("step_unitary matches the dense exponential oracle to 1e-12") {
  std::mt19937_64 gen(20260808);
  std::uniform_real_distribution<double> jd(0.0, 60e6), bd(0.0, 20e6);
  std::uniform_real_distribution<double> td(0.05e-9, 20e-9);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double j = jd(gen), b = bd(gen), dt = td(gen);
    Unitary2 u = Unitary2::from_su2(step_unitary(j, b, dt));
    worst = std::max(worst, max_abs_diff(expm_oracle(j, b, dt), u));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("survival probabilities: unitarity and bitflip complement") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Su2 q{d(gen), d(gen), d(gen), d(gen)};
    q = q.normalized();
    double surv = survival_probability(q, BasisState::zero, BasisState::zero);
    double flip = survival_probability(q, BasisState::zero, BasisState::one);
    CHECK(surv + flip == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(surv >= 0.0);
    CHECK(surv <= 1.0);
  }
  CHECK(survival_probability(Su2::identity(), BasisState::zero, BasisState::zero) == 1.0);
  // X(pi) up to phase flips |0>
  Su2 xpi{0.0, 1.0, 0.0, 0.0};
  CHECK(survival_probability(xpi, BasisState::zero, BasisState::zero) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("propagate: zero-noise constant drive is a z rotation") {
  // J = 12 MHz for 41.7 ns ~ Z(pi) up to phase (dbz = 0 test configuration)
  QubitParams p = device_params();
  p.dbz_hz = 0.0;
  p.sample_rate_hz = 1e10;
  ControlTimeline tl;
  tl.fs_hz = 1e10;
  double v = p.insensitivity_v * std::log(12e6 / p.j0_hz);
  tl.samples_v.assign(417, v);
  Su2 u = propagate(tl, nullptr, p);
  CHECK(survival_probability(u, BasisState::plus, BasisState::plus) < 1e-4);
  CHECK(survival_probability(u, BasisState::zero, BasisState::zero) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("propagate: commuting steps accumulate phase exactly") {
  QubitParams p = device_params();
  p.dbz_hz = 0.0;
  ControlTimeline tl;
  tl.fs_hz = 1e9;
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> vd(0.0, 0.1);
  for (int i = 0; i < 5000; ++i) tl.samples_v.push_back(vd(gen));
  Su2 u = propagate(tl, nullptr, p);
  double riemann = 0.0;
  for (double v : tl.samples_v) riemann += exchange_from_voltage(v, p) * tl.dt_s();
  double theta = 2.0 * M_PI * riemann;  // total z angle
  Su2 expect{std::cos(0.5 * theta), 0.0, 0.0, std::sin(0.5 * theta)};
  CHECK(su2_fidelity(u, expect) > 1.0 - 1e-9);
  double angle = 2.0 * std::atan2(u.z, u.w);
  double wrapped = std::remainder(theta - angle, 4.0 * M_PI);
  CHECK(std::abs(wrapped) < 1e-9);
}

TEST_CASE("propagate: split timeline equals composed parts with threaded cursor") {
  QubitParams p = device_params();
  NoiseModel m;
  m.id = "split";
  m.add_decade_ladder(NoiseAxis::charge, 1e0, 1e3, 1e-8);
  m.add_decade_ladder(NoiseAxis::magnetic, 1e0, 1e2, 1e8);

  ControlTimeline a, b, whole;
  a.fs_hz = b.fs_hz = whole.fs_hz = 1e9;
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> vd(0.0, 0.1);
  for (int i = 0; i < 900; ++i) a.samples_v.push_back(vd(gen));
  for (int i = 0; i < 1100; ++i) b.samples_v.push_back(vd(gen));
  whole.samples_v = a.samples_v;
  whole.samples_v.insert(whole.samples_v.end(), b.samples_v.begin(), b.samples_v.end());

  TrajectoryCursor cw(m, 5, 0);
  Su2 uw = propagate(whole, &cw, p);

  TrajectoryCursor cs(m, 5, 0);
  Su2 ua = propagate(a, &cs, p);
  Su2 ub = propagate(b, &cs, p);
  Su2 u_split = compose(ub, ua);

  // identical noise stream bitwise; product differs only by fp regrouping
  CHECK(cw.time_ps() == cs.time_ps());
  for (std::size_t i = 0; i < m.components.size(); ++i)
    CHECK(cw.component_value(i) == cs.component_value(i));
  CHECK(std::abs(uw.w - u_split.w) < 1e-13);
  CHECK(std::abs(uw.x - u_split.x) < 1e-13);
  CHECK(std::abs(uw.y - u_split.y) < 1e-13);
  CHECK(std::abs(uw.z - u_split.z) < 1e-13);
}

TEST_CASE("propagate: deterministic given seed, timeline, params") {
  QubitParams p = device_params();
  NoiseModel m;
  m.id = "det";
  m.add_decade_ladder(NoiseAxis::charge, 1e-1, 1e2, 1e-8);
  ControlTimeline tl;
  tl.fs_hz = 1e9;
  tl.samples_v.assign(5000, 0.09);

  TrajectoryCursor c1(m, 123, 4);
  TrajectoryCursor c2(m, 123, 4);
  Su2 u1 = propagate(tl, &c1, p);
  Su2 u2 = propagate(tl, &c2, p);
  CHECK(u1.w == u2.w);
  CHECK(u1.x == u2.x);
  CHECK(u1.y == u2.y);
  CHECK(u1.z == u2.z);
}

TEST_CASE("propagate: unitarity after 1e6 accumulated steps") {
  QubitParams p = device_params();
  NoiseModel m;
  m.id = "uni";
  m.add_decade_ladder(NoiseAxis::charge, 1e0, 1e4, 1e-8);
  ControlTimeline tl;
  tl.fs_hz = 1e9;
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> vd(0.0, 0.12);
  tl.samples_v.resize(1000000);
  for (auto& v : tl.samples_v) v = vd(gen);
  TrajectoryCursor c(m, 11, 0);
  Su2 u = propagate(tl, &c, p);
  CHECK(Unitary2::from_su2(u).unitarity_deviation() < 1e-10);
}

TEST_CASE("propagate rejects a timeline at the wrong sampling rate") {
  QubitParams p = device_params();
  ControlTimeline tl;
  tl.fs_hz = 2e9;
  tl.samples_v.assign(10, 0.0);
  CHECK_THROWS_AS(propagate(tl, nullptr, p), std::invalid_argument);
}

TEST_CASE("full propagation path is bit-identical across kernel variants") {
  if (!cpu_has_avx2()) {
    MESSAGE("CPU lacks AVX2; skipping");
    return;
  }
  QubitParams p = device_params();
  NoiseModel m;
  m.id = "equiv";
  m.add_decade_ladder(NoiseAxis::charge, 1e-2, 1e3, 2e-8);
  m.add_decade_ladder(NoiseAxis::magnetic, 1e-1, 1e2, 5e8);
  ControlTimeline tl;
  tl.fs_hz = 1e9;
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> vd(0.0, 0.11);
  tl.samples_v.resize(30011);
  for (auto& v : tl.samples_v) v = vd(gen);

  KernelKind saved = active_kernel_kind();
  set_active_kernel(KernelKind::scalar);
  TrajectoryCursor cs(m, 77, 2);
  Su2 us = propagate(tl, &cs, p);
  set_active_kernel(KernelKind::avx2);
  TrajectoryCursor cv(m, 77, 2);
  Su2 uv = propagate(tl, &cv, p);
  set_active_kernel(saved);

  CHECK(us.w == uv.w);
  CHECK(us.x == uv.x);
  CHECK(us.y == uv.y);
  CHECK(us.z == uv.z);
  for (std::size_t i = 0; i < m.components.size(); ++i)
    CHECK(cs.component_value(i) == cv.component_value(i));
}
