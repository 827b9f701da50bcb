#include "stq/su2.hpp"

namespace stq {

namespace {

struct Ket {
  std::complex<double> a0, a1;
};

Ket ket(BasisState s) {
  constexpr double r = 0.70710678118654752440;
  switch (s) {
    case BasisState::zero: return {{1.0, 0.0}, {0.0, 0.0}};
    case BasisState::one: return {{0.0, 0.0}, {1.0, 0.0}};
    case BasisState::plus: return {{r, 0.0}, {r, 0.0}};
    default: return {{r, 0.0}, {-r, 0.0}};
  }
}

}  // namespace

double survival_probability(const Unitary2& u, BasisState prepared, BasisState target) {
  Ket p = ket(prepared), t = ket(target);
  std::complex<double> c0 = u.m00 * p.a0 + u.m01 * p.a1;
  std::complex<double> c1 = u.m10 * p.a0 + u.m11 * p.a1;
  std::complex<double> amp = std::conj(t.a0) * c0 + std::conj(t.a1) * c1;
  return std::norm(amp);
}

double survival_probability(const Su2& u, BasisState prepared, BasisState target) {
  return survival_probability(Unitary2::from_su2(u), prepared, target);
}

}  // namespace stq
