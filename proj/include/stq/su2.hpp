#pragma once

// SU(2) elements in quaternion form: q = (w, x, y, z) represents the unitary
// U = w*I - i*(x*sx + y*sy + z*sz) with w^2+x^2+y^2+z^2 = 1. Products of
// step unitaries stay in this form; complex 2x2 matrices are materialized
// only at API boundaries.

#include <cmath>
#include <complex>

namespace stq {

struct Su2 {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static Su2 identity() { return {}; }

  Su2 dagger() const { return {w, -x, -y, -z}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Su2 normalized() const {
    double inv = 1.0 / norm();
    return {w * inv, x * inv, y * inv, z * inv};
  }

  // |Tr(a^dag b)|^2 / 4 for SU(2) reduces to the squared 4-vector dot.
  friend double su2_fidelity(const Su2& a, const Su2& b) {
    double d = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    return d * d;
  }
};

// Matrix product a*b (apply b first).
inline Su2 compose(const Su2& a, const Su2& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + b.w * a.x + a.y * b.z - a.z * b.y,
          a.w * b.y + b.w * a.y + a.z * b.x - a.x * b.z,
          a.w * b.z + b.w * a.z + a.x * b.y - a.y * b.x};
}

struct Unitary2 {
  std::complex<double> m00{1.0, 0.0}, m01{0.0, 0.0}, m10{0.0, 0.0}, m11{1.0, 0.0};

  static Unitary2 from_su2(const Su2& q) {
    return {{q.w, -q.z}, {-q.y, -q.x}, {q.y, -q.x}, {q.w, q.z}};
  }

  Unitary2 dagger() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }

  friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  }

  // max-norm of U^dag U - 1
  double unitarity_deviation() const {
    Unitary2 p = dagger() * (*this);
    double d = 0.0;
    d = std::max(d, std::abs(p.m00 - 1.0));
    d = std::max(d, std::abs(p.m11 - 1.0));
    d = std::max(d, std::abs(p.m01));
    d = std::max(d, std::abs(p.m10));
    return d;
  }
};

// |Tr(target^dag actual)|^2 / 4, valid for any pair of 2x2 unitaries.
inline double gate_fidelity(const Unitary2& target, const Unitary2& actual) {
  std::complex<double> tr =
      std::conj(target.m00) * actual.m00 + std::conj(target.m10) * actual.m10 +
      std::conj(target.m01) * actual.m01 + std::conj(target.m11) * actual.m11;
  return std::norm(tr) / 4.0;
}

enum class BasisState { zero, one, plus, minus };

// |<target|U|prepared>|^2
double survival_probability(const Unitary2& u, BasisState prepared, BasisState target);
double survival_probability(const Su2& u, BasisState prepared, BasisState target);

}  // namespace stq
