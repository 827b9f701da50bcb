#include "stq/clifford.hpp"

#include <cmath>

namespace stq {

namespace {

Unitary2 phase_normalize(const Unitary2& u) {
  const std::complex<double>* entries[4] = {&u.m00, &u.m01, &u.m10, &u.m11};
  for (const auto* e : entries) {
    if (std::abs(*e) > 1e-9) {
      std::complex<double> phase = *e / std::abs(*e);
      std::complex<double> corr = std::conj(phase);
      return {u.m00 * corr, u.m01 * corr, u.m10 * corr, u.m11 * corr};
    }
  }
  return u;
}

}  // namespace

int CliffordGroup::find_class(const Su2& u) const {
  for (const auto& e : elements_)
    if (su2_fidelity(e.su2, u) > 1.0 - tol_) return e.index;
  return -1;
}

CliffordGroup CliffordGroup::build(double tol) {
  CliffordGroup g;
  g.tol_ = tol;

  const std::array<GeneratorId, 4> alphabet = {GeneratorId::x_p90, GeneratorId::x_m90,
                                               GeneratorId::z_p90, GeneratorId::z_m90};

  CliffordElement identity;
  identity.index = 0;
  identity.su2 = Su2::identity();
  identity.matrix = phase_normalize(Unitary2::from_su2(identity.su2));
  g.elements_.push_back(identity);

  // BFS over words; children visited in generator-id order, so the first
  // word reaching a class is shortest and lexicographically least.
  for (std::size_t head = 0; head < g.elements_.size(); ++head) {
    if (g.elements_.size() > 24) break;
    CliffordElement parent = g.elements_[head];  // copy: push_back invalidates refs
    for (GeneratorId gen : alphabet) {
      Su2 u = compose(generator_target(gen), parent.su2);  // gen applied after
      if (g.find_class(u) >= 0) continue;
      CliffordElement e;
      e.index = static_cast<int>(g.elements_.size());
      e.su2 = u;
      e.matrix = phase_normalize(Unitary2::from_su2(u));
      e.word = parent.word;
      e.word.push_back(gen);
      g.elements_.push_back(std::move(e));
    }
  }

  if (g.elements_.size() != 24)
    throw std::logic_error("Clifford closure yielded " + std::to_string(g.elements_.size()) +
                           " classes (phase-equivalence comparator is broken)");

  g.product_.resize(24);
  g.inverse_.assign(24, -1);
  for (int a = 0; a < 24; ++a) {
    for (int b = 0; b < 24; ++b) {
      int c = g.find_class(compose(g.elements_[a].su2, g.elements_[b].su2));
      if (c < 0) throw std::logic_error("Clifford product escaped the closure");
      g.product_[a][b] = c;
    }
    g.inverse_[a] = g.find_class(g.elements_[a].su2.dagger());
    if (g.inverse_[a] < 0) throw std::logic_error("Clifford inverse escaped the closure");
  }
  g.verify();
  return g;
}

void CliffordGroup::verify() const {
  // table products match matrix arithmetic up to phase
  for (int a = 0; a < 24; ++a) {
    for (int b = 0; b < 24; ++b) {
      Su2 direct = compose(elements_[a].su2, elements_[b].su2);
      if (su2_fidelity(direct, elements_[product_[a][b]].su2) < 1.0 - 1e-10)
        throw std::logic_error("product table mismatch");
    }
  }
  // associativity on the table over all triples
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b)
      for (int c = 0; c < 24; ++c)
        if (product_[product_[a][b]][c] != product_[a][product_[b][c]])
          throw std::logic_error("product table not associative");
  // unique two-sided inverse
  for (int a = 0; a < 24; ++a) {
    if (product_[a][inverse_[a]] != 0 || product_[inverse_[a]][a] != 0)
      throw std::logic_error("inverse table mismatch");
    int count = 0;
    for (int b = 0; b < 24; ++b)
      if (product_[a][b] == 0) ++count;
    if (count != 1) throw std::logic_error("non-unique inverse");
  }
}

}  // namespace stq
