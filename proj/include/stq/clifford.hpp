#pragma once

// The 24-element single-qubit Clifford quotient group, rebuilt by
// breadth-first closure over words in {X(+-pi/2), Z(+-pi/2)} modulo global
// phase. Representative words are the shortest found, lexicographic in the
// generator ids on ties. Product and inverse tables are verified against
// matrix arithmetic.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stq/pulse.hpp"
#include "stq/su2.hpp"

namespace stq {

struct CliffordElement {
  int index = 0;
  Su2 su2;           // one SU(2) representative of the +-pair
  Unitary2 matrix;   // phase-normalized: first nonzero entry real positive
  std::vector<GeneratorId> word;  // time-ordered generator sequence
};

class CliffordGroup {
 public:
  // tol: phase-equivalence comparator threshold, U ~ V iff
  // |Tr(U^dag V)|^2/4 > 1 - tol. Throws when closure does not yield 24.
  static CliffordGroup build(double tol = 1e-9);

  int size() const { return static_cast<int>(elements_.size()); }
  const CliffordElement& element(int i) const { return elements_.at(i); }
  int identity_index() const { return 0; }

  int product(int a, int b) const { return product_[a][b]; }  // class of U_a U_b
  int inverse(int a) const { return inverse_[a]; }

  // class index of u, or -1 when not equivalent to any element
  int find_class(const Su2& u) const;

  // full consistency check: table vs matrices, associativity, inverses
  void verify() const;

 private:
  double tol_ = 1e-9;
  std::vector<CliffordElement> elements_;
  std::vector<std::array<int, 24>> product_;
  std::vector<int> inverse_;
};

}  // namespace stq
