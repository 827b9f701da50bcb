#pragma once

// Compact deterministic Nelder-Mead simplex. Standard reflection/expansion/
// contraction/shrink coefficients; terminates on function spread, simplex
// size, or evaluation budget.

#include <functional>
#include <span>
#include <vector>

namespace stq {

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int evals = 0;
};

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, std::span<const double> step,
                             double ftol, double xtol, int max_evals);

}  // namespace stq
