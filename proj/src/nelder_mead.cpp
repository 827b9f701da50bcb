#include "stq/nelder_mead.hpp"

#include <algorithm>
#include <cmath>

namespace stq {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, std::span<const double> step,
                             double ftol, double xtol, int max_evals) {
  const std::size_t d = x0.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> xs(d + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> fs(d + 1);
  for (std::size_t i = 0; i < d; ++i) xs[i + 1][i] += step[i];

  int evals = 0;
  for (std::size_t i = 0; i <= d; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);

  while (evals < max_evals) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::size_t best = order[0], worst = order[d], second_worst = order[d - 1];

    double spread = std::abs(fs[worst] - fs[best]);
    double size = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      size = std::max(size, std::abs(xs[worst][i] - xs[best][i]));
    if (spread <= ftol && size <= xtol) break;

    for (std::size_t i = 0; i < d; ++i) {
      double c = 0.0;
      for (std::size_t j = 0; j <= d; ++j)
        if (j != worst) c += xs[j][i];
      centroid[i] = c / static_cast<double>(d);
    }

    for (std::size_t i = 0; i < d; ++i) xr[i] = centroid[i] + alpha * (centroid[i] - xs[worst][i]);
    double fr = f(xr);
    ++evals;

    if (fr < fs[best]) {
      for (std::size_t i = 0; i < d; ++i) xe[i] = centroid[i] + gamma * (xr[i] - centroid[i]);
      double fe = f(xe);
      ++evals;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    // contraction (outside when fr beats the worst, else inside)
    const std::vector<double>& toward = (fr < fs[worst]) ? xr : xs[worst];
    for (std::size_t i = 0; i < d; ++i) xc[i] = centroid[i] + rho * (toward[i] - centroid[i]);
    double fc = f(xc);
    ++evals;
    if (fc < std::min(fr, fs[worst])) {
      xs[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t j = 0; j <= d; ++j) {
      if (j == best) continue;
      for (std::size_t i = 0; i < d; ++i)
        xs[j][i] = xs[best][i] + sigma * (xs[j][i] - xs[best][i]);
      fs[j] = f(xs[j]);
      ++evals;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fs[i] < fs[best]) best = i;
  return {xs[best], fs[best], evals};
}

}  // namespace stq
