#pragma once

// Small deterministic numeric utilities shared by the calibration, RB-fit
// and statistics modules.

#include <functional>
#include <span>
#include <vector>

namespace stq {

// Brent's method, minimum of f on [a, b] to absolute tolerance xtol.
double brent_minimize(const std::function<double(double)>& f, double a, double b,
                      double xtol, int max_iter = 200);

// Bisection root of f on [lo, hi] (f(lo), f(hi) opposite signs) to relative
// tolerance rel_tol on the abscissa.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double rel_tol, int max_iter = 200);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

// Nearest-rank percentile: rank = ceil(p/100 * n), 1-based, clamped.
double percentile_nearest_rank(std::vector<double> values, double p);
// Same on data the caller has already sorted ascending.
double percentile_nearest_rank_sorted(std::span<const double> sorted, double p);

// Indices that sort `values` ascending; ties keep the lower index first.
std::vector<std::size_t> argsort(std::span<const double> values);

}  // namespace stq
