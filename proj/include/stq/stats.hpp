#pragma once

// eCDFs, the two-sample Kolmogorov-Smirnov statistic, percentile thresholds,
// and empirical type I/II error-rate grids over (model, seed) datasets.
//
// D is computed exactly: with sorted samples the sup of |F_A - F_B| is
// attained at a merged jump point, and |i*m - j*n| over the merge walk gives
// the numerator as an integer, so oracle comparisons can be exact.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stq {

struct MetricDataset {
  std::string metric;
  std::string model_id;
  uint64_t seed = 0;
  std::vector<double> values;
};

class ECDF {
 public:
  explicit ECDF(std::vector<double> values);
  // right-continuous F(x) = #(values <= x) / n
  double operator()(double x) const;
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

double ks_statistic(std::span<const double> a, std::span<const double> b);
double ks_statistic(const MetricDataset& a, const MetricDataset& b);

// Nearest-rank percentile of the self-distance set {D_jj,ss'}_{s<s'}.
double threshold(std::vector<double> self_distances, double p_x);

struct KSGrid {
  std::string metric;
  double p_x = 75.0;
  std::vector<std::string> models;
  std::vector<double> thresholds;            // d_j per model
  std::vector<double> alpha;                 // diagonal: P(D > d_j | same model)
  std::vector<std::vector<double>> beta;     // beta[j][j']: row j = reference
};

// One entry per model: that model's per-seed sample vectors.
struct ModelDatasets {
  std::string model_id;
  std::vector<std::vector<double>> per_seed;
};

// Self pairs use s < s' only; cross pairs are all ordered (s, s') pairs with
// row j as reference. cross_subsample (when set) caps the number of cross
// pairs per cell, chosen deterministically from `subsample_seed`.
KSGrid error_grid(const std::vector<ModelDatasets>& datasets, double p_x,
                  const std::string& metric = "r",
                  std::optional<std::size_t> cross_subsample = std::nullopt,
                  uint64_t subsample_seed = 0);

struct PerCircuitGrids {
  KSGrid best;    // cellwise 0th percentile over circuits
  KSGrid median;  // 50th
  KSGrid worst;   // 100th
};

// Cellwise percentiles across per-circuit grids; every circuit must carry
// the same model list and seed counts (circuits are shared across models).
PerCircuitGrids per_circuit_grid(const std::vector<std::vector<ModelDatasets>>& per_circuit,
                                 double p_x);

// Successive differences r_{i+1} - r_i.
std::vector<double> delta_metric(std::span<const double> series);

}  // namespace stq
