#include "stq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stq/fitting.hpp"
#include "stq/rng.hpp"

namespace stq {

ECDF::ECDF(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw std::invalid_argument("ECDF of empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double ECDF::operator()(double x) const {
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty dataset");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const int64_t n = static_cast<int64_t>(sa.size()), m = static_cast<int64_t>(sb.size());
  int64_t i = 0, j = 0, best = 0;
  while (i < n || j < m) {
    double x = (i < n && (j >= m || sa[i] <= sb[j])) ? sa[static_cast<std::size_t>(i)]
                                                     : sb[static_cast<std::size_t>(j)];
    while (i < n && sa[static_cast<std::size_t>(i)] == x) ++i;
    while (j < m && sb[static_cast<std::size_t>(j)] == x) ++j;
    best = std::max(best, std::abs(i * m - j * n));
  }
  return static_cast<double>(best) / static_cast<double>(n * m);
}

double ks_statistic(const MetricDataset& a, const MetricDataset& b) {
  return ks_statistic(std::span<const double>(a.values), std::span<const double>(b.values));
}

double threshold(std::vector<double> self_distances, double p_x) {
  if (self_distances.empty())
    throw std::invalid_argument("threshold: needs at least one self pair (>= 2 seeds)");
  return percentile_nearest_rank(std::move(self_distances), p_x);
}

KSGrid error_grid(const std::vector<ModelDatasets>& datasets, double p_x,
                  const std::string& metric, std::optional<std::size_t> cross_subsample,
                  uint64_t subsample_seed) {
  const std::size_t n_models = datasets.size();
  KSGrid grid;
  grid.metric = metric;
  grid.p_x = p_x;
  grid.thresholds.resize(n_models);
  grid.alpha.resize(n_models);
  grid.beta.assign(n_models, std::vector<double>(n_models, 0.0));
  for (const auto& d : datasets) {
    if (d.per_seed.size() < 2)
      throw std::invalid_argument("error_grid: need >= 2 seeds per model");
    grid.models.push_back(d.model_id);
  }

  for (std::size_t j = 0; j < n_models; ++j) {
    const auto& seeds = datasets[j].per_seed;
    std::vector<double> self_d;
    for (std::size_t s = 0; s < seeds.size(); ++s)
      for (std::size_t t = s + 1; t < seeds.size(); ++t)
        self_d.push_back(ks_statistic(seeds[s], seeds[t]));
    double d_j = threshold(self_d, p_x);
    grid.thresholds[j] = d_j;
    std::size_t over = 0;
    for (double d : self_d)
      if (d > d_j) ++over;
    grid.alpha[j] = static_cast<double>(over) / static_cast<double>(self_d.size());

    for (std::size_t jp = 0; jp < n_models; ++jp) {
      if (jp == j) {
        grid.beta[j][jp] = grid.alpha[j];
        continue;
      }
      const auto& other = datasets[jp].per_seed;
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      pairs.reserve(seeds.size() * other.size());
      for (std::size_t s = 0; s < seeds.size(); ++s)
        for (std::size_t t = 0; t < other.size(); ++t) pairs.emplace_back(s, t);
      if (cross_subsample && pairs.size() > *cross_subsample) {
        // deterministic partial Fisher-Yates from the subsample stream
        PhiloxKey key = derive_key(subsample_seed,
                                   {static_cast<uint64_t>(StreamPurpose::validate_subsample),
                                    static_cast<uint64_t>(j), static_cast<uint64_t>(jp)});
        uint64_t cursor = 0;
        for (std::size_t k = 0; k < *cross_subsample; ++k) {
          std::size_t pick =
              k + uniform_below(key, cursor, static_cast<uint32_t>(pairs.size() - k));
          std::swap(pairs[k], pairs[pick]);
        }
        pairs.resize(*cross_subsample);
      }
      std::size_t within = 0;
      for (auto [s, t] : pairs)
        if (ks_statistic(seeds[s], other[t]) <= d_j) ++within;
      grid.beta[j][jp] = static_cast<double>(within) / static_cast<double>(pairs.size());
    }
  }
  return grid;
}

PerCircuitGrids per_circuit_grid(const std::vector<std::vector<ModelDatasets>>& per_circuit,
                                 double p_x) {
  if (per_circuit.empty()) throw std::invalid_argument("per_circuit_grid: no circuits");
  std::vector<KSGrid> grids;
  for (const auto& datasets : per_circuit) {
    if (datasets.size() != per_circuit.front().size())
      throw std::invalid_argument("per_circuit_grid: circuits not shared across models");
    for (std::size_t j = 0; j < datasets.size(); ++j) {
      if (datasets[j].model_id != per_circuit.front()[j].model_id ||
          datasets[j].per_seed.size() != per_circuit.front()[j].per_seed.size())
        throw std::invalid_argument("per_circuit_grid: circuits not shared across models");
    }
    grids.push_back(error_grid(datasets, p_x, "per_circuit_bitflip"));
  }

  auto cellwise = [&](double pct) {
    KSGrid out = grids.front();
    std::size_t n = out.models.size();
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> alphas, ds;
      for (const auto& g : grids) {
        alphas.push_back(g.alpha[j]);
        ds.push_back(g.thresholds[j]);
      }
      out.alpha[j] = percentile_nearest_rank(alphas, pct);
      out.thresholds[j] = percentile_nearest_rank(ds, pct);
      for (std::size_t jp = 0; jp < n; ++jp) {
        std::vector<double> betas;
        for (const auto& g : grids) betas.push_back(g.beta[j][jp]);
        out.beta[j][jp] = percentile_nearest_rank(betas, pct);
      }
    }
    return out;
  };
  return {cellwise(0.0), cellwise(50.0), cellwise(100.0)};
}

std::vector<double> delta_metric(std::span<const double> series) {
  if (series.size() < 2)
    throw std::invalid_argument("delta_metric: need at least 2 passes");
  std::vector<double> d(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) d[i] = series[i + 1] - series[i];
  return d;
}

}  // namespace stq
