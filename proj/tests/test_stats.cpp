// Statistics-layer tests: K-S statistic against a brute-force oracle,
// threshold conventions, error grids, and the type I/II tradeoff.

#include <cmath>
#include <stdexcept>
#include <random>

#include "doctest.h"
#include "stq/fitting.hpp"
#include "stq/stats.hpp"

using namespace stq;

namespace {

// Brute-force oracle in exact integer arithmetic: evaluate
// |#(a <= x) * m - #(b <= x) * n| at every merged point.
double ks_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> grid = a;
  grid.insert(grid.end(), b.begin(), b.end());
  int64_t n = static_cast<int64_t>(a.size()), m = static_cast<int64_t>(b.size());
  int64_t best = 0;
  for (double x : grid) {
    int64_t ca = 0, cb = 0;
    for (double v : a) ca += v <= x;
    for (double v : b) cb += v <= x;
    best = std::max(best, std::abs(ca * m - cb * n));
  }
  return static_cast<double>(best) / static_cast<double>(n * m);
}

}  // namespace

TEST_CASE("ECDF is right-continuous, nondecreasing and in [0, 1]") {
  ECDF f({3.0, 1.0, 2.0, 2.0});
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == doctest::Approx(0.25));
  CHECK(f(2.0) == doctest::Approx(0.75));  // both ties counted at the jump
  CHECK(f(2.999) == doctest::Approx(0.75));
  CHECK(f(3.0) == 1.0);
  CHECK(f(99.0) == 1.0);
  CHECK_THROWS_AS(ECDF({}), std::invalid_argument);
}

TEST_CASE("ks_statistic closed cases") {
  std::vector<double> a = {1.0, 2.0, 3.0};
  CHECK(ks_statistic(a, a) == 0.0);
  std::vector<double> lo = {1.0, 2.0}, hi = {5.0, 6.0, 7.0};
  CHECK(ks_statistic(lo, hi) == 1.0);
  std::vector<double> b = {2.0, 3.0, 4.0};
  CHECK(ks_statistic(a, b) == doctest::Approx(1.0 / 3.0));
  std::vector<double> empty;
  CHECK_THROWS_AS(ks_statistic(a, empty), std::invalid_argument);
}

TEST_CASE("ks_statistic equals the brute-force oracle exactly on random pairs") {
  std::mt19937_64 gen(515);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_int_distribution<int> val(0, 12);  // many ties
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(len(gen)), b(len(gen));
    for (auto& x : a) x = val(gen) * 0.25;
    for (auto& x : b) x = val(gen) * 0.25;
    CHECK(ks_statistic(a, b) == ks_oracle(a, b));
  }
}

TEST_CASE("ks_statistic is symmetric and satisfies the triangle-like bound") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(17), b(23), c(11);
    for (auto& x : a) x = nd(gen);
    for (auto& x : b) x = nd(gen) + 0.3;
    for (auto& x : c) x = nd(gen) - 0.2;
    double dab = ks_statistic(a, b);
    CHECK(dab == ks_statistic(b, a));
    CHECK(ks_statistic(a, c) <= dab + ks_statistic(b, c) + 1e-15);
  }
}

TEST_CASE("threshold uses the nearest-rank convention") {
  CHECK(threshold({0.1, 0.2, 0.3, 0.4}, 75.0) == 0.3);
  CHECK(threshold({0.4, 0.1, 0.3, 0.2}, 100.0) == 0.4);
  CHECK(threshold({0.5}, 75.0) == 0.5);
  CHECK_THROWS_AS(threshold({}, 75.0), std::invalid_argument);
}

TEST_CASE("error_grid: diagonal follows 1 - p/100 by construction") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<ModelDatasets> data(1);
  data[0].model_id = "m";
  for (int s = 0; s < 24; ++s) {
    std::vector<double> v(40);
    for (auto& x : v) x = nd(gen);
    data[0].per_seed.push_back(v);
  }
  KSGrid grid = error_grid(data, 75.0);
  // 276 self pairs, threshold at nearest-rank 207 -> alpha = 69/276
  CHECK(grid.alpha[0] == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("error_grid: same distribution under two ids gives beta ~ 1 - alpha") {
  std::mt19937_64 gen(81);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<ModelDatasets> data(2);
  data[0].model_id = "a";
  data[1].model_id = "b";
  for (int s = 0; s < 30; ++s) {
    for (int m = 0; m < 2; ++m) {
      std::vector<double> v(50);
      for (auto& x : v) x = nd(gen);
      data[m].per_seed.push_back(v);
    }
  }
  KSGrid grid = error_grid(data, 75.0);
  CHECK(grid.beta[0][1] == doctest::Approx(1.0 - grid.alpha[0]).epsilon(0.12));
  CHECK(grid.beta[1][0] == doctest::Approx(1.0 - grid.alpha[1]).epsilon(0.12));
}

TEST_CASE("error_grid: point masses at distinct values are fully discriminated") {
  std::vector<ModelDatasets> data(2);
  data[0].model_id = "lo";
  data[1].model_id = "hi";
  for (int s = 0; s < 4; ++s) {
    data[0].per_seed.push_back(std::vector<double>(10, 0.1));
    data[1].per_seed.push_back(std::vector<double>(10, 0.9));
  }
  KSGrid grid = error_grid(data, 75.0);
  CHECK(grid.beta[0][1] == 0.0);
  CHECK(grid.beta[1][0] == 0.0);
  CHECK(grid.thresholds[0] == 0.0);  // identical self-samples
}

TEST_CASE("error_grid rejects single-seed models") {
  std::vector<ModelDatasets> data(1);
  data[0].model_id = "m";
  data[0].per_seed.push_back({1.0, 2.0});
  CHECK_THROWS_AS(error_grid(data, 75.0), std::invalid_argument);
}

TEST_CASE("type I/II tradeoff: larger p_x never decreases beta (exact property)") {
  std::mt19937_64 gen(3111);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<ModelDatasets> data(3);
  for (int m = 0; m < 3; ++m) {
    data[m].model_id = "m" + std::to_string(m);
    for (int s = 0; s < 12; ++s) {
      std::vector<double> v(30);
      for (auto& x : v) x = nd(gen) + 0.4 * m;
      data[m].per_seed.push_back(v);
    }
  }
  KSGrid g60 = error_grid(data, 60.0);
  KSGrid g75 = error_grid(data, 75.0);
  KSGrid g90 = error_grid(data, 90.0);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(g60.thresholds[j] <= g75.thresholds[j]);
    CHECK(g75.thresholds[j] <= g90.thresholds[j]);
    for (std::size_t jp = 0; jp < 3; ++jp) {
      if (j == jp) continue;
      CHECK(g60.beta[j][jp] <= g75.beta[j][jp]);
      CHECK(g75.beta[j][jp] <= g90.beta[j][jp]);
    }
  }
}

TEST_CASE("cross-pair subsampling is deterministic and bounded") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<ModelDatasets> data(2);
  data[0].model_id = "a";
  data[1].model_id = "b";
  for (int s = 0; s < 10; ++s) {
    for (int m = 0; m < 2; ++m) {
      std::vector<double> v(20);
      for (auto& x : v) x = nd(gen) + m;
      data[m].per_seed.push_back(v);
    }
  }
  KSGrid g1 = error_grid(data, 75.0, "r", 40, 9);
  KSGrid g2 = error_grid(data, 75.0, "r", 40, 9);
  CHECK(g1.beta[0][1] == g2.beta[0][1]);
}

TEST_CASE("per-circuit grids: identical circuits collapse best = median = worst") {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<ModelDatasets> base(2);
  base[0].model_id = "a";
  base[1].model_id = "b";
  for (int s = 0; s < 8; ++s) {
    for (int m = 0; m < 2; ++m) {
      std::vector<double> v(25);
      for (auto& x : v) x = nd(gen) + 0.8 * m;
      base[m].per_seed.push_back(v);
    }
  }
  std::vector<std::vector<ModelDatasets>> per_circuit(5, base);
  PerCircuitGrids grids = per_circuit_grid(per_circuit, 75.0);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t jp = 0; jp < 2; ++jp) {
      CHECK(grids.best.beta[j][jp] == grids.median.beta[j][jp]);
      CHECK(grids.median.beta[j][jp] == grids.worst.beta[j][jp]);
    }
}

TEST_CASE("per-circuit grids: best <= median <= worst cellwise") {
  std::mt19937_64 gen(13);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::vector<ModelDatasets>> per_circuit;
  for (int c = 0; c < 7; ++c) {
    std::vector<ModelDatasets> data(2);
    data[0].model_id = "a";
    data[1].model_id = "b";
    for (int s = 0; s < 8; ++s) {
      for (int m = 0; m < 2; ++m) {
        std::vector<double> v(25);
        for (auto& x : v) x = nd(gen) + (0.2 + 0.1 * c) * m;
        data[m].per_seed.push_back(v);
      }
    }
    per_circuit.push_back(std::move(data));
  }
  PerCircuitGrids grids = per_circuit_grid(per_circuit, 75.0);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t jp = 0; jp < 2; ++jp) {
      CHECK(grids.best.beta[j][jp] <= grids.median.beta[j][jp]);
      CHECK(grids.median.beta[j][jp] <= grids.worst.beta[j][jp]);
    }
}

TEST_CASE("per-circuit grids reject unshared circuits") {
  std::vector<ModelDatasets> a(1), b(2);
  a[0].model_id = "x";
  a[0].per_seed = {{1.0}, {2.0}};
  b[0].model_id = "x";
  b[0].per_seed = {{1.0}, {2.0}};
  b[1].model_id = "y";
  b[1].per_seed = {{1.0}, {2.0}};
  std::vector<std::vector<ModelDatasets>> per_circuit = {a, b};
  CHECK_THROWS_AS(per_circuit_grid(per_circuit, 75.0), std::invalid_argument);
}
