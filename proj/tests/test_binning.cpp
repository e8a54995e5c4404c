#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sprint/binning.hpp"
#include "sprint/core.hpp"

using namespace sprint;
using namespace sprint::binning;

namespace {

// Nearest-rank reference, written independently of the implementation:
// the i-th cut is the element of rank ceil(i * N / n_bins), 1-indexed,
// then duplicates collapse.
std::vector<double> reference_cuts(std::vector<double> values,
                                   std::size_t n_bins) {
  std::sort(values.begin(), values.end());
  if (values.front() == values.back()) return {};
  std::vector<double> cuts;
  const std::size_t n = values.size();
  for (std::size_t i = 1; i < n_bins; ++i) {
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(static_cast<double>(i * n) /
                                           static_cast<double>(n_bins)));
    cuts.push_back(values[rank - 1]);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace

TEST_CASE("quintiles of 1..10 sit at 2, 4, 6, 8") {
  const NumericalBins bins =
      fit_quantile_bins({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 5);
  CHECK(bins.cut_points == std::vector<double>{2, 4, 6, 8});
  CHECK(bins.bin_count() == 5);
}

TEST_CASE("a constant feature collapses to a single bin") {
  const NumericalBins bins = fit_quantile_bins({7, 7, 7, 7}, 10);
  CHECK(bins.cut_points.empty());
  CHECK(bins.bin_count() == 1);
}

TEST_CASE("two values at two bins split on the smaller one") {
  const NumericalBins bins = fit_quantile_bins({0, 100}, 2);
  CHECK(bins.cut_points == std::vector<double>{0});
}

TEST_CASE("quantile fitting rejects empty and non-finite input") {
  CHECK_THROWS_AS(fit_quantile_bins({}, 4), FitError);
  CHECK_THROWS_AS(fit_quantile_bins({1.0, std::nan("")}, 4), DataError);
  CHECK_THROWS_AS(fit_quantile_bins({1.0}, 0), FitError);
}

TEST_CASE("fitted cuts are invariant under input permutation") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 3.0);
  std::vector<double> values(257);
  for (double& v : values) v = dist(rng);
  const NumericalBins fitted = fit_quantile_bins(values, 8);
  std::shuffle(values.begin(), values.end(), rng);
  const NumericalBins refitted = fit_quantile_bins(values, 8);
  CHECK(fitted.cut_points == refitted.cut_points);
}

TEST_CASE("fitted cuts match the nearest-rank reference on random data") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> small(0, 9);
  std::uniform_real_distribution<double> wide(-50.0, 50.0);
  std::uniform_int_distribution<std::size_t> n_bins(1, 12);
  std::uniform_int_distribution<std::size_t> n_values(1, 200);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(n_values(rng));
    const bool heavy_ties = trial % 2 == 0;
    for (double& v : values) {
      v = heavy_ties ? static_cast<double>(small(rng)) : wide(rng);
    }
    const std::size_t bins = n_bins(rng);
    const NumericalBins fitted = fit_quantile_bins(values, bins);
    CHECK(fitted.cut_points == reference_cuts(values, bins));
  }
}

TEST_CASE("categorical fitting keeps frequent tokens and reserves overflow") {
  const CategoricalBins bins = fit_categorical_bins({"a", "a", "b"}, 10);
  CHECK(bins.bin_count() == 3);
  CHECK(bins.find("a") == std::size_t{0});
  CHECK(bins.find("b") == std::size_t{1});
  CHECK(bins.overflow_bin() == 2);
  CHECK(!bins.find("c").has_value());
}

TEST_CASE("rare tokens fall off the map when the budget is tight") {
  const CategoricalBins bins =
      fit_categorical_bins({"a", "a", "b", "b", "c"}, 3);
  CHECK(bins.bin_count() == 3);
  CHECK(bins.find("a").has_value());
  CHECK(bins.find("b").has_value());
  CHECK(!bins.find("c").has_value());
}

TEST_CASE("count ties break on the lexically smaller token") {
  const CategoricalBins bins = fit_categorical_bins({"z", "m", "z", "m"}, 2);
  CHECK(bins.find("m").has_value());
  CHECK(!bins.find("z").has_value());
}

TEST_CASE("numerical lookup uses right-open intervals with clamping") {
  const NumericalBins bins{{0.0, 1.0, 2.0}};
  CHECK(lookup_numerical(1.5, bins) == 2);
  CHECK(lookup_numerical(-5.0, bins) == 0);
  CHECK(lookup_numerical(2.0, bins) == 3);
  CHECK(lookup_numerical(0.0, bins) == 1);
  CHECK(lookup_numerical(1e18, bins) == 3);
  CHECK_THROWS_AS(lookup_numerical(std::nan(""), bins), DataError);
}

TEST_CASE("categorical lookup sends unseen tokens to overflow") {
  const CategoricalBins bins = fit_categorical_bins({"a", "b"}, 5);
  CHECK(lookup_categorical("a", bins) == 0);
  CHECK(lookup_categorical("never seen", bins) == bins.overflow_bin());
}

TEST_CASE("lookup rejects a token for a numerical feature and vice versa") {
  BinningEntry numeric{NumericalBins{{0.0}}};
  BinningEntry tokens{fit_categorical_bins({"a"}, 4)};
  CHECK_THROWS_AS(lookup(FeatureValue(std::string("a")), numeric), DataError);
  CHECK_THROWS_AS(lookup(FeatureValue(1.0), tokens), DataError);
  CHECK(lookup(FeatureValue(0.5), numeric) == 1);
  CHECK(lookup(FeatureValue(std::string("a")), tokens) == 0);
}
