#include "sprint/binning.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sprint::binning {

NumericalBins fit_quantile_bins(const std::vector<double>& values,
                                std::size_t n_bins) {
  if (values.empty()) {
    throw FitError("fit_quantile_bins: empty input");
  }
  if (n_bins < 1) {
    throw FitError("fit_quantile_bins: n_bins must be >= 1");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError("fit_quantile_bins: non-finite value at row " +
                      std::to_string(i));
    }
  }

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  NumericalBins out;
  if (sorted.front() == sorted.back()) {
    return out;  // constant feature: one bin, no cuts
  }

  const std::size_t n = sorted.size();
  for (std::size_t i = 1; i < n_bins; ++i) {
    // nearest-rank percentile: rank = ceil(i*n/n_bins), exact in integers
    std::size_t rank = (i * n + n_bins - 1) / n_bins;
    rank = std::max<std::size_t>(rank, 1);
    out.cut_points.push_back(sorted[rank - 1]);
  }
  out.cut_points.erase(
      std::unique(out.cut_points.begin(), out.cut_points.end()),
      out.cut_points.end());
  return out;
}

CategoricalBins fit_categorical_bins(const std::vector<std::string>& categories,
                                     std::size_t max_categories) {
  if (categories.empty()) {
    throw FitError("fit_categorical_bins: empty input");
  }
  if (max_categories < 1) {
    throw FitError("fit_categorical_bins: max_categories must be >= 1");
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& c : categories) ++counts[c];

  // count desc, token asc
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });

  const std::size_t kept = std::min(ranked.size(), max_categories - 1);
  CategoricalBins out;
  out.token_bins.reserve(kept);
  for (std::size_t i = 0; i < kept; ++i) {
    out.token_bins.emplace_back(ranked[i].first, i);
  }
  std::sort(out.token_bins.begin(), out.token_bins.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::size_t lookup_numerical(double value, const NumericalBins& bins) {
  if (std::isnan(value)) {
    throw DataError("lookup: NaN value");
  }
  // bin index = number of cut points <= value
  auto it = std::upper_bound(bins.cut_points.begin(), bins.cut_points.end(),
                             value);
  return static_cast<std::size_t>(it - bins.cut_points.begin());
}

std::size_t lookup_categorical(const std::string& token,
                               const CategoricalBins& bins) {
  if (auto hit = bins.find(token)) return *hit;
  return bins.overflow_bin();
}

std::size_t lookup(const FeatureValue& value, const BinningEntry& entry) {
  if (entry.is_numerical()) {
    const double* x = std::get_if<double>(&value);
    if (x == nullptr) {
      throw DataError("lookup: category token given for a numerical feature");
    }
    return lookup_numerical(*x, entry.numerical());
  }
  const std::string* token = std::get_if<std::string>(&value);
  if (token == nullptr) {
    throw DataError("lookup: numeric value given for a categorical feature");
  }
  return lookup_categorical(*token, entry.categorical());
}

}  // namespace sprint::binning
