#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sprint/core.hpp"

namespace sprint::binning {

/// Fits quantile cut points with the nearest-rank percentile method at
/// 100*i/n_bins for i = 1..n_bins-1. Duplicate cut points collapse, so the
/// resulting bin count may be below n_bins; a constant feature collapses to
/// a single bin. Throws FitError on empty input, DataError on non-finite
/// values.
NumericalBins fit_quantile_bins(const std::vector<double>& values,
                                std::size_t n_bins = 10);

/// Gives the max_categories-1 most frequent tokens their own bin (ties by
/// lexicographic token order) and reserves the last bin for everything else,
/// seen or unseen. Throws FitError on empty input.
CategoricalBins fit_categorical_bins(const std::vector<std::string>& categories,
                                     std::size_t max_categories);

/// Maps a raw value to its bin index. Numerical intervals are right-open
/// with clamping on both ends; categorical lookups fall back to the overflow
/// bin. Throws DataError on NaN or on a value kind that does not match the
/// entry.
std::size_t lookup(const FeatureValue& value, const BinningEntry& entry);

std::size_t lookup_numerical(double value, const NumericalBins& bins);
std::size_t lookup_categorical(const std::string& token,
                               const CategoricalBins& bins);

}  // namespace sprint::binning
