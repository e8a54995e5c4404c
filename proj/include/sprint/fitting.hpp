#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sprint/binning.hpp"
#include "sprint/core.hpp"

namespace sprint::fitting {

struct FitOptions {
  std::size_t n_bins = 10;          // quantile count for numerical features
  std::size_t max_categories = 10;  // categorical bins, overflow included
  double train_fraction = 1.0;      // leading share of events used for fitting
  std::optional<double> train_cutoff;  // timestamp bound; overrides fraction
};

struct FitReport {
  BinningSpec binning;
  std::size_t events_used = 0;
  std::vector<std::size_t> bins_per_feature;
  std::vector<std::string> warnings;
};

/// Fits bins for every schema feature on the training prefix. Edge features
/// are read straight off the events; derived features are collected by
/// replaying the prefix's degree counters and inter-event gaps, so their
/// bins are fitted on exactly the values the engine would bin later (the
/// degree timescale matters, hence the DiscountConfig). Throws FitError
/// when the prefix is empty or some feature has no observed values.
FitReport fit_bins(std::span<const EdgeEvent> events,
                   const FeatureSchema& schema, const DiscountConfig& discounts,
                   const FitOptions& options = {});

}  // namespace sprint::fitting
