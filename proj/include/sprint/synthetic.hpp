#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sprint/core.hpp"

namespace sprint::synthetic {

/// Knobs for seeded random edge streams: skewed value distributions, burst
/// repeats at the same timestamp, occasional self-loops, and category
/// tokens that first appear after any training prefix would end.
struct StreamOptions {
  std::size_t n_nodes = 100;
  std::size_t n_events = 1000;
  std::uint64_t seed = 42;
  double mean_gap = 1.0;
  double burst_fraction = 0.1;
  double self_loop_fraction = 0.05;
  std::size_t n_numerical = 2;
  std::size_t n_categorical = 1;
  bool with_derived = true;
  std::size_t token_pool = 8;
  double novel_token_fraction = 0.02;
};

FeatureSchema make_schema(const StreamOptions& options);

std::vector<EdgeEvent> make_events(const FeatureSchema& schema,
                                   const StreamOptions& options);

struct Fixture {
  FeatureSchema schema;
  BinningSpec binning;
  std::vector<EdgeEvent> events;
};

/// Schema + events + bins fitted on the leading half of the stream, so the
/// tail exercises out-of-range values and unseen tokens.
Fixture make_fixture(const StreamOptions& options,
                     const DiscountConfig& discounts);

}  // namespace sprint::synthetic
