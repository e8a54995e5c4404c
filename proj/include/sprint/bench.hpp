#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sprint::bench {

struct SizeResult {
  std::size_t n_nodes = 0;
  std::size_t events_timed = 0;
  double mean_ns = 0.0;
  double p50_ns = 0.0;
  double p99_ns = 0.0;
  double stddev_ns = 0.0;
};

struct BenchReport {
  std::vector<SizeResult> sizes;
  /// Mean per-edge latency of the largest node count over the smallest.
  double ratio_largest_to_smallest = 0.0;
};

/// Per-edge latency across graph sizes. Every size replays the same number
/// of events through a fresh engine per repetition, with bins fitted once
/// on the smallest size so the per-event work is structurally identical;
/// only `apply_edge` plus one embedding read sit inside the timer, and the
/// first `warmup` events of each repetition are untimed.
BenchReport run_scaling(const std::vector<std::size_t>& node_counts,
                        std::size_t n_events, std::size_t warmup,
                        std::size_t reps, std::uint64_t seed);

}  // namespace sprint::bench
