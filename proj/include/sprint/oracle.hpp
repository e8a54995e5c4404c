#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sprint/core.hpp"
#include "sprint/engine.hpp"

/// Independent reference implementations used to verify the streaming
/// engine. Everything here favors obviousness over speed: nested vectors,
/// linear scans, from-scratch recomputation.
namespace sprint::oracle {

// ---------------------------------------------------------------------------
// Truncated discounted sum
// ---------------------------------------------------------------------------

/// sum_{i<k} alpha^i * (1-alpha) * deltas[i] + alpha^k * tail, with
/// deltas[0] the most recent step. All vectors share the tail's length.
std::vector<double> truncated_sum(
    const std::vector<std::vector<double>>& deltas, double alpha,
    const std::vector<double>& tail);

// ---------------------------------------------------------------------------
// Chain equivalence
// ---------------------------------------------------------------------------

struct ChainCheck {
  double max_discrepancy = 0.0;
  std::vector<double> engine_state;
  std::vector<double> oracle_state;
};

/// On a fresh-node chain (event i joins a brand-new node to the node event
/// i-1 introduced) with beta = 0, the newest node's histograms must equal
/// the truncated discounted sum of the chain's indicators with a uniform
/// tail. Requires an edge-feature-only schema and strictly increasing
/// timestamps; throws ConfigError / DataError when the input is not a chain.
ChainCheck chain_equivalence(const std::vector<EdgeEvent>& chain, double alpha,
                             const FeatureSchema& schema,
                             const BinningSpec& binning);

// ---------------------------------------------------------------------------
// Naive replay
// ---------------------------------------------------------------------------

/// Reference per-node state kept the obvious way: one vector per feature.
struct NaiveNode {
  std::vector<std::vector<double>> histograms;
  double in_degree = 0.0;
  double out_degree = 0.0;
  std::optional<double> last_any;
  std::optional<double> last_in;
  std::optional<double> last_out;
};

using NaiveStore = std::map<NodeId, NaiveNode>;

/// Replays the events from scratch with the plainest possible bookkeeping.
/// Shares no state or code path with SprintEngine beyond the math itself.
NaiveStore naive_replay(std::span<const EdgeEvent> events,
                        const FeatureSchema& schema,
                        const BinningSpec& binning,
                        const DiscountConfig& config);

struct ReplayDiff {
  double max_abs = 0.0;
  std::string where;  // node/field of the worst difference
};

/// Worst absolute difference between engine state and a naive replay:
/// histogram entries, degree counters, and last-event clocks all count.
ReplayDiff compare_replay(const SprintEngine& engine, const NaiveStore& naive);

// ---------------------------------------------------------------------------
// Temporal walk sampler
// ---------------------------------------------------------------------------

struct WalkEstimate {
  std::vector<double> mean;            // flat histogram estimate
  std::vector<double> standard_error;  // per flat position
  std::size_t n_walks = 0;
};

/// Monte-Carlo estimate of a node's histograms by strictly-backward-in-time
/// walks: start from the seed's latest incident edge, repeatedly hop to the
/// edge's other endpoint and pick uniformly among its strictly older
/// incident edges, collecting each traversed edge's indicator. A walk that
/// runs out of older edges (or hits max_hops) contributes the uniform tail
/// weighted alpha^depth. Requires an edge-feature-only schema.
WalkEstimate walk_sampler(std::span<const EdgeEvent> events,
                          const NodeId& seed_node, double alpha,
                          std::size_t n_walks, std::size_t max_hops,
                          std::uint64_t seed, const FeatureSchema& schema,
                          const BinningSpec& binning);

// ---------------------------------------------------------------------------
// Approximation report
// ---------------------------------------------------------------------------

struct ApproximationRow {
  NodeId node;
  double l1_distance = 0.0;  // engine bins vs walk mean, summed |diff|
  double mean_standard_error = 0.0;
};

/// Runs a beta = 0 engine over the events and compares every node against
/// its walk estimate. Informational: no thresholds, sorted by node id.
/// Meant for small streams; cost grows with nodes * walks.
std::vector<ApproximationRow> approximation_report(
    std::span<const EdgeEvent> events, const FeatureSchema& schema,
    const BinningSpec& binning, double alpha, std::size_t n_walks,
    std::size_t max_hops, std::uint64_t seed);

}  // namespace sprint::oracle
