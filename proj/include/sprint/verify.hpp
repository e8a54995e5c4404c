#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sprint::verify {

/// Outcome of one self-check suite. `measured` is the suite's headline
/// number (worst discrepancy, mismatch count, ...) compared against the
/// suite's own contract threshold.
struct SuiteReport {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Histograms sum to one per feature after a long random stream, across
/// constant and time-decayed discount modes.
SuiteReport normalization_suite(std::size_t n_events, std::size_t n_nodes,
                                std::uint64_t seed);

/// Engine state on fresh-node chains equals the truncated discounted sum,
/// across lengths 1..max_length and a grid of alphas.
SuiteReport chain_suite(std::size_t max_length, std::uint64_t seed);

/// Incremental engine vs from-scratch naive replay at several checkpoints.
SuiteReport replay_suite(std::size_t n_events, std::size_t n_checkpoints,
                         std::uint64_t seed);

/// Streaming sketch projections vs projecting the full engine's histograms.
SuiteReport sketch_suite(std::size_t n_events, std::size_t k,
                         std::uint64_t seed);

/// Projection commutes with averaging over random histogram sets.
SuiteReport averaging_suite(std::size_t n_histograms, std::size_t k,
                            std::uint64_t seed);

/// Walk estimates on chains are exact (every walk is forced).
SuiteReport walk_chain_suite(std::uint64_t seed);

/// Walk estimate on a 3-leaf star stays within 3 standard errors of the
/// closed-form mixture.
SuiteReport walk_star_suite(std::size_t n_walks, std::uint64_t seed);

/// Streaming degree steps match the closed form d*exp(-dt/tau)+1 and first
/// events land exactly on 1.
SuiteReport degree_suite(std::size_t n_samples, std::uint64_t seed);

/// Binary-search bin lookup agrees with a linear scan on random cut sets,
/// probes including the cut values themselves; also pins the quantile
/// hand-example.
SuiteReport lookup_suite(std::size_t n_pairs, std::uint64_t seed);

/// Snapshot/restore round trips mid-stream reproduce the uninterrupted run,
/// and tampered snapshots are refused.
SuiteReport persistence_suite(std::size_t n_events, std::size_t stride,
                              std::uint64_t seed);

/// One formatted line per report: [PASS]/[FAIL], name, measured/threshold.
std::string format_report(const SuiteReport& report);

}  // namespace sprint::verify
