#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sprint/core.hpp"
#include "sprint/engine.hpp"

namespace sprint::sketch {

// ---------------------------------------------------------------------------
// Hyperplanes
// ---------------------------------------------------------------------------

/// k random unit-norm hyperplanes over the flat histogram space, stored
/// row-major. Deterministic per (k, dimension, seed) within one build;
/// the Gaussian draw itself is the standard library's.
class HashPlanes {
 public:
  HashPlanes() = default;
  HashPlanes(std::size_t k, std::size_t dimension, std::uint64_t seed);

  std::size_t k() const { return k_; }
  std::size_t dimension() const { return dimension_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> row(std::size_t j) const;

 private:
  std::size_t k_ = 0;
  std::size_t dimension_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> rows_;  // k_ * dimension_
};

/// theta_j = row_j . histogram for every plane. Throws StructuralError when
/// the histogram length differs from the plane dimension.
std::vector<double> project(std::span<const double> histogram,
                            const HashPlanes& planes);

/// One bit per plane: theta_j > 0 -> 1, else 0 (zero maps to 0).
std::vector<std::uint8_t> binarize(std::span<const double> theta);

/// Fraction of positions where the two bit vectors agree.
double hamming_similarity(std::span<const std::uint8_t> a,
                          std::span<const std::uint8_t> b);

// ---------------------------------------------------------------------------
// Incremental projection updates
// ---------------------------------------------------------------------------

/// The histogram mix carried out directly in projection space:
/// out_j = beta * theta_self_j
///       + (1 - beta) * (alpha * theta_neighbor_j
///                       + (1 - alpha) * plane_dot_delta_j).
void sketch_update_into(std::span<const double> theta_self,
                        std::span<const double> theta_neighbor,
                        std::span<const double> plane_dot_delta, double alpha,
                        double beta, std::span<double> out);

std::vector<double> sketch_update(std::span<const double> theta_self,
                                  std::span<const double> theta_neighbor,
                                  std::span<const double> plane_dot_delta,
                                  double alpha, double beta);

/// row_j . delta for the one-hot-per-feature indicator named by `bins`:
/// the sum of each plane's entry at every feature's selected bin.
void plane_dot_delta(const HashPlanes& planes, const HistogramLayout& layout,
                     const std::vector<std::size_t>& bins,
                     std::vector<double>& out);

/// Projection of the elementwise mean minus the mean of the projections,
/// reported as the worst |difference| over planes. Zero up to rounding for
/// any input set, since projection is linear.
double averaging_gap(const std::vector<std::vector<double>>& histograms,
                     const HashPlanes& planes);

// ---------------------------------------------------------------------------
// Sketch engine
// ---------------------------------------------------------------------------

/// Per-node compressed state: k projections plus the uncompressed degree
/// counters, which stay exact alongside the sketch.
struct SketchState {
  std::vector<double> theta;
  DegreeClock clock;
};

/// Streaming engine that never materializes histograms: nodes start at the
/// projection of the uniform histogram and every edge moves both endpoint
/// projections with the same per-edge plan the full engine uses. Per-edge
/// work is O(k * features) instead of O(total bins).
class SketchEngine {
 public:
  SketchEngine(FeatureSchema schema, BinningSpec binning, DiscountConfig config,
               std::size_t k, std::uint64_t seed, EngineOptions options = {});

  struct UpdateResult {
    std::size_t source_index;
    std::size_t destination_index;
  };

  UpdateResult apply_edge(const EdgeEvent& event);

  std::size_t node_count() const { return states_.size(); }
  const std::string& node_id(std::size_t index) const { return ids_[index]; }
  const SketchState& state_at(std::size_t index) const {
    return states_[index];
  }
  std::optional<std::size_t> find(const NodeId& id) const;

  std::vector<std::uint8_t> bits_at(std::size_t index) const;

  /// theta values followed by the raw in/out degrees.
  void read_embedding(std::size_t index, std::vector<double>& out) const;
  std::vector<std::string> embedding_labels() const;

  const HashPlanes& planes() const { return planes_; }
  const FeatureSchema& schema() const { return schema_; }
  const BinningSpec& binning() const { return binning_; }
  const HistogramLayout& layout() const { return layout_; }
  const DiscountConfig& config() const { return config_; }
  const EngineOptions& options() const { return options_; }

  std::optional<double> last_event_time() const { return last_event_time_; }
  std::uint64_t events_applied() const { return events_applied_; }

  void reserve(std::size_t node_capacity);

  // Snapshot support, mirroring the full engine.
  void import_node(const NodeId& id, SketchState state);
  void set_stream_position(std::optional<double> last_event_time,
                           std::uint64_t events_applied);

 private:
  std::size_t intern(const NodeId& id);

  FeatureSchema schema_;
  BinningSpec binning_;
  HistogramLayout layout_;
  DiscountConfig config_;
  EngineOptions options_;
  HashPlanes planes_;
  std::vector<double> theta_uniform_;

  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::string> ids_;
  std::vector<SketchState> states_;

  std::optional<double> last_event_time_;
  std::uint64_t events_applied_ = 0;

  EdgePlan plan_;
  std::vector<double> dot_src_;
  std::vector<double> dot_dst_;
  std::vector<double> scratch_src_;
  std::vector<double> scratch_dst_;
};

}  // namespace sprint::sketch
