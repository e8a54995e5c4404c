#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sprint/binning.hpp"
#include "sprint/core.hpp"

namespace sprint {

// ---------------------------------------------------------------------------
// Single-step operations
// ---------------------------------------------------------------------------

/// Uniform histograms (1/L_f per bin), zero degrees, no timestamps.
NodeState init_node(const HistogramLayout& layout);

/// Evaluates a discount mode. Constant modes ignore dt; exp modes map an
/// absent dt (a node's first event) to 0, i.e., full replacement.
/// Throws TimeOrderError on negative dt.
double effective_discount(const DiscountMode& mode, std::optional<double> dt);

/// Streaming degree step: absent dt (first event of that direction) -> 1,
/// else d * exp(-dt/tau_d) + 1. Throws TimeOrderError on negative dt.
double update_degree(double degree, std::optional<double> dt, double tau_d);

/// Convex mix of own history, neighbor summary, and the event indicator:
/// out = beta * self + (1 - beta) * (alpha * neighbor + (1 - alpha) * delta),
/// elementwise over flat histogram vectors. Throws StructuralError on shape
/// mismatch. Normalization is preserved when the inputs are normalized per
/// feature and delta is one-hot per feature.
void sprint_update_into(std::span<const double> self,
                        std::span<const double> neighbor,
                        std::span<const double> delta, double alpha,
                        double beta, std::span<double> out);

std::vector<double> sprint_update(std::span<const double> self,
                                  std::span<const double> neighbor,
                                  std::span<const double> delta, double alpha,
                                  double beta);

/// Values the engine derives per endpoint before binning an event.
struct DerivedValues {
  std::optional<double> time_delta;  // absent on a node's first event
  double in_degree = 0.0;
  double out_degree = 0.0;
};

/// Bin index per schema feature for one endpoint's indicator. An absent
/// time delta maps to the feature's last bin. Propagates lookup errors.
std::vector<std::size_t> delta_bins(const EdgeEvent& event,
                                    const DerivedValues& derived,
                                    const FeatureSchema& schema,
                                    const BinningSpec& binning);

/// Materialized per-feature one-hot vectors for delta_bins.
std::vector<std::vector<double>> delta_vector(const EdgeEvent& event,
                                              const DerivedValues& derived,
                                              const FeatureSchema& schema,
                                              const BinningSpec& binning);

// ---------------------------------------------------------------------------
// Per-edge planning (shared by the full and the sketch engine)
// ---------------------------------------------------------------------------

/// Everything one endpoint's update needs, computed from pre-update state.
struct NodeUpdatePlan {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::size_t> bins;  // delta bin index per schema feature
  double new_in_degree = 0.0;     // post-event counters (decayed then bumped
  double new_out_degree = 0.0;    // only in the direction the event updates)
};

struct EdgePlan {
  NodeUpdatePlan source;
  NodeUpdatePlan destination;
  bool self_loop = false;
  double timestamp = 0.0;
};

/// Derives both endpoints' update plans from their pre-update clocks. Time
/// deltas are clamped at zero so a within-tolerance timestamp jitter never
/// produces a negative gap. For self-loops only `source` is filled and both
/// degree directions advance.
void plan_edge(const EdgeEvent& event, const FeatureSchema& schema,
               const BinningSpec& binning, const DiscountConfig& config,
               const DegreeClock& source_clock,
               const DegreeClock& destination_clock, EdgePlan& out);

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

struct EngineOptions {
  /// How far a timestamp may regress behind the newest applied event before
  /// the stream is rejected. Default 0: strictly time-ordered input.
  double timestamp_regression_tolerance = 0.0;
};

/// The streaming state machine: one constant-work update per edge, state
/// store created lazily, no adjacency kept anywhere. Single writer; reads
/// are allowed between updates.
class SprintEngine {
 public:
  SprintEngine(FeatureSchema schema, BinningSpec binning, DiscountConfig config,
               EngineOptions options = {});

  struct UpdateResult {
    std::size_t source_index;
    std::size_t destination_index;
  };

  /// Applies one edge: snapshots both endpoints, updates both histograms
  /// from the pre-update snapshots, then commits degrees and timestamps.
  /// Throws OrderedStreamError on timestamp regression beyond tolerance.
  UpdateResult apply_edge(const EdgeEvent& event);

  std::size_t node_count() const { return states_.size(); }
  const std::string& node_id(std::size_t index) const { return ids_[index]; }
  const NodeState& state_at(std::size_t index) const { return states_[index]; }
  std::optional<std::size_t> find(const NodeId& id) const;

  Embedding embedding_at(std::size_t index, bool append_raw_degrees = false) const;

  /// Allocation-free embedding read for hot loops: histogram bins followed
  /// by the raw degrees when requested.
  void read_embedding(std::size_t index, bool append_raw_degrees,
                      std::vector<double>& out) const;

  const FeatureSchema& schema() const { return schema_; }
  const BinningSpec& binning() const { return binning_; }
  const HistogramLayout& layout() const { return layout_; }
  const DiscountConfig& config() const { return config_; }
  const EngineOptions& options() const { return options_; }

  std::optional<double> last_event_time() const { return last_event_time_; }
  std::uint64_t events_applied() const { return events_applied_; }

  /// Pre-sizes the node table and pre-builds histogram storage for that many
  /// nodes, so later first touches allocate nothing.
  void reserve(std::size_t node_capacity);

  // Snapshot support: bulk state import must preserve node order.
  void import_node(const NodeId& id, NodeState state);
  void set_stream_position(std::optional<double> last_event_time,
                           std::uint64_t events_applied);

 private:
  std::size_t intern(const NodeId& id);

  FeatureSchema schema_;
  BinningSpec binning_;
  HistogramLayout layout_;
  DiscountConfig config_;
  EngineOptions options_;

  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::string> ids_;
  std::vector<NodeState> states_;
  std::vector<std::vector<double>> bin_pool_;  // filled by reserve()

  std::optional<double> last_event_time_;
  std::uint64_t events_applied_ = 0;

  EdgePlan plan_;                     // reused per event
  std::vector<double> scratch_src_;   // reused update buffers
  std::vector<double> scratch_dst_;
};

}  // namespace sprint
