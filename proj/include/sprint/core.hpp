#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sprint {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape/layout violations: mismatched schemas, wrong vector lengths.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Bad input values: NaN features, unparseable fields, type mismatches.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Negative time differences handed to a decay evaluation.
class TimeOrderError : public Error {
 public:
  using Error::Error;
};

/// Stream timestamp regression beyond the configured tolerance.
class OrderedStreamError : public Error {
 public:
  using Error::Error;
};

/// Bin fitting on empty or otherwise unusable training data.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (schema/binning/discount parameter violations).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Snapshot save/restore failures, including hash and version mismatches.
class PersistenceError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Feature schema
// ---------------------------------------------------------------------------

using NodeId = std::string;

/// A raw feature value as it arrives on an edge: a real number or a category
/// token. Which alternative is valid is decided by the feature's kind.
using FeatureValue = std::variant<double, std::string>;

enum class FeatureKind {
  kNumerical,
  kCategorical,
};

enum class FeatureSource {
  kEdge,
  kDerivedInDegree,
  kDerivedOutDegree,
  kDerivedTimeDelta,
};

struct FeatureDef {
  std::string name;
  FeatureKind kind = FeatureKind::kNumerical;
  FeatureSource source = FeatureSource::kEdge;

  bool is_derived() const { return source != FeatureSource::kEdge; }
};

/// Ordered list of tracked features. Edge features are read positionally
/// from incoming events; derived features are computed by the engine.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureDef> features);

  const std::vector<FeatureDef>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  const FeatureDef& at(std::size_t i) const { return features_.at(i); }

  std::size_t edge_feature_count() const { return edge_feature_count_; }

  /// Index into features() for the i-th edge feature (event value order).
  const std::vector<std::size_t>& edge_feature_indices() const {
    return edge_feature_indices_;
  }

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::optional<std::size_t> derived_index(FeatureSource source) const;

 private:
  std::vector<FeatureDef> features_;
  std::vector<std::size_t> edge_feature_indices_;
  std::size_t edge_feature_count_ = 0;
  std::optional<std::size_t> in_degree_index_;
  std::optional<std::size_t> out_degree_index_;
  std::optional<std::size_t> time_delta_index_;
};

// ---------------------------------------------------------------------------
// Edge events
// ---------------------------------------------------------------------------

/// One timestamped interaction. `values` holds the raw edge feature values
/// in schema edge-feature order; derived features never appear here.
struct EdgeEvent {
  NodeId source_id;
  NodeId destination_id;
  double timestamp = 0.0;
  std::vector<FeatureValue> values;
};

/// Checks the event invariants against a schema. Throws DataError or
/// StructuralError naming the violation.
void validate_event(const EdgeEvent& event, const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

/// Numerical bins: a strictly increasing list of cut points c_0 < ... < c_n
/// defining n+1 right-open intervals (-inf,c_0), [c_0,c_1), ..., [c_n,+inf).
struct NumericalBins {
  std::vector<double> cut_points;

  std::size_t bin_count() const { return cut_points.size() + 1; }
};

/// Categorical bins: explicit token map plus one reserved overflow bin at
/// index bin_count()-1 for everything unseen at fit time.
struct CategoricalBins {
  std::vector<std::pair<std::string, std::size_t>> token_bins;  // sorted by token

  std::size_t bin_count() const { return token_bins.size() + 1; }
  std::size_t overflow_bin() const { return token_bins.size(); }
  std::optional<std::size_t> find(const std::string& token) const;
};

struct BinningEntry {
  std::variant<NumericalBins, CategoricalBins> bins;

  std::size_t bin_count() const;
  bool is_numerical() const {
    return std::holds_alternative<NumericalBins>(bins);
  }
  const NumericalBins& numerical() const {
    return std::get<NumericalBins>(bins);
  }
  const CategoricalBins& categorical() const {
    return std::get<CategoricalBins>(bins);
  }
};

/// Fitted bins for every schema feature, positionally aligned.
class BinningSpec {
 public:
  BinningSpec() = default;
  explicit BinningSpec(std::vector<BinningEntry> entries);

  const std::vector<BinningEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const BinningEntry& at(std::size_t i) const { return entries_.at(i); }

  /// Throws StructuralError if entry kinds or count disagree with the schema.
  void validate_against(const FeatureSchema& schema) const;

 private:
  std::vector<BinningEntry> entries_;
};

// ---------------------------------------------------------------------------
// Discount configuration
// ---------------------------------------------------------------------------

/// A discount factor is either a constant in [0,1] or exp(-dt/tau) evaluated
/// on the updating node's own inter-event gap.
struct DiscountMode {
  enum class Kind { kConstant, kExpTimeDecay };

  Kind kind = Kind::kConstant;
  double value = 0.0;  // the constant, or tau in seconds

  static DiscountMode constant(double c) {
    return DiscountMode{Kind::kConstant, c};
  }
  static DiscountMode exp_time_decay(double tau) {
    return DiscountMode{Kind::kExpTimeDecay, tau};
  }
};

struct DiscountConfig {
  DiscountMode alpha = DiscountMode::constant(0.5);
  DiscountMode beta = DiscountMode::constant(0.5);
  double degree_timescale = 1.0;  // tau_d, seconds

  /// Throws ConfigError on out-of-range parameters.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Node state
// ---------------------------------------------------------------------------

/// Streaming degree counters and last-seen timestamps for one node.
struct DegreeClock {
  double in_degree = 0.0;
  double out_degree = 0.0;
  std::optional<double> last_any_event_time;
  std::optional<double> last_in_event_time;
  std::optional<double> last_out_event_time;
};

/// Per-node state: all per-feature histograms stored as one flat vector in
/// schema order (see HistogramLayout) plus the degree counters. Plain value
/// type, safe to copy across threads.
struct NodeState {
  std::vector<double> bins;  // length = layout.total_bins()
  DegreeClock clock;
};

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

/// Maps the (schema, binning) pair to offsets inside the flat histogram
/// vector. Pure function of its inputs: equal inputs give equal layouts.
class HistogramLayout {
 public:
  HistogramLayout() = default;
  HistogramLayout(const FeatureSchema& schema, const BinningSpec& binning);

  std::size_t feature_count() const { return bin_counts_.size(); }
  std::size_t total_bins() const { return total_bins_; }
  std::size_t offset(std::size_t feature) const { return offsets_.at(feature); }
  std::size_t bin_count(std::size_t feature) const {
    return bin_counts_.at(feature);
  }

  std::span<const double> feature_slice(const std::vector<double>& flat,
                                        std::size_t feature) const;

  /// "feature:bin_j" labels for every flat position, in order.
  const std::vector<std::string>& labels() const { return labels_; }

  bool operator==(const HistogramLayout& other) const = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> bin_counts_;
  std::size_t total_bins_ = 0;
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

/// Flat embedding vector plus the column labels describing each position.
struct Embedding {
  std::vector<double> values;
  std::vector<std::string> labels;
};

/// Flattens a node state: all histograms in schema order, optionally
/// followed by the raw in/out degree scalars.
Embedding node_embedding(const NodeState& state, const HistogramLayout& layout,
                         bool append_raw_degrees = false);

/// Source embedding followed by destination embedding. Labels are prefixed
/// src_/dst_. Throws StructuralError when the states disagree in layout.
Embedding pair_embedding(const NodeState& u_state, const NodeState& v_state,
                         const HistogramLayout& layout,
                         bool append_raw_degrees = false);

/// Checks every per-feature histogram sums to 1 within tol and entries are
/// non-negative. Returns the worst |sum - 1| seen.
double normalization_error(const NodeState& state,
                           const HistogramLayout& layout);

}  // namespace sprint
