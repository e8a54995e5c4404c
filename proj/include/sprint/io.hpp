#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sprint/core.hpp"
#include "sprint/engine.hpp"
#include "sprint/sketch.hpp"

namespace sprint::io {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct SketchSettings {
  bool enabled = false;
  std::size_t k = 16;
  std::uint64_t seed = 42;
};

enum class EmitMode { kFinal, kPerEvent };

struct EmbeddingOptions {
  bool append_raw_degrees = false;
  bool pair = false;
  EmitMode emit = EmitMode::kFinal;
};

/// Everything a run needs: feature schema, fitted bins (inline or via a
/// sidecar file), discount parameters, sketch settings, stream tolerance
/// and output shape.
struct RunConfig {
  FeatureSchema schema;
  std::optional<BinningSpec> binning;
  DiscountConfig discounts;
  SketchSettings sketch;
  double timestamp_regression_tolerance = 0.0;
  EmbeddingOptions embedding;
};

/// Parses a JSON config file. A "binning_file" entry is resolved relative
/// to the config file's directory and loaded in place. Throws ConfigError
/// with the offending file and key on any problem.
RunConfig load_run_config(const std::string& path);

/// The binning sidecar: fitted bins per schema feature.
void save_binning(const std::string& path, const FeatureSchema& schema,
                  const BinningSpec& binning);
BinningSpec load_binning(const std::string& path, const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Edge streams
// ---------------------------------------------------------------------------

/// Streaming reader over a CSV (header row mapping columns by name) or
/// JSONL (one object per line) edge file; the format is sniffed from the
/// first non-blank byte. Errors carry file, line, and field context. When
/// order_tolerance is set, a timestamp regressing further than that behind
/// the running maximum is rejected at read time.
class EdgeStreamReader {
 public:
  EdgeStreamReader(const std::string& path, const FeatureSchema& schema,
                   std::optional<double> order_tolerance = std::nullopt);
  ~EdgeStreamReader();

  EdgeStreamReader(const EdgeStreamReader&) = delete;
  EdgeStreamReader& operator=(const EdgeStreamReader&) = delete;

  /// Next event, or nullopt at end of file.
  std::optional<EdgeEvent> next();

  std::size_t line() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Reads the whole stream into memory.
std::vector<EdgeEvent> read_edge_stream(
    const std::string& path, const FeatureSchema& schema,
    std::optional<double> order_tolerance = std::nullopt);

/// Writes events as CSV with one column per edge feature, using shortest
/// round-trip number rendering so read-back reproduces the values exactly.
void write_edge_stream(const std::string& path,
                       std::span<const EdgeEvent> events,
                       const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Embedding output
// ---------------------------------------------------------------------------

/// Streaming CSV writer for embedding rows: entity columns first, then one
/// column per embedding position. Values are rendered with 9 significant
/// digits.
class EmbeddingWriter {
 public:
  EmbeddingWriter(std::ostream& sink, std::span<const std::string> entity_columns,
                  std::span<const std::string> value_labels);

  void write_row(std::span<const std::string> entity,
                 std::span<const double> values);

  std::size_t rows_written() const { return rows_; }

 private:
  std::ostream& sink_;
  std::size_t entity_width_;
  std::size_t value_width_;
  std::size_t rows_ = 0;
};

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

/// Hashes pinning a snapshot to the exact schema, binning, and discount
/// setup that produced it.
struct ConfigHashes {
  std::string schema_hash;
  std::string binning_hash;
  std::string config_hash;
};

ConfigHashes compute_hashes(const FeatureSchema& schema,
                            const BinningSpec& binning,
                            const DiscountConfig& discounts);

/// Full-state snapshot: every node's histograms, degrees, and clocks plus
/// the stream position, pinned by the config hashes.
void save_snapshot(const std::string& path, const SprintEngine& engine);

/// Rebuilds an engine from a snapshot. The provided schema/binning/config
/// must hash to the values stored in the file; a mismatch or an unknown
/// format version is refused with a PersistenceError naming the difference.
SprintEngine restore_snapshot(const std::string& path,
                              const FeatureSchema& schema,
                              const BinningSpec& binning,
                              const DiscountConfig& discounts,
                              EngineOptions options = {});

/// Sketch-state snapshot; plane parameters (k, seed) ride along and are
/// verified on restore.
void save_sketch_snapshot(const std::string& path,
                          const sketch::SketchEngine& engine);

sketch::SketchEngine restore_sketch_snapshot(const std::string& path,
                                             const FeatureSchema& schema,
                                             const BinningSpec& binning,
                                             const DiscountConfig& discounts,
                                             EngineOptions options = {});

}  // namespace sprint::io
