#include "sprint/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace sprint::io {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

std::string render_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_strict_double(const std::string& raw, const std::string& context) {
  std::string s = raw;
  // tolerate surrounding spaces and a stray carriage return
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.pop_back();
  }
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  s = s.substr(start);
  if (s.empty()) {
    throw DataError(context + ": empty numeric field");
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw DataError(context + ": cannot parse '" + raw + "' as a number");
  }
  return v;
}

std::string strip_eol(std::string line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
    line.pop_back();
  }
  return line;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON forms of the core types
// ---------------------------------------------------------------------------

const char* kind_name(FeatureKind k) {
  return k == FeatureKind::kNumerical ? "numerical" : "categorical";
}

const char* source_name(FeatureSource s) {
  switch (s) {
    case FeatureSource::kEdge:
      return "edge";
    case FeatureSource::kDerivedInDegree:
      return "in_degree";
    case FeatureSource::kDerivedOutDegree:
      return "out_degree";
    case FeatureSource::kDerivedTimeDelta:
      return "time_delta";
  }
  return "?";
}

FeatureKind parse_kind(const std::string& s, const std::string& context) {
  if (s == "numerical") return FeatureKind::kNumerical;
  if (s == "categorical") return FeatureKind::kCategorical;
  throw ConfigError(context + ": unknown feature kind '" + s + "'");
}

FeatureSource parse_source(const std::string& s, const std::string& context) {
  if (s == "edge") return FeatureSource::kEdge;
  if (s == "in_degree") return FeatureSource::kDerivedInDegree;
  if (s == "out_degree") return FeatureSource::kDerivedOutDegree;
  if (s == "time_delta") return FeatureSource::kDerivedTimeDelta;
  throw ConfigError(context + ": unknown feature source '" + s + "'");
}

json schema_to_json(const FeatureSchema& schema) {
  json features = json::array();
  for (const FeatureDef& f : schema.features()) {
    features.push_back({{"name", f.name},
                        {"kind", kind_name(f.kind)},
                        {"source", source_name(f.source)}});
  }
  return json{{"features", features}};
}

FeatureSchema schema_from_json(const json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("features") || !j["features"].is_array()) {
    throw ConfigError(context + ": schema needs a 'features' array");
  }
  std::vector<FeatureDef> defs;
  for (const json& f : j["features"]) {
    FeatureDef def;
    if (!f.contains("name") || !f["name"].is_string()) {
      throw ConfigError(context + ": every feature needs a string 'name'");
    }
    def.name = f["name"].get<std::string>();
    def.kind = f.contains("kind")
                   ? parse_kind(f["kind"].get<std::string>(), context)
                   : FeatureKind::kNumerical;
    def.source = f.contains("source")
                     ? parse_source(f["source"].get<std::string>(), context)
                     : FeatureSource::kEdge;
    defs.push_back(std::move(def));
  }
  return FeatureSchema(std::move(defs));
}

json binning_to_json(const FeatureSchema& schema, const BinningSpec& binning) {
  json features = json::array();
  for (std::size_t i = 0; i < binning.size(); ++i) {
    json f;
    f["name"] = schema.at(i).name;
    if (binning.at(i).is_numerical()) {
      f["kind"] = "numerical";
      f["cut_points"] = binning.at(i).numerical().cut_points;
    } else {
      f["kind"] = "categorical";
      json tokens = json::object();
      for (const auto& [token, bin] : binning.at(i).categorical().token_bins) {
        tokens[token] = bin;
      }
      f["tokens"] = tokens;
    }
    features.push_back(std::move(f));
  }
  return json{{"features", features}};
}

BinningSpec binning_from_json(const json& j, const FeatureSchema& schema,
                              const std::string& context) {
  if (!j.is_object() || !j.contains("features") || !j["features"].is_array()) {
    throw ConfigError(context + ": binning needs a 'features' array");
  }
  const json& features = j["features"];
  if (features.size() != schema.size()) {
    std::ostringstream msg;
    msg << context << ": binning lists " << features.size()
        << " features, schema has " << schema.size();
    throw ConfigError(msg.str());
  }
  std::vector<BinningEntry> entries;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    const std::string name = f.value("name", std::string());
    if (name != schema.at(i).name) {
      throw ConfigError(context + ": binning feature '" + name +
                        "' does not match schema feature '" +
                        schema.at(i).name + "' at position " +
                        std::to_string(i));
    }
    const std::string kind = f.value("kind", std::string());
    BinningEntry entry;
    if (kind == "numerical") {
      NumericalBins bins;
      bins.cut_points = f.at("cut_points").get<std::vector<double>>();
      entry.bins = std::move(bins);
    } else if (kind == "categorical") {
      CategoricalBins bins;
      for (const auto& [token, bin] : f.at("tokens").items()) {
        bins.token_bins.emplace_back(token, bin.get<std::size_t>());
      }
      // json objects iterate in key order, which is already sorted
      entry.bins = std::move(bins);
    } else {
      throw ConfigError(context + ": feature '" + name +
                        "' has unknown binning kind '" + kind + "'");
    }
    entries.push_back(std::move(entry));
  }
  BinningSpec spec(std::move(entries));
  spec.validate_against(schema);
  return spec;
}

json discount_mode_to_json(const DiscountMode& m) {
  if (m.kind == DiscountMode::Kind::kConstant) {
    return json{{"mode", "constant"}, {"value", m.value}};
  }
  return json{{"mode", "exp_time_decay"}, {"tau", m.value}};
}

DiscountMode discount_mode_from_json(const json& j, const std::string& context) {
  const std::string mode = j.value("mode", std::string());
  if (mode == "constant") {
    return DiscountMode::constant(j.at("value").get<double>());
  }
  if (mode == "exp_time_decay") {
    return DiscountMode::exp_time_decay(j.at("tau").get<double>());
  }
  throw ConfigError(context + ": unknown discount mode '" + mode + "'");
}

json discounts_to_json(const DiscountConfig& d) {
  return json{{"alpha", discount_mode_to_json(d.alpha)},
              {"beta", discount_mode_to_json(d.beta)},
              {"degree_timescale", d.degree_timescale}};
}

DiscountConfig discounts_from_json(const json& j, const std::string& context) {
  DiscountConfig d;
  if (j.contains("alpha")) {
    d.alpha = discount_mode_from_json(j["alpha"], context + " alpha");
  }
  if (j.contains("beta")) {
    d.beta = discount_mode_from_json(j["beta"], context + " beta");
  }
  d.degree_timescale = j.value("degree_timescale", 1.0);
  d.validate();
  return d;
}

json optional_to_json(const std::optional<double>& v) {
  if (v.has_value()) return json(*v);
  return json(nullptr);
}

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }

  RunConfig config;
  try {
    if (!j.contains("schema")) {
      throw ConfigError("config '" + path + "': missing 'schema' section");
    }
    config.schema = schema_from_json(j["schema"], "config '" + path + "'");

    if (j.contains("discounts")) {
      config.discounts =
          discounts_from_json(j["discounts"], "config '" + path + "'");
    }

    if (j.contains("binning") && j.contains("binning_file")) {
      throw ConfigError("config '" + path +
                        "': give either 'binning' or 'binning_file', not both");
    }
    if (j.contains("binning")) {
      config.binning = binning_from_json(j["binning"], config.schema,
                                         "config '" + path + "'");
    } else if (j.contains("binning_file")) {
      const std::filesystem::path rel =
          j["binning_file"].get<std::string>();
      const std::filesystem::path base =
          std::filesystem::path(path).parent_path();
      config.binning =
          load_binning((rel.is_absolute() ? rel : base / rel).string(),
                       config.schema);
    }

    if (j.contains("sketch")) {
      const json& s = j["sketch"];
      config.sketch.enabled = s.value("enabled", true);
      config.sketch.k = s.value("k", std::size_t{16});
      config.sketch.seed = s.value("seed", std::uint64_t{42});
      if (config.sketch.k < 1) {
        throw ConfigError("config '" + path + "': sketch k must be >= 1");
      }
    }

    if (j.contains("stream")) {
      config.timestamp_regression_tolerance =
          j["stream"].value("timestamp_regression_tolerance", 0.0);
      if (config.timestamp_regression_tolerance < 0.0) {
        throw ConfigError("config '" + path +
                          "': timestamp_regression_tolerance must be >= 0");
      }
    }

    if (j.contains("embedding")) {
      const json& e = j["embedding"];
      config.embedding.append_raw_degrees =
          e.value("append_raw_degrees", false);
      config.embedding.pair = e.value("pair", false);
      const std::string emit = e.value("emit", std::string("final"));
      if (emit == "final") {
        config.embedding.emit = EmitMode::kFinal;
      } else if (emit == "per-event") {
        config.embedding.emit = EmitMode::kPerEvent;
      } else {
        throw ConfigError("config '" + path + "': unknown emit mode '" + emit +
                          "' (want 'final' or 'per-event')");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return config;
}

void save_binning(const std::string& path, const FeatureSchema& schema,
                  const BinningSpec& binning) {
  binning.validate_against(schema);
  std::ofstream out(path);
  if (!out) {
    throw PersistenceError("cannot write binning file '" + path + "'");
  }
  out << binning_to_json(schema, binning).dump(2) << "\n";
  if (!out) {
    throw PersistenceError("failed writing binning file '" + path + "'");
  }
}

BinningSpec load_binning(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open binning file '" + path + "'");
  }
  json j;
  try {
    in >> j;
    return binning_from_json(j, schema, "binning '" + path + "'");
  } catch (const json::exception& e) {
    throw ConfigError("binning '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Edge streams
// ---------------------------------------------------------------------------

struct EdgeStreamReader::Impl {
  std::string path;
  const FeatureSchema* schema = nullptr;
  std::optional<double> order_tolerance;
  std::ifstream in;
  bool jsonl = false;
  std::size_t line_no = 0;
  std::optional<double> max_ts;

  // CSV column mapping
  std::size_t src_col = 0, dst_col = 0, ts_col = 0;
  std::vector<std::size_t> feature_cols;  // per edge feature
  std::size_t min_columns = 0;

  std::string where() const {
    return path + " line " + std::to_string(line_no);
  }

  void read_csv_header() {
    std::string header;
    if (!std::getline(in, header)) {
      throw DataError(path + ": empty stream file");
    }
    ++line_no;
    const std::vector<std::string> cols = split_csv(strip_eol(header));
    auto find_col = [&](std::initializer_list<const char*> names)
        -> std::optional<std::size_t> {
      for (const char* name : names) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          if (cols[c] == name) return c;
        }
      }
      return std::nullopt;
    };
    const auto src = find_col({"src", "source_id", "source"});
    const auto dst = find_col({"dst", "destination_id", "destination"});
    const auto ts = find_col({"ts", "timestamp"});
    if (!src || !dst || !ts) {
      throw DataError(path + ": header must name src/source_id, "
                             "dst/destination_id and ts/timestamp columns");
    }
    src_col = *src;
    dst_col = *dst;
    ts_col = *ts;
    min_columns = std::max({src_col, dst_col, ts_col}) + 1;
    for (std::size_t idx : schema->edge_feature_indices()) {
      const std::string& name = schema->at(idx).name;
      const auto col = find_col({name.c_str()});
      if (!col) {
        throw DataError(path + ": header is missing feature column '" + name +
                        "'");
      }
      feature_cols.push_back(*col);
      min_columns = std::max(min_columns, *col + 1);
    }
  }

  std::optional<EdgeEvent> next_csv() {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      line = strip_eol(line);
      if (line.empty()) continue;
      const std::vector<std::string> cells = split_csv(line);
      if (cells.size() < min_columns) {
        throw DataError(where() + ": expected at least " +
                        std::to_string(min_columns) + " columns, got " +
                        std::to_string(cells.size()));
      }
      EdgeEvent event;
      event.source_id = cells[src_col];
      event.destination_id = cells[dst_col];
      event.timestamp =
          parse_strict_double(cells[ts_col], where() + " field 'timestamp'");
      const auto& indices = schema->edge_feature_indices();
      event.values.reserve(indices.size());
      for (std::size_t i = 0; i < indices.size(); ++i) {
        const FeatureDef& def = schema->at(indices[i]);
        const std::string& cell = cells[feature_cols[i]];
        if (def.kind == FeatureKind::kNumerical) {
          event.values.emplace_back(parse_strict_double(
              cell, where() + " field '" + def.name + "'"));
        } else {
          event.values.emplace_back(cell);
        }
      }
      return event;
    }
    return std::nullopt;
  }

  std::optional<EdgeEvent> next_jsonl() {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      line = strip_eol(line);
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw DataError(where() + ": " + e.what());
      }
      auto fetch = [&](std::initializer_list<const char*> names) -> const json* {
        for (const char* name : names) {
          if (j.contains(name)) return &j[name];
        }
        return nullptr;
      };
      const json* src = fetch({"src", "source_id", "source"});
      const json* dst = fetch({"dst", "destination_id", "destination"});
      const json* ts = fetch({"ts", "timestamp"});
      if (!src || !dst || !ts) {
        throw DataError(where() +
                        ": object needs src/dst/ts (or the long names)");
      }
      EdgeEvent event;
      try {
        event.source_id =
            src->is_string() ? src->get<std::string>() : src->dump();
        event.destination_id =
            dst->is_string() ? dst->get<std::string>() : dst->dump();
        event.timestamp = ts->get<double>();
        for (std::size_t idx : schema->edge_feature_indices()) {
          const FeatureDef& def = schema->at(idx);
          if (!j.contains(def.name)) {
            throw DataError(where() + ": missing feature '" + def.name + "'");
          }
          const json& v = j[def.name];
          if (def.kind == FeatureKind::kNumerical) {
            if (!v.is_number()) {
              throw DataError(where() + ": feature '" + def.name +
                              "' must be a number");
            }
            event.values.emplace_back(v.get<double>());
          } else {
            if (!v.is_string()) {
              throw DataError(where() + ": feature '" + def.name +
                              "' must be a string");
            }
            event.values.emplace_back(v.get<std::string>());
          }
        }
      } catch (const json::exception& e) {
        throw DataError(where() + ": " + e.what());
      }
      return event;
    }
    return std::nullopt;
  }

  std::optional<EdgeEvent> next() {
    std::optional<EdgeEvent> event = jsonl ? next_jsonl() : next_csv();
    if (event.has_value() && order_tolerance.has_value() &&
        max_ts.has_value() &&
        event->timestamp < *max_ts - *order_tolerance) {
      std::ostringstream msg;
      msg << where() << ": timestamp " << event->timestamp
          << " regresses behind " << *max_ts << " beyond tolerance "
          << *order_tolerance;
      throw OrderedStreamError(msg.str());
    }
    if (event.has_value() &&
        (!max_ts.has_value() || event->timestamp > *max_ts)) {
      max_ts = event->timestamp;
    }
    return event;
  }
};

EdgeStreamReader::EdgeStreamReader(const std::string& path,
                                   const FeatureSchema& schema,
                                   std::optional<double> order_tolerance)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  impl_->schema = &schema;
  impl_->order_tolerance = order_tolerance;
  impl_->in.open(path);
  if (!impl_->in) {
    throw DataError("cannot open stream file '" + path + "'");
  }
  // sniff: a JSONL stream's first non-space byte is '{'
  int c;
  while ((c = impl_->in.peek()) != EOF &&
         (c == ' ' || c == '\t' || c == '\n' || c == '\r')) {
    impl_->in.get();
  }
  impl_->jsonl = (c == '{');
  if (!impl_->jsonl) {
    impl_->read_csv_header();
  }
}

EdgeStreamReader::~EdgeStreamReader() = default;

std::optional<EdgeEvent> EdgeStreamReader::next() { return impl_->next(); }

std::size_t EdgeStreamReader::line() const { return impl_->line_no; }

std::vector<EdgeEvent> read_edge_stream(const std::string& path,
                                        const FeatureSchema& schema,
                                        std::optional<double> order_tolerance) {
  EdgeStreamReader reader(path, schema, order_tolerance);
  std::vector<EdgeEvent> events;
  while (auto event = reader.next()) {
    events.push_back(std::move(*event));
  }
  return events;
}

void write_edge_stream(const std::string& path,
                       std::span<const EdgeEvent> events,
                       const FeatureSchema& schema) {
  std::ofstream out(path);
  if (!out) {
    throw PersistenceError("cannot write stream file '" + path + "'");
  }
  out << "src,dst,ts";
  for (std::size_t idx : schema.edge_feature_indices()) {
    out << ',' << schema.at(idx).name;
  }
  out << '\n';
  for (const EdgeEvent& e : events) {
    out << e.source_id << ',' << e.destination_id << ','
        << render_double(e.timestamp);
    for (const FeatureValue& v : e.values) {
      out << ',';
      if (const double* x = std::get_if<double>(&v)) {
        out << render_double(*x);
      } else {
        out << std::get<std::string>(v);
      }
    }
    out << '\n';
  }
  if (!out) {
    throw PersistenceError("failed writing stream file '" + path + "'");
  }
}

// ---------------------------------------------------------------------------
// Embedding output
// ---------------------------------------------------------------------------

EmbeddingWriter::EmbeddingWriter(std::ostream& sink,
                                 std::span<const std::string> entity_columns,
                                 std::span<const std::string> value_labels)
    : sink_(sink),
      entity_width_(entity_columns.size()),
      value_width_(value_labels.size()) {
  bool first = true;
  for (const std::string& c : entity_columns) {
    if (!first) sink_ << ',';
    sink_ << c;
    first = false;
  }
  for (const std::string& l : value_labels) {
    if (!first) sink_ << ',';
    sink_ << l;
    first = false;
  }
  sink_ << '\n';
}

void EmbeddingWriter::write_row(std::span<const std::string> entity,
                                std::span<const double> values) {
  if (entity.size() != entity_width_ || values.size() != value_width_) {
    throw StructuralError("embedding row shape does not match the header");
  }
  bool first = true;
  for (const std::string& e : entity) {
    if (!first) sink_ << ',';
    sink_ << e;
    first = false;
  }
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    if (!first) sink_ << ',';
    sink_ << buf;
    first = false;
  }
  sink_ << '\n';
  ++rows_;
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

namespace {

constexpr int kSnapshotFormatVersion = 1;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

json clock_to_json(const DegreeClock& clock) {
  return json{{"in_degree", clock.in_degree},
              {"out_degree", clock.out_degree},
              {"last_any", optional_to_json(clock.last_any_event_time)},
              {"last_in", optional_to_json(clock.last_in_event_time)},
              {"last_out", optional_to_json(clock.last_out_event_time)}};
}

DegreeClock clock_from_json(const json& j) {
  DegreeClock clock;
  clock.in_degree = j.at("in_degree").get<double>();
  clock.out_degree = j.at("out_degree").get<double>();
  clock.last_any_event_time = optional_from_json(j.at("last_any"));
  clock.last_in_event_time = optional_from_json(j.at("last_in"));
  clock.last_out_event_time = optional_from_json(j.at("last_out"));
  return clock;
}

json snapshot_header(const char* kind, const ConfigHashes& hashes,
                     std::optional<double> last_event_time,
                     std::uint64_t events_applied) {
  return json{{"format_version", kSnapshotFormatVersion},
              {"kind", kind},
              {"schema_hash", hashes.schema_hash},
              {"binning_hash", hashes.binning_hash},
              {"config_hash", hashes.config_hash},
              {"last_event_time", optional_to_json(last_event_time)},
              {"events_applied", events_applied}};
}

json load_snapshot_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw PersistenceError("cannot open snapshot '" + path + "'");
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw PersistenceError("snapshot '" + path + "': " + e.what());
  }
}

void check_snapshot_header(const json& j, const std::string& path,
                           const char* kind, const ConfigHashes& want) {
  const int version = j.value("format_version", -1);
  if (version != kSnapshotFormatVersion) {
    throw PersistenceError("snapshot '" + path + "': format version " +
                           std::to_string(version) + " is not supported");
  }
  const std::string file_kind = j.value("kind", std::string());
  if (file_kind != kind) {
    throw PersistenceError("snapshot '" + path + "' holds " + file_kind +
                           " state, expected " + kind);
  }
  auto check_hash = [&](const char* key, const std::string& expected,
                        const char* what) {
    const std::string got = j.value(key, std::string());
    if (got != expected) {
      throw PersistenceError("snapshot '" + path + "' was written with a "
                             "different " + std::string(what) + " (hash " +
                             got + ", current " + expected + "); refusing to "
                             "restore");
    }
  };
  check_hash("schema_hash", want.schema_hash, "feature schema");
  check_hash("binning_hash", want.binning_hash, "binning spec");
  check_hash("config_hash", want.config_hash, "discount configuration");
}

}  // namespace

ConfigHashes compute_hashes(const FeatureSchema& schema,
                            const BinningSpec& binning,
                            const DiscountConfig& discounts) {
  ConfigHashes hashes;
  hashes.schema_hash = fnv1a_hex(schema_to_json(schema).dump());
  hashes.binning_hash = fnv1a_hex(binning_to_json(schema, binning).dump());
  hashes.config_hash = fnv1a_hex(discounts_to_json(discounts).dump());
  return hashes;
}

void save_snapshot(const std::string& path, const SprintEngine& engine) {
  const ConfigHashes hashes =
      compute_hashes(engine.schema(), engine.binning(), engine.config());
  json j = snapshot_header("full", hashes, engine.last_event_time(),
                           engine.events_applied());
  json nodes = json::array();
  for (std::size_t i = 0; i < engine.node_count(); ++i) {
    const NodeState& state = engine.state_at(i);
    json n = clock_to_json(state.clock);
    n["id"] = engine.node_id(i);
    n["bins"] = state.bins;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);

  std::ofstream out(path);
  if (!out) {
    throw PersistenceError("cannot write snapshot '" + path + "'");
  }
  out << j.dump() << "\n";
  if (!out) {
    throw PersistenceError("failed writing snapshot '" + path + "'");
  }
}

SprintEngine restore_snapshot(const std::string& path,
                              const FeatureSchema& schema,
                              const BinningSpec& binning,
                              const DiscountConfig& discounts,
                              EngineOptions options) {
  const json j = load_snapshot_json(path);
  check_snapshot_header(j, path, "full",
                        compute_hashes(schema, binning, discounts));

  SprintEngine engine(schema, binning, discounts, options);
  try {
    for (const json& n : j.at("nodes")) {
      NodeState state;
      state.bins = n.at("bins").get<std::vector<double>>();
      state.clock = clock_from_json(n);
      engine.import_node(n.at("id").get<std::string>(), std::move(state));
    }
    engine.set_stream_position(optional_from_json(j.at("last_event_time")),
                               j.at("events_applied").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw PersistenceError("snapshot '" + path + "': " + e.what());
  }
  return engine;
}

void save_sketch_snapshot(const std::string& path,
                          const sketch::SketchEngine& engine) {
  const ConfigHashes hashes =
      compute_hashes(engine.schema(), engine.binning(), engine.config());
  json j = snapshot_header("sketch", hashes, engine.last_event_time(),
                           engine.events_applied());
  j["sketch"] = json{{"k", engine.planes().k()},
                     {"seed", engine.planes().seed()}};
  json nodes = json::array();
  for (std::size_t i = 0; i < engine.node_count(); ++i) {
    const sketch::SketchState& state = engine.state_at(i);
    json n = clock_to_json(state.clock);
    n["id"] = engine.node_id(i);
    n["theta"] = state.theta;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);

  std::ofstream out(path);
  if (!out) {
    throw PersistenceError("cannot write snapshot '" + path + "'");
  }
  out << j.dump() << "\n";
  if (!out) {
    throw PersistenceError("failed writing snapshot '" + path + "'");
  }
}

sketch::SketchEngine restore_sketch_snapshot(const std::string& path,
                                             const FeatureSchema& schema,
                                             const BinningSpec& binning,
                                             const DiscountConfig& discounts,
                                             EngineOptions options) {
  const json j = load_snapshot_json(path);
  check_snapshot_header(j, path, "sketch",
                        compute_hashes(schema, binning, discounts));
  try {
    const json& s = j.at("sketch");
    sketch::SketchEngine engine(schema, binning, discounts,
                                s.at("k").get<std::size_t>(),
                                s.at("seed").get<std::uint64_t>(), options);
    for (const json& n : j.at("nodes")) {
      sketch::SketchState state;
      state.theta = n.at("theta").get<std::vector<double>>();
      state.clock = clock_from_json(n);
      engine.import_node(n.at("id").get<std::string>(), std::move(state));
    }
    engine.set_stream_position(optional_from_json(j.at("last_event_time")),
                               j.at("events_applied").get<std::uint64_t>());
    return engine;
  } catch (const json::exception& e) {
    throw PersistenceError("snapshot '" + path + "': " + e.what());
  }
}

}  // namespace sprint::io
