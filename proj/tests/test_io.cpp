#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sprint/core.hpp"
#include "sprint/engine.hpp"
#include "sprint/io.hpp"
#include "sprint/sketch.hpp"
#include "sprint/synthetic.hpp"

using namespace sprint;
namespace fs = std::filesystem;

namespace {

// Scratch directory wiped when the test ends.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("sprint_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

FeatureSchema mixed_schema() {
  return FeatureSchema(
      {{"amount", FeatureKind::kNumerical, FeatureSource::kEdge},
       {"channel", FeatureKind::kCategorical, FeatureSource::kEdge}});
}

}  // namespace

TEST_CASE("written streams read back value for value") {
  TempDir dir;
  const FeatureSchema schema = mixed_schema();
  std::vector<EdgeEvent> events;
  const double values[] = {0.1, -3.75, 1e-9, 1234567.125};
  for (int i = 0; i < 4; ++i) {
    EdgeEvent e;
    e.source_id = "n" + std::to_string(i);
    e.destination_id = "n" + std::to_string(i + 1);
    e.timestamp = 0.25 * i + 0.1;
    e.values = {FeatureValue(values[i]),
                FeatureValue(std::string(i % 2 == 0 ? "web" : "app"))};
    events.push_back(e);
  }

  const std::string path = dir.file("stream.csv");
  io::write_edge_stream(path, events, schema);
  const std::vector<EdgeEvent> back = io::read_edge_stream(path, schema);
  REQUIRE(back.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(back[i].source_id == events[i].source_id);
    CHECK(back[i].destination_id == events[i].destination_id);
    CHECK(back[i].timestamp == events[i].timestamp);
    CHECK(std::get<double>(back[i].values[0]) ==
          std::get<double>(events[i].values[0]));
    CHECK(std::get<std::string>(back[i].values[1]) ==
          std::get<std::string>(events[i].values[1]));
  }
}

TEST_CASE("CSV headers may use the long column aliases in any order") {
  TempDir dir;
  const std::string path = dir.file("alias.csv");
  write_text(path,
             "channel,timestamp,destination,source,amount,extra\n"
             "web,1.5,v,u,2.25,ignored\n");
  const std::vector<EdgeEvent> events =
      io::read_edge_stream(path, mixed_schema());
  REQUIRE(events.size() == 1);
  CHECK(events[0].source_id == "u");
  CHECK(events[0].destination_id == "v");
  CHECK(events[0].timestamp == 1.5);
  CHECK(std::get<double>(events[0].values[0]) == 2.25);
  CHECK(std::get<std::string>(events[0].values[1]) == "web");
}

TEST_CASE("JSONL streams parse line by line") {
  TempDir dir;
  const std::string path = dir.file("stream.jsonl");
  write_text(path,
             "{\"src\": \"a\", \"dst\": \"b\", \"ts\": 1.0, "
             "\"amount\": 3.5, \"channel\": \"web\"}\n"
             "\n"
             "{\"source_id\": \"b\", \"destination_id\": \"c\", "
             "\"timestamp\": 2.0, \"amount\": 4.5, \"channel\": \"pos\"}\n");
  const std::vector<EdgeEvent> events =
      io::read_edge_stream(path, mixed_schema());
  REQUIRE(events.size() == 2);
  CHECK(events[1].source_id == "b");
  CHECK(std::get<double>(events[1].values[0]) == 4.5);
}

TEST_CASE("parse failures name the file, line, and field") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");
  write_text(path,
             "src,dst,ts,amount,channel\n"
             "a,b,1.0,2.5,web\n"
             "b,c,2.0,not_a_number,app\n");
  try {
    io::read_edge_stream(path, mixed_schema());
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("amount") != std::string::npos);
  }
}

TEST_CASE("a header missing required columns is rejected up front") {
  TempDir dir;
  const std::string path = dir.file("noheader.csv");
  write_text(path, "a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(io::read_edge_stream(path, mixed_schema()), DataError);

  const std::string missing_feature = dir.file("nofeat.csv");
  write_text(missing_feature, "src,dst,ts,amount\nu,v,1.0,2.0\n");
  CHECK_THROWS_AS(io::read_edge_stream(missing_feature, mixed_schema()),
                  DataError);
}

TEST_CASE("the reader can enforce stream order at parse time") {
  TempDir dir;
  const std::string path = dir.file("unordered.csv");
  write_text(path,
             "src,dst,ts,amount,channel\n"
             "a,b,5.0,1.0,web\n"
             "b,c,4.0,1.0,web\n");
  // without a tolerance the reader stays permissive
  CHECK_NOTHROW(io::read_edge_stream(path, mixed_schema()));
  CHECK_THROWS_AS(io::read_edge_stream(path, mixed_schema(), 0.5),
                  OrderedStreamError);
  CHECK_NOTHROW(io::read_edge_stream(path, mixed_schema(), 2.0));
}

TEST_CASE("run configs parse schema, discounts, sketch, and output shape") {
  TempDir dir;
  const std::string path = dir.file("config.json");
  write_text(path, R"({
    "schema": {"features": [
      {"name": "amount", "kind": "numerical"},
      {"name": "channel", "kind": "categorical"},
      {"name": "gap", "kind": "numerical", "source": "time_delta"}
    ]},
    "discounts": {
      "alpha": {"mode": "exp_time_decay", "tau": 3.5},
      "beta": {"mode": "constant", "value": 0.25},
      "degree_timescale": 7.0
    },
    "sketch": {"enabled": true, "k": 24, "seed": 11},
    "stream": {"timestamp_regression_tolerance": 0.5},
    "embedding": {"append_raw_degrees": true, "pair": true, "emit": "per-event"}
  })");
  const io::RunConfig cfg = io::load_run_config(path);
  CHECK(cfg.schema.size() == 3);
  CHECK(cfg.schema.at(2).source == FeatureSource::kDerivedTimeDelta);
  CHECK(cfg.discounts.alpha.kind == DiscountMode::Kind::kExpTimeDecay);
  CHECK(cfg.discounts.alpha.value == 3.5);
  CHECK(cfg.discounts.beta.value == 0.25);
  CHECK(cfg.discounts.degree_timescale == 7.0);
  CHECK(cfg.sketch.enabled);
  CHECK(cfg.sketch.k == 24);
  CHECK(cfg.timestamp_regression_tolerance == 0.5);
  CHECK(cfg.embedding.pair);
  CHECK(cfg.embedding.emit == io::EmitMode::kPerEvent);
  CHECK(!cfg.binning.has_value());
}

TEST_CASE("configs without a schema are refused") {
  TempDir dir;
  const std::string path = dir.file("empty.json");
  write_text(path, "{}");
  CHECK_THROWS_AS(io::load_run_config(path), ConfigError);

  const std::string invalid = dir.file("invalid.json");
  write_text(invalid, "{ not json");
  CHECK_THROWS_AS(io::load_run_config(invalid), ConfigError);
}

TEST_CASE("a binning_file entry resolves relative to the config") {
  TempDir dir;
  const FeatureSchema schema = mixed_schema();
  BinningSpec binning(
      {BinningEntry{NumericalBins{{1.0, 2.0}}},
       BinningEntry{binning::fit_categorical_bins({"web", "app"}, 4)}});
  io::save_binning(dir.file("bins.json"), schema, binning);

  write_text(dir.file("config.json"), R"({
    "schema": {"features": [
      {"name": "amount", "kind": "numerical"},
      {"name": "channel", "kind": "categorical"}
    ]},
    "binning_file": "bins.json"
  })");
  const io::RunConfig cfg = io::load_run_config(dir.file("config.json"));
  REQUIRE(cfg.binning.has_value());
  CHECK(cfg.binning->at(0).numerical().cut_points ==
        std::vector<double>{1.0, 2.0});
  CHECK(cfg.binning->at(1).categorical().find("app").has_value());
}

TEST_CASE("binning files round trip and validate against the schema") {
  TempDir dir;
  const FeatureSchema schema = mixed_schema();
  BinningSpec binning(
      {BinningEntry{NumericalBins{{-1.5, 0.0, 2.5}}},
       BinningEntry{binning::fit_categorical_bins({"a", "a", "b"}, 3)}});
  const std::string path = dir.file("bins.json");
  io::save_binning(path, schema, binning);
  const BinningSpec back = io::load_binning(path, schema);
  CHECK(back.at(0).numerical().cut_points == binning.at(0).numerical().cut_points);
  CHECK(back.at(1).categorical().token_bins ==
        binning.at(1).categorical().token_bins);

  FeatureSchema other(
      {{"different", FeatureKind::kNumerical, FeatureSource::kEdge},
       {"channel", FeatureKind::kCategorical, FeatureSource::kEdge}});
  CHECK_THROWS_AS(io::load_binning(path, other), ConfigError);
}

TEST_CASE("embedding rows stream out with a fixed header") {
  std::ostringstream sink;
  const std::vector<std::string> entity = {"node"};
  const std::vector<std::string> labels = {"f:bin_0", "f:bin_1"};
  io::EmbeddingWriter writer(sink, entity, labels);
  const std::string row_entity[] = {std::string("u")};
  const std::vector<double> values = {0.125, 0.875};
  writer.write_row(row_entity, values);
  CHECK(writer.rows_written() == 1);
  CHECK(sink.str() == "node,f:bin_0,f:bin_1\nu,0.125,0.875\n");

  const std::vector<double> wrong = {1.0};
  CHECK_THROWS_AS(writer.write_row(row_entity, wrong), StructuralError);
}

TEST_CASE("snapshots restore the exact engine state and resume cleanly") {
  TempDir dir;
  synthetic::StreamOptions opt;
  opt.n_events = 200;
  opt.n_nodes = 20;
  opt.seed = 13;
  DiscountConfig discounts;
  discounts.alpha = DiscountMode::exp_time_decay(2.0);
  discounts.beta = DiscountMode::constant(0.5);
  const synthetic::Fixture fx = synthetic::make_fixture(opt, discounts);

  SprintEngine engine(fx.schema, fx.binning, discounts);
  for (std::size_t i = 0; i < 150; ++i) engine.apply_edge(fx.events[i]);
  const std::string path = dir.file("state.json");
  io::save_snapshot(path, engine);

  SprintEngine restored =
      io::restore_snapshot(path, fx.schema, fx.binning, discounts);
  REQUIRE(restored.node_count() == engine.node_count());
  CHECK(restored.events_applied() == engine.events_applied());
  CHECK(restored.last_event_time() == engine.last_event_time());
  for (std::size_t i = 0; i < engine.node_count(); ++i) {
    CHECK(restored.node_id(i) == engine.node_id(i));
    CHECK(restored.state_at(i).bins == engine.state_at(i).bins);
  }

  for (std::size_t i = 150; i < fx.events.size(); ++i) {
    engine.apply_edge(fx.events[i]);
    restored.apply_edge(fx.events[i]);
  }
  for (std::size_t i = 0; i < engine.node_count(); ++i) {
    CHECK(restored.state_at(i).bins == engine.state_at(i).bins);
  }
}

TEST_CASE("snapshots written under a different setup are refused") {
  TempDir dir;
  const FeatureSchema schema = mixed_schema();
  BinningSpec binning(
      {BinningEntry{NumericalBins{{1.0}}},
       BinningEntry{binning::fit_categorical_bins({"web"}, 3)}});
  DiscountConfig discounts;
  discounts.alpha = DiscountMode::constant(0.5);
  discounts.beta = DiscountMode::constant(0.5);

  SprintEngine engine(schema, binning, discounts);
  EdgeEvent e;
  e.source_id = "u";
  e.destination_id = "v";
  e.timestamp = 1.0;
  e.values = {FeatureValue(2.0), FeatureValue(std::string("web"))};
  engine.apply_edge(e);
  const std::string path = dir.file("state.json");
  io::save_snapshot(path, engine);

  BinningSpec other_bins(
      {BinningEntry{NumericalBins{{9.0}}},
       BinningEntry{binning::fit_categorical_bins({"web"}, 3)}});
  CHECK_THROWS_AS(io::restore_snapshot(path, schema, other_bins, discounts),
                  PersistenceError);

  DiscountConfig other_discounts = discounts;
  other_discounts.beta = DiscountMode::constant(0.75);
  CHECK_THROWS_AS(io::restore_snapshot(path, schema, binning, other_discounts),
                  PersistenceError);

  // flip the stored format version
  std::string text = read_text(path);
  const std::size_t pos = text.find("\"format_version\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 18, "\"format_version\":9");
  write_text(path, text);
  CHECK_THROWS_AS(io::restore_snapshot(path, schema, binning, discounts),
                  PersistenceError);

  write_text(path, "{ garbage");
  CHECK_THROWS_AS(io::restore_snapshot(path, schema, binning, discounts),
                  PersistenceError);
}

TEST_CASE("sketch snapshots carry the plane parameters") {
  TempDir dir;
  synthetic::StreamOptions opt;
  opt.n_events = 120;
  opt.n_nodes = 15;
  opt.seed = 29;
  DiscountConfig discounts;
  discounts.alpha = DiscountMode::constant(0.6);
  discounts.beta = DiscountMode::exp_time_decay(3.0);
  const synthetic::Fixture fx = synthetic::make_fixture(opt, discounts);

  sketch::SketchEngine engine(fx.schema, fx.binning, discounts, 12, 555);
  for (const EdgeEvent& e : fx.events) engine.apply_edge(e);
  const std::string path = dir.file("sketch.json");
  io::save_sketch_snapshot(path, engine);

  sketch::SketchEngine restored =
      io::restore_sketch_snapshot(path, fx.schema, fx.binning, discounts);
  CHECK(restored.planes().k() == 12);
  CHECK(restored.planes().seed() == 555);
  REQUIRE(restored.node_count() == engine.node_count());
  for (std::size_t i = 0; i < engine.node_count(); ++i) {
    CHECK(restored.state_at(i).theta == engine.state_at(i).theta);
    CHECK(restored.state_at(i).clock.in_degree ==
          engine.state_at(i).clock.in_degree);
  }

  // a full snapshot is not a sketch snapshot
  SprintEngine full(fx.schema, fx.binning, discounts);
  full.apply_edge(fx.events[0]);
  const std::string full_path = dir.file("full.json");
  io::save_snapshot(full_path, full);
  CHECK_THROWS_AS(
      io::restore_sketch_snapshot(full_path, fx.schema, fx.binning, discounts),
      PersistenceError);
}
