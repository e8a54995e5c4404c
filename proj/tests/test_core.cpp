#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sprint/core.hpp"

using namespace sprint;

namespace {

FeatureSchema one_numerical() {
  return FeatureSchema({{"f", FeatureKind::kNumerical, FeatureSource::kEdge}});
}

BinningSpec one_cut() {
  return BinningSpec({BinningEntry{NumericalBins{{0.0}}}});
}

}  // namespace

TEST_CASE("schema rejects duplicate feature names") {
  CHECK_THROWS_AS(FeatureSchema({{"x", FeatureKind::kNumerical, FeatureSource::kEdge},
                                 {"x", FeatureKind::kNumerical, FeatureSource::kEdge}}),
                  ConfigError);
}

TEST_CASE("schema allows at most one feature per derived source") {
  CHECK_THROWS_AS(
      FeatureSchema({{"a", FeatureKind::kNumerical, FeatureSource::kDerivedTimeDelta},
                     {"b", FeatureKind::kNumerical, FeatureSource::kDerivedTimeDelta}}),
      ConfigError);
}

TEST_CASE("derived features must be numerical") {
  CHECK_THROWS_AS(
      FeatureSchema({{"d", FeatureKind::kCategorical, FeatureSource::kDerivedInDegree}}),
      ConfigError);
}

TEST_CASE("schema tracks edge feature order and derived indices") {
  FeatureSchema schema({{"a", FeatureKind::kNumerical, FeatureSource::kEdge},
                        {"deg", FeatureKind::kNumerical, FeatureSource::kDerivedInDegree},
                        {"b", FeatureKind::kCategorical, FeatureSource::kEdge}});
  CHECK(schema.edge_feature_count() == 2);
  CHECK(schema.edge_feature_indices() == std::vector<std::size_t>{0, 2});
  CHECK(schema.derived_index(FeatureSource::kDerivedInDegree) == std::size_t{1});
  CHECK(!schema.derived_index(FeatureSource::kDerivedTimeDelta).has_value());
  CHECK(schema.index_of("b") == std::size_t{2});
}

TEST_CASE("validate_event checks count, timestamp, and finiteness") {
  const FeatureSchema schema = one_numerical();
  EdgeEvent e;
  e.source_id = "u";
  e.destination_id = "v";
  e.timestamp = 1.0;
  e.values = {FeatureValue(2.0)};
  CHECK_NOTHROW(validate_event(e, schema));

  EdgeEvent wrong_count = e;
  wrong_count.values.clear();
  CHECK_THROWS_AS(validate_event(wrong_count, schema), StructuralError);

  EdgeEvent bad_ts = e;
  bad_ts.timestamp = -1.0;
  CHECK_THROWS_AS(validate_event(bad_ts, schema), DataError);
  bad_ts.timestamp = std::nan("");
  CHECK_THROWS_AS(validate_event(bad_ts, schema), DataError);

  EdgeEvent bad_value = e;
  bad_value.values = {FeatureValue(std::numeric_limits<double>::infinity())};
  CHECK_THROWS_AS(validate_event(bad_value, schema), DataError);

  EdgeEvent wrong_type = e;
  wrong_type.values = {FeatureValue(std::string("tok"))};
  CHECK_THROWS_AS(validate_event(wrong_type, schema), DataError);
}

TEST_CASE("binning entries must match schema kinds positionally") {
  FeatureSchema schema({{"a", FeatureKind::kCategorical, FeatureSource::kEdge}});
  BinningSpec numeric = one_cut();
  CHECK_THROWS_AS(numeric.validate_against(schema), StructuralError);
  BinningSpec empty;
  CHECK_THROWS_AS(empty.validate_against(schema), StructuralError);
}

TEST_CASE("cut points must increase strictly") {
  CHECK_THROWS_AS(BinningSpec({BinningEntry{NumericalBins{{1.0, 1.0}}}}),
                  ConfigError);
  CHECK_THROWS_AS(BinningSpec({BinningEntry{NumericalBins{{2.0, 1.0}}}}),
                  ConfigError);
}

TEST_CASE("discount parameters are range checked") {
  DiscountConfig c;
  c.alpha = DiscountMode::constant(1.5);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.alpha = DiscountMode::exp_time_decay(0.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.alpha = DiscountMode::exp_time_decay(2.0);
  c.degree_timescale = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.degree_timescale = 1.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("layout places features back to back with labels") {
  FeatureSchema schema({{"a", FeatureKind::kNumerical, FeatureSource::kEdge},
                        {"b", FeatureKind::kNumerical, FeatureSource::kEdge}});
  BinningSpec binning({BinningEntry{NumericalBins{{0.0, 1.0}}},
                       BinningEntry{NumericalBins{{5.0}}}});
  HistogramLayout layout(schema, binning);
  CHECK(layout.feature_count() == 2);
  CHECK(layout.total_bins() == 5);
  CHECK(layout.offset(0) == 0);
  CHECK(layout.offset(1) == 3);
  CHECK(layout.bin_count(1) == 2);
  CHECK(layout.labels()[0] == "a:bin_0");
  CHECK(layout.labels()[4] == "b:bin_1");

  const std::vector<double> flat = {1, 2, 3, 4, 5};
  const auto slice = layout.feature_slice(flat, 1);
  CHECK(slice.size() == 2);
  CHECK(slice[0] == 4.0);
}

TEST_CASE("pair embedding concatenates source then destination") {
  const FeatureSchema schema = one_numerical();
  const BinningSpec binning = one_cut();
  HistogramLayout layout(schema, binning);
  NodeState u{{1.0, 0.0}, {}};
  NodeState v{{0.0, 1.0}, {}};
  const Embedding pair = pair_embedding(u, v, layout);
  CHECK(pair.values == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  CHECK(pair.labels[0] == "src_f:bin_0");
  CHECK(pair.labels[3] == "dst_f:bin_1");
}

TEST_CASE("node embedding can append raw degree columns") {
  const FeatureSchema schema = one_numerical();
  HistogramLayout layout(schema, one_cut());
  NodeState s{{0.25, 0.75}, {}};
  s.clock.in_degree = 2.5;
  s.clock.out_degree = 0.5;
  const Embedding plain = node_embedding(s, layout);
  CHECK(plain.values.size() == 2);
  const Embedding with_degrees = node_embedding(s, layout, true);
  CHECK(with_degrees.values == std::vector<double>{0.25, 0.75, 2.5, 0.5});
  CHECK(with_degrees.labels[2] == "in_degree");
  CHECK(with_degrees.labels[3] == "out_degree");
}

TEST_CASE("normalization error flags negative entries even when sums are 1") {
  const FeatureSchema schema = one_numerical();
  HistogramLayout layout(schema, one_cut());
  NodeState ok{{0.5, 0.5}, {}};
  CHECK(normalization_error(ok, layout) == 0.0);
  NodeState drifted{{0.6, 0.4000001}, {}};
  CHECK(normalization_error(drifted, layout) == doctest::Approx(1e-7));
  NodeState negative{{1.5, -0.5}, {}};
  CHECK(normalization_error(negative, layout) >= 1.0);
}
