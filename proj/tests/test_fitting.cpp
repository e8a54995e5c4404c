#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "sprint/core.hpp"
#include "sprint/fitting.hpp"
#include "sprint/synthetic.hpp"

using namespace sprint;

namespace {

EdgeEvent edge(const char* u, const char* v, double ts, double value) {
  EdgeEvent e;
  e.source_id = u;
  e.destination_id = v;
  e.timestamp = ts;
  e.values = {FeatureValue(value)};
  return e;
}

DiscountConfig plain() {
  DiscountConfig c;
  c.alpha = DiscountMode::constant(0.5);
  c.beta = DiscountMode::constant(0.5);
  c.degree_timescale = 1.0;
  return c;
}

}  // namespace

TEST_CASE("a fraction split equals fitting on the literal prefix") {
  FeatureSchema schema({{"f", FeatureKind::kNumerical, FeatureSource::kEdge}});
  std::vector<EdgeEvent> events;
  for (int i = 0; i < 40; ++i) {
    events.push_back(edge("u", "v", i, std::sin(i * 0.7) * 10.0));
  }

  fitting::FitOptions by_fraction;
  by_fraction.n_bins = 4;
  by_fraction.train_fraction = 0.75;
  const fitting::FitReport a =
      fitting::fit_bins(events, schema, plain(), by_fraction);
  CHECK(a.events_used == 30);

  const std::vector<EdgeEvent> prefix(events.begin(), events.begin() + 30);
  fitting::FitOptions whole;
  whole.n_bins = 4;
  const fitting::FitReport b = fitting::fit_bins(prefix, schema, plain(), whole);
  CHECK(a.binning.at(0).numerical().cut_points ==
        b.binning.at(0).numerical().cut_points);
}

TEST_CASE("a timestamp cutoff bounds the training window") {
  FeatureSchema schema({{"f", FeatureKind::kNumerical, FeatureSource::kEdge}});
  const std::vector<EdgeEvent> events = {edge("a", "b", 1.0, 1.0),
                                         edge("b", "c", 2.0, 2.0),
                                         edge("c", "d", 3.0, 3.0),
                                         edge("d", "e", 10.0, 100.0)};
  fitting::FitOptions options;
  options.n_bins = 2;
  options.train_cutoff = 3.0;  // keeps ts <= 3, drops the outlier
  const fitting::FitReport report =
      fitting::fit_bins(events, schema, plain(), options);
  CHECK(report.events_used == 3);
  CHECK(report.binning.at(0).numerical().cut_points ==
        std::vector<double>{2.0});
}

TEST_CASE("empty or invalid training windows are refused") {
  FeatureSchema schema({{"f", FeatureKind::kNumerical, FeatureSource::kEdge}});
  const std::vector<EdgeEvent> events = {edge("a", "b", 5.0, 1.0)};

  fitting::FitOptions too_early;
  too_early.train_cutoff = 1.0;
  CHECK_THROWS_AS(fitting::fit_bins(events, schema, plain(), too_early),
                  FitError);

  fitting::FitOptions zero_fraction;
  zero_fraction.train_fraction = 0.0;
  CHECK_THROWS_AS(fitting::fit_bins(events, schema, plain(), zero_fraction),
                  FitError);

  fitting::FitOptions overfull;
  overfull.train_fraction = 1.5;
  CHECK_THROWS_AS(fitting::fit_bins(events, schema, plain(), overfull),
                  FitError);

  CHECK_THROWS_AS(fitting::fit_bins({}, schema, plain(), {}), FitError);
}

TEST_CASE("derived bins are fitted on the values the engine will bin") {
  FeatureSchema schema(
      {{"deg", FeatureKind::kNumerical, FeatureSource::kDerivedInDegree}});
  const std::vector<EdgeEvent> events = {EdgeEvent{"u", "v", 0.0, {}},
                                         EdgeEvent{"u", "v", 1.0, {}},
                                         EdgeEvent{"u", "v", 2.0, {}}};
  // per event both endpoints contribute an in-degree reading: u stays at 0,
  // v climbs 1, e^-1 + 1, (e^-1 + 1) e^-1 + 1
  fitting::FitOptions options;
  options.n_bins = 3;
  const fitting::FitReport report =
      fitting::fit_bins(events, schema, plain(), options);
  CHECK(report.binning.at(0).numerical().cut_points ==
        std::vector<double>{0.0, 1.0});
}

TEST_CASE("constant features come back with a warning and one bin") {
  FeatureSchema schema({{"f", FeatureKind::kNumerical, FeatureSource::kEdge},
                        {"g", FeatureKind::kNumerical, FeatureSource::kEdge}});
  std::vector<EdgeEvent> events;
  for (int i = 0; i < 10; ++i) {
    EdgeEvent e = edge("a", "b", i, 7.0);
    e.values.push_back(FeatureValue(static_cast<double>(i)));
    events.push_back(e);
  }
  const fitting::FitReport report =
      fitting::fit_bins(events, schema, plain(), {});
  CHECK(report.bins_per_feature[0] == 1);
  CHECK(report.bins_per_feature[1] > 1);
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("f") != std::string::npos);
}

TEST_CASE("categorical budgets cap the kept tokens") {
  FeatureSchema schema(
      {{"tok", FeatureKind::kCategorical, FeatureSource::kEdge}});
  std::vector<EdgeEvent> events;
  const char* tokens[] = {"a", "a", "a", "b", "b", "c"};
  for (int i = 0; i < 6; ++i) {
    EdgeEvent e;
    e.source_id = "u";
    e.destination_id = "v";
    e.timestamp = i;
    e.values = {FeatureValue(std::string(tokens[i]))};
    events.push_back(e);
  }
  fitting::FitOptions options;
  options.max_categories = 3;
  const fitting::FitReport report =
      fitting::fit_bins(events, schema, plain(), options);
  const CategoricalBins& bins = report.binning.at(0).categorical();
  CHECK(bins.bin_count() == 3);
  CHECK(bins.find("a").has_value());
  CHECK(bins.find("b").has_value());
  CHECK(!bins.find("c").has_value());
}
