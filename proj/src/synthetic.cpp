#include "sprint/synthetic.hpp"

#include <cstdio>
#include <random>

#include "sprint/fitting.hpp"

namespace sprint::synthetic {

FeatureSchema make_schema(const StreamOptions& options) {
  std::vector<FeatureDef> defs;
  for (std::size_t i = 0; i < options.n_numerical; ++i) {
    defs.push_back({"num_" + std::to_string(i), FeatureKind::kNumerical,
                    FeatureSource::kEdge});
  }
  for (std::size_t i = 0; i < options.n_categorical; ++i) {
    defs.push_back({"cat_" + std::to_string(i), FeatureKind::kCategorical,
                    FeatureSource::kEdge});
  }
  if (options.with_derived) {
    defs.push_back({"in_deg", FeatureKind::kNumerical,
                    FeatureSource::kDerivedInDegree});
    defs.push_back({"out_deg", FeatureKind::kNumerical,
                    FeatureSource::kDerivedOutDegree});
    defs.push_back({"dt", FeatureKind::kNumerical,
                    FeatureSource::kDerivedTimeDelta});
  }
  return FeatureSchema(std::move(defs));
}

std::vector<EdgeEvent> make_events(const FeatureSchema& schema,
                                   const StreamOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> node_pick(0,
                                                       options.n_nodes - 1);
  std::exponential_distribution<double> gap(1.0 / options.mean_gap);
  std::lognormal_distribution<double> skewed(0.0, 1.0);
  std::normal_distribution<double> bell(10.0, 5.0);

  std::vector<std::string> node_ids(options.n_nodes);
  for (std::size_t i = 0; i < options.n_nodes; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "n%05zu", i);
    node_ids[i] = buf;
  }

  std::vector<EdgeEvent> events;
  events.reserve(options.n_events);
  double t = 0.0;
  std::size_t novel_counter = 0;
  for (std::size_t i = 0; i < options.n_events; ++i) {
    if (i > 0 && unit(rng) >= options.burst_fraction) {
      t += gap(rng);
    }
    EdgeEvent e;
    e.timestamp = t;
    const std::size_t src = node_pick(rng);
    std::size_t dst = node_pick(rng);
    if (unit(rng) < options.self_loop_fraction) {
      dst = src;
    } else {
      while (dst == src && options.n_nodes > 1) dst = node_pick(rng);
    }
    e.source_id = node_ids[src];
    e.destination_id = node_ids[dst];

    for (std::size_t f = 0; f < options.n_numerical; ++f) {
      e.values.emplace_back(f % 2 == 0 ? skewed(rng) : bell(rng));
    }
    for (std::size_t f = 0; f < options.n_categorical; ++f) {
      if (unit(rng) < options.novel_token_fraction) {
        e.values.emplace_back("novel_" + std::to_string(novel_counter++));
      } else {
        // quadratic skew toward low token indices
        const double u = unit(rng);
        const std::size_t tok = static_cast<std::size_t>(
            u * u * static_cast<double>(options.token_pool));
        e.values.emplace_back("tok_" + std::to_string(tok));
      }
    }
    events.push_back(std::move(e));
  }
  // silence unused warning when the schema carries no edge features
  (void)schema;
  return events;
}

Fixture make_fixture(const StreamOptions& options,
                     const DiscountConfig& discounts) {
  Fixture fx;
  fx.schema = make_schema(options);
  fx.events = make_events(fx.schema, options);
  fitting::FitOptions fit;
  fit.train_fraction = 0.5;
  fx.binning =
      fitting::fit_bins(fx.events, fx.schema, discounts, fit).binning;
  return fx;
}

}  // namespace sprint::synthetic
