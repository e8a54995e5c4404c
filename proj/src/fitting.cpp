#include "sprint/fitting.hpp"

#include <algorithm>
#include <unordered_map>

#include "sprint/engine.hpp"

namespace sprint::fitting {

namespace {

std::optional<double> gap_since(std::optional<double> last, double now) {
  if (!last.has_value()) return std::nullopt;
  return std::max(0.0, now - *last);
}

}  // namespace

FitReport fit_bins(std::span<const EdgeEvent> events,
                   const FeatureSchema& schema, const DiscountConfig& discounts,
                   const FitOptions& options) {
  if (options.train_fraction <= 0.0 || options.train_fraction > 1.0) {
    throw FitError("fit_bins: train_fraction must lie in (0,1]");
  }

  std::size_t n_train = events.size();
  if (options.train_cutoff.has_value()) {
    n_train = 0;
    while (n_train < events.size() &&
           events[n_train].timestamp <= *options.train_cutoff) {
      ++n_train;
    }
  } else {
    n_train = static_cast<std::size_t>(
        options.train_fraction * static_cast<double>(events.size()));
  }
  if (n_train == 0) {
    throw FitError("fit_bins: training prefix is empty");
  }
  const std::span<const EdgeEvent> train = events.subspan(0, n_train);

  // Per-feature raw value pools.
  std::vector<std::vector<double>> numeric_pool(schema.size());
  std::vector<std::vector<std::string>> token_pool(schema.size());

  const auto& edge_indices = schema.edge_feature_indices();
  const auto in_idx = schema.derived_index(FeatureSource::kDerivedInDegree);
  const auto out_idx = schema.derived_index(FeatureSource::kDerivedOutDegree);
  const auto dt_idx = schema.derived_index(FeatureSource::kDerivedTimeDelta);
  const bool needs_replay =
      in_idx.has_value() || out_idx.has_value() || dt_idx.has_value();

  std::unordered_map<NodeId, DegreeClock> clocks;

  for (const EdgeEvent& event : train) {
    validate_event(event, schema);
    for (std::size_t i = 0; i < event.values.size(); ++i) {
      const std::size_t f = edge_indices[i];
      if (schema.at(f).kind == FeatureKind::kNumerical) {
        numeric_pool[f].push_back(std::get<double>(event.values[i]));
      } else {
        token_pool[f].push_back(std::get<std::string>(event.values[i]));
      }
    }
    if (!needs_replay) continue;

    // Collect exactly the values the engine would bin: the node's own gap
    // and its post-update degree counters.
    const double ts = event.timestamp;
    const bool self_loop = event.source_id == event.destination_id;
    auto visit = [&](const NodeId& id, bool updates_out, bool updates_in) {
      DegreeClock& clock = clocks[id];
      const std::optional<double> dt = gap_since(clock.last_any_event_time, ts);
      if (dt_idx.has_value() && dt.has_value()) {
        numeric_pool[*dt_idx].push_back(*dt);
      }
      const double new_out =
          updates_out ? update_degree(clock.out_degree,
                                      gap_since(clock.last_out_event_time, ts),
                                      discounts.degree_timescale)
                      : clock.out_degree;
      const double new_in =
          updates_in ? update_degree(clock.in_degree,
                                     gap_since(clock.last_in_event_time, ts),
                                     discounts.degree_timescale)
                     : clock.in_degree;
      if (out_idx.has_value()) numeric_pool[*out_idx].push_back(new_out);
      if (in_idx.has_value()) numeric_pool[*in_idx].push_back(new_in);

      if (updates_out) {
        clock.out_degree = new_out;
        clock.last_out_event_time = ts;
      }
      if (updates_in) {
        clock.in_degree = new_in;
        clock.last_in_event_time = ts;
      }
      clock.last_any_event_time = ts;
    };
    if (self_loop) {
      visit(event.source_id, true, true);
    } else {
      visit(event.source_id, true, false);
      visit(event.destination_id, false, true);
    }
  }

  FitReport report;
  report.events_used = n_train;
  std::vector<BinningEntry> entries(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const FeatureDef& def = schema.at(f);
    BinningEntry entry;
    if (def.kind == FeatureKind::kCategorical) {
      if (token_pool[f].empty()) {
        throw FitError("fit_bins: no observed values for feature '" +
                       def.name + "'");
      }
      entry.bins =
          binning::fit_categorical_bins(token_pool[f], options.max_categories);
    } else {
      if (numeric_pool[f].empty()) {
        throw FitError("fit_bins: no observed values for feature '" +
                       def.name + "'");
      }
      entry.bins = binning::fit_quantile_bins(numeric_pool[f], options.n_bins);
    }
    const std::size_t count = entry.bin_count();
    report.bins_per_feature.push_back(count);
    if (count == 1) {
      report.warnings.push_back("feature '" + def.name +
                                "' is constant on the training prefix and "
                                "collapses to a single bin");
    }
    entries[f] = std::move(entry);
  }
  report.binning = BinningSpec(std::move(entries));
  report.binning.validate_against(schema);
  return report;
}

}  // namespace sprint::fitting
