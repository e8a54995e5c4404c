#include "sprint/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace sprint::oracle {

namespace {

// Deliberately linear-scan lookups, implemented apart from the binning
// module so a bug in either side shows up as a disagreement in tests.
std::size_t slow_numerical_bin(double x, const NumericalBins& bins) {
  std::size_t b = 0;
  for (double cut : bins.cut_points) {
    if (cut <= x) ++b;
  }
  return b;
}

std::size_t slow_edge_bin(const FeatureValue& v, const BinningEntry& entry) {
  if (entry.is_numerical()) {
    return slow_numerical_bin(std::get<double>(v), entry.numerical());
  }
  const std::string& token = std::get<std::string>(v);
  for (const auto& [tok, bin] : entry.categorical().token_bins) {
    if (tok == token) return bin;
  }
  return entry.categorical().overflow_bin();
}

double discount_of(const DiscountMode& mode, std::optional<double> dt) {
  if (mode.kind == DiscountMode::Kind::kConstant) return mode.value;
  if (!dt.has_value()) return 0.0;
  return std::exp(-*dt / mode.value);
}

std::vector<double> uniform_flat(const HistogramLayout& layout) {
  std::vector<double> u(layout.total_bins());
  for (std::size_t f = 0; f < layout.feature_count(); ++f) {
    const double v = 1.0 / static_cast<double>(layout.bin_count(f));
    for (std::size_t j = 0; j < layout.bin_count(f); ++j) {
      u[layout.offset(f) + j] = v;
    }
  }
  return u;
}

}  // namespace

std::vector<double> truncated_sum(
    const std::vector<std::vector<double>>& deltas, double alpha,
    const std::vector<double>& tail) {
  std::vector<double> out(tail.size(), 0.0);
  double power = 1.0;
  for (const auto& d : deltas) {
    if (d.size() != out.size()) {
      throw StructuralError("truncated_sum: delta length mismatch");
    }
    const double w = power * (1.0 - alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * d[i];
    power *= alpha;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += power * tail[i];
  return out;
}

ChainCheck chain_equivalence(const std::vector<EdgeEvent>& chain, double alpha,
                             const FeatureSchema& schema,
                             const BinningSpec& binning) {
  if (schema.edge_feature_count() != schema.size()) {
    throw ConfigError("chain check: edge-feature-only schema required");
  }
  if (chain.empty()) {
    throw DataError("chain check: empty chain");
  }

  // Validate the chain shape and find the newest node.
  std::set<NodeId> seen;
  NodeId newest;
  double prev_ts = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const EdgeEvent& e = chain[i];
    if (!(e.timestamp > prev_ts)) {
      throw DataError("chain check: timestamps must be strictly increasing");
    }
    prev_ts = e.timestamp;
    if (i == 0) {
      if (e.source_id == e.destination_id) {
        throw DataError("chain check: first event must join two nodes");
      }
      seen.insert(e.source_id);
      seen.insert(e.destination_id);
      newest = e.destination_id;
      continue;
    }
    const bool src_seen = seen.count(e.source_id) > 0;
    const bool dst_seen = seen.count(e.destination_id) > 0;
    if (src_seen == dst_seen) {
      throw DataError("chain check: event " + std::to_string(i) +
                      " must join one new node to one existing node");
    }
    const NodeId& old_node = src_seen ? e.source_id : e.destination_id;
    const NodeId& new_node = src_seen ? e.destination_id : e.source_id;
    // The first event leaves both endpoints eligible; afterwards the chain
    // must extend through the newest node.
    if (i > 1 && old_node != newest) {
      throw DataError("chain check: event " + std::to_string(i) +
                      " does not extend the newest node");
    }
    seen.insert(new_node);
    newest = new_node;
  }

  const HistogramLayout layout(schema, binning);

  // Oracle value: indicators newest-first with a uniform tail.
  std::vector<std::vector<double>> deltas;
  deltas.reserve(chain.size());
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    std::vector<double> onehot(layout.total_bins(), 0.0);
    for (std::size_t f = 0; f < schema.size(); ++f) {
      onehot[layout.offset(f) + slow_edge_bin(it->values[f], binning.at(f))] =
          1.0;
    }
    deltas.push_back(std::move(onehot));
  }
  ChainCheck check;
  check.oracle_state = truncated_sum(deltas, alpha, uniform_flat(layout));

  // Engine value.
  DiscountConfig config;
  config.alpha = DiscountMode::constant(alpha);
  config.beta = DiscountMode::constant(0.0);
  SprintEngine engine(schema, binning, config);
  for (const EdgeEvent& e : chain) engine.apply_edge(e);
  check.engine_state = engine.state_at(*engine.find(newest)).bins;

  for (std::size_t i = 0; i < check.engine_state.size(); ++i) {
    check.max_discrepancy =
        std::max(check.max_discrepancy,
                 std::abs(check.engine_state[i] - check.oracle_state[i]));
  }
  return check;
}

namespace {

struct NaiveSide {
  double a = 0.0;
  double b = 0.0;
  std::vector<std::size_t> bins;
  double new_in = 0.0;
  double new_out = 0.0;
};

NaiveSide naive_plan(const NaiveNode& node, const EdgeEvent& event,
                     const FeatureSchema& schema, const BinningSpec& binning,
                     const DiscountConfig& config, bool updates_out,
                     bool updates_in) {
  const double ts = event.timestamp;
  NaiveSide side;

  std::optional<double> dt;
  if (node.last_any.has_value()) dt = std::max(0.0, ts - *node.last_any);
  side.a = discount_of(config.alpha, dt);
  side.b = discount_of(config.beta, dt);

  side.new_out = node.out_degree;
  if (updates_out) {
    if (node.last_out.has_value()) {
      const double gap = std::max(0.0, ts - *node.last_out);
      side.new_out =
          node.out_degree * std::exp(-gap / config.degree_timescale) + 1.0;
    } else {
      side.new_out = 1.0;
    }
  }
  side.new_in = node.in_degree;
  if (updates_in) {
    if (node.last_in.has_value()) {
      const double gap = std::max(0.0, ts - *node.last_in);
      side.new_in =
          node.in_degree * std::exp(-gap / config.degree_timescale) + 1.0;
    } else {
      side.new_in = 1.0;
    }
  }

  side.bins.resize(schema.size());
  std::size_t pos = 0;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const BinningEntry& entry = binning.at(f);
    switch (schema.at(f).source) {
      case FeatureSource::kEdge:
        side.bins[f] = slow_edge_bin(event.values.at(pos++), entry);
        break;
      case FeatureSource::kDerivedInDegree:
        side.bins[f] = slow_numerical_bin(side.new_in, entry.numerical());
        break;
      case FeatureSource::kDerivedOutDegree:
        side.bins[f] = slow_numerical_bin(side.new_out, entry.numerical());
        break;
      case FeatureSource::kDerivedTimeDelta:
        side.bins[f] = dt.has_value()
                           ? slow_numerical_bin(*dt, entry.numerical())
                           : entry.bin_count() - 1;
        break;
    }
  }
  return side;
}

std::vector<std::vector<double>> naive_mix(
    const std::vector<std::vector<double>>& self,
    const std::vector<std::vector<double>>& neighbor, const NaiveSide& side) {
  std::vector<std::vector<double>> next(self.size());
  for (std::size_t f = 0; f < self.size(); ++f) {
    next[f].resize(self[f].size());
    for (std::size_t i = 0; i < self[f].size(); ++i) {
      const double delta = (i == side.bins[f]) ? 1.0 : 0.0;
      next[f][i] = side.b * self[f][i] +
                   (1.0 - side.b) * (side.a * neighbor[f][i] +
                                     (1.0 - side.a) * delta);
    }
  }
  return next;
}

NaiveNode& naive_get(NaiveStore& store, const NodeId& id,
                     const FeatureSchema& schema, const BinningSpec& binning) {
  auto [it, inserted] = store.try_emplace(id);
  if (inserted) {
    it->second.histograms.resize(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const std::size_t count = binning.at(f).bin_count();
      it->second.histograms[f].assign(count,
                                      1.0 / static_cast<double>(count));
    }
  }
  return it->second;
}

}  // namespace

NaiveStore naive_replay(std::span<const EdgeEvent> events,
                        const FeatureSchema& schema,
                        const BinningSpec& binning,
                        const DiscountConfig& config) {
  NaiveStore store;
  for (const EdgeEvent& event : events) {
    const double ts = event.timestamp;
    if (event.source_id == event.destination_id) {
      NaiveNode& node = naive_get(store, event.source_id, schema, binning);
      const NaiveSide side = naive_plan(node, event, schema, binning, config,
                                        /*updates_out=*/true,
                                        /*updates_in=*/true);
      node.histograms = naive_mix(node.histograms, node.histograms, side);
      node.in_degree = side.new_in;
      node.out_degree = side.new_out;
      node.last_any = node.last_in = node.last_out = ts;
      continue;
    }
    NaiveNode& src = naive_get(store, event.source_id, schema, binning);
    NaiveNode& dst = naive_get(store, event.destination_id, schema, binning);
    const NaiveSide src_side = naive_plan(src, event, schema, binning, config,
                                          /*updates_out=*/true,
                                          /*updates_in=*/false);
    const NaiveSide dst_side = naive_plan(dst, event, schema, binning, config,
                                          /*updates_out=*/false,
                                          /*updates_in=*/true);
    const auto next_src = naive_mix(src.histograms, dst.histograms, src_side);
    const auto next_dst = naive_mix(dst.histograms, src.histograms, dst_side);
    src.histograms = next_src;
    dst.histograms = next_dst;
    src.out_degree = src_side.new_out;
    src.last_any = src.last_out = ts;
    dst.in_degree = dst_side.new_in;
    dst.last_any = dst.last_in = ts;
  }
  return store;
}

namespace {

double clock_diff(const std::optional<double>& a,
                  const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) {
    return std::numeric_limits<double>::infinity();
  }
  if (!a.has_value()) return 0.0;
  return std::abs(*a - *b);
}

}  // namespace

ReplayDiff compare_replay(const SprintEngine& engine, const NaiveStore& naive) {
  ReplayDiff diff;
  auto note = [&diff](double d, const std::string& where) {
    if (d > diff.max_abs) {
      diff.max_abs = d;
      diff.where = where;
    }
  };
  if (engine.node_count() != naive.size()) {
    note(std::numeric_limits<double>::infinity(), "node count");
    return diff;
  }
  const HistogramLayout& layout = engine.layout();
  for (std::size_t idx = 0; idx < engine.node_count(); ++idx) {
    const NodeId& id = engine.node_id(idx);
    auto it = naive.find(id);
    if (it == naive.end()) {
      note(std::numeric_limits<double>::infinity(), "node '" + id + "' missing");
      continue;
    }
    const NodeState& state = engine.state_at(idx);
    const NaiveNode& ref = it->second;
    for (std::size_t f = 0; f < layout.feature_count(); ++f) {
      for (std::size_t j = 0; j < layout.bin_count(f); ++j) {
        note(std::abs(state.bins[layout.offset(f) + j] - ref.histograms[f][j]),
             "node '" + id + "' histogram");
      }
    }
    note(std::abs(state.clock.in_degree - ref.in_degree),
         "node '" + id + "' in_degree");
    note(std::abs(state.clock.out_degree - ref.out_degree),
         "node '" + id + "' out_degree");
    note(clock_diff(state.clock.last_any_event_time, ref.last_any),
         "node '" + id + "' last_any");
    note(clock_diff(state.clock.last_in_event_time, ref.last_in),
         "node '" + id + "' last_in");
    note(clock_diff(state.clock.last_out_event_time, ref.last_out),
         "node '" + id + "' last_out");
  }
  return diff;
}

WalkEstimate walk_sampler(std::span<const EdgeEvent> events,
                          const NodeId& seed_node, double alpha,
                          std::size_t n_walks, std::size_t max_hops,
                          std::uint64_t seed, const FeatureSchema& schema,
                          const BinningSpec& binning) {
  if (schema.edge_feature_count() != schema.size()) {
    throw ConfigError("walk sampler: edge-feature-only schema required");
  }
  if (n_walks < 1 || max_hops < 1) {
    throw ConfigError("walk sampler: n_walks and max_hops must be >= 1");
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].timestamp < events[i - 1].timestamp) {
      throw DataError("walk sampler: events must be time-ordered");
    }
  }

  const HistogramLayout layout(schema, binning);

  std::unordered_map<NodeId, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < events.size(); ++i) {
    incident[events[i].source_id].push_back(i);
    if (events[i].destination_id != events[i].source_id) {
      incident[events[i].destination_id].push_back(i);
    }
  }
  auto seed_it = incident.find(seed_node);
  if (seed_it == incident.end()) {
    throw DataError("walk sampler: unknown seed node '" + seed_node + "'");
  }

  // Per-event indicator, shared across walks.
  std::vector<std::vector<double>> onehot(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    onehot[i].assign(layout.total_bins(), 0.0);
    for (std::size_t f = 0; f < schema.size(); ++f) {
      onehot[i][layout.offset(f) +
                slow_edge_bin(events[i].values[f], binning.at(f))] = 1.0;
    }
  }

  const std::vector<double> tail = uniform_flat(layout);
  std::mt19937_64 rng(seed);

  std::vector<double> mean(layout.total_bins(), 0.0);
  std::vector<double> m2(layout.total_bins(), 0.0);
  std::vector<std::vector<double>> deltas;

  for (std::size_t w = 1; w <= n_walks; ++w) {
    deltas.clear();
    std::size_t cur_edge = seed_it->second.back();
    NodeId cur_node = seed_node;
    while (true) {
      const EdgeEvent& e = events[cur_edge];
      deltas.push_back(onehot[cur_edge]);
      if (deltas.size() >= max_hops) break;
      const NodeId& next_node =
          (e.source_id == cur_node) ? e.destination_id : e.source_id;
      const auto& inc = incident.at(next_node);
      const double cur_ts = e.timestamp;
      const auto older_end = std::lower_bound(
          inc.begin(), inc.end(), cur_ts,
          [&events](std::size_t idx, double t) {
            return events[idx].timestamp < t;
          });
      const std::size_t n_candidates =
          static_cast<std::size_t>(older_end - inc.begin());
      if (n_candidates == 0) break;
      std::uniform_int_distribution<std::size_t> pick(0, n_candidates - 1);
      cur_edge = inc[pick(rng)];
      cur_node = next_node;
    }

    const std::vector<double> value = truncated_sum(deltas, alpha, tail);
    const double inv = 1.0 / static_cast<double>(w);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double d = value[i] - mean[i];
      mean[i] += d * inv;
      m2[i] += d * (value[i] - mean[i]);
    }
  }

  WalkEstimate out;
  out.mean = std::move(mean);
  out.n_walks = n_walks;
  out.standard_error.assign(layout.total_bins(), 0.0);
  if (n_walks > 1) {
    const double denom =
        static_cast<double>(n_walks) * static_cast<double>(n_walks - 1);
    for (std::size_t i = 0; i < m2.size(); ++i) {
      out.standard_error[i] = std::sqrt(std::max(0.0, m2[i]) / denom);
    }
  }
  return out;
}

std::vector<ApproximationRow> approximation_report(
    std::span<const EdgeEvent> events, const FeatureSchema& schema,
    const BinningSpec& binning, double alpha, std::size_t n_walks,
    std::size_t max_hops, std::uint64_t seed) {
  DiscountConfig config;
  config.alpha = DiscountMode::constant(alpha);
  config.beta = DiscountMode::constant(0.0);
  SprintEngine engine(schema, binning, config);
  for (const EdgeEvent& e : events) engine.apply_edge(e);

  std::vector<ApproximationRow> rows;
  rows.reserve(engine.node_count());
  for (std::size_t idx = 0; idx < engine.node_count(); ++idx) {
    const NodeId& id = engine.node_id(idx);
    const WalkEstimate est =
        walk_sampler(events, id, alpha, n_walks, max_hops,
                     seed + static_cast<std::uint64_t>(idx), schema, binning);
    ApproximationRow row;
    row.node = id;
    const std::vector<double>& bins = engine.state_at(idx).bins;
    double se_sum = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      row.l1_distance += std::abs(bins[i] - est.mean[i]);
      se_sum += est.standard_error[i];
    }
    row.mean_standard_error =
        se_sum / static_cast<double>(est.standard_error.size());
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const ApproximationRow& a, const ApproximationRow& b) {
              return a.node < b.node;
            });
  return rows;
}

}  // namespace sprint::oracle
