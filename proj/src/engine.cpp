#include "sprint/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sprint {

namespace {

void fill_uniform(const HistogramLayout& layout, std::vector<double>& bins) {
  for (std::size_t f = 0; f < layout.feature_count(); ++f) {
    const double uniform = 1.0 / static_cast<double>(layout.bin_count(f));
    const std::size_t begin = layout.offset(f);
    const std::size_t end = begin + layout.bin_count(f);
    for (std::size_t i = begin; i < end; ++i) bins[i] = uniform;
  }
}

}  // namespace

NodeState init_node(const HistogramLayout& layout) {
  NodeState state;
  state.bins.resize(layout.total_bins());
  fill_uniform(layout, state.bins);
  return state;
}

double effective_discount(const DiscountMode& mode, std::optional<double> dt) {
  if (mode.kind == DiscountMode::Kind::kConstant) {
    return mode.value;
  }
  if (!dt.has_value()) {
    return 0.0;  // first event: full replacement
  }
  if (*dt < 0.0) {
    throw TimeOrderError("effective_discount: negative dt " +
                         std::to_string(*dt));
  }
  return std::exp(-*dt / mode.value);
}

double update_degree(double degree, std::optional<double> dt, double tau_d) {
  if (!dt.has_value()) {
    return 1.0;
  }
  if (*dt < 0.0) {
    throw TimeOrderError("update_degree: negative dt " + std::to_string(*dt));
  }
  return degree * std::exp(-*dt / tau_d) + 1.0;
}

void sprint_update_into(std::span<const double> self,
                        std::span<const double> neighbor,
                        std::span<const double> delta, double alpha,
                        double beta, std::span<double> out) {
  if (self.size() != neighbor.size() || self.size() != delta.size() ||
      self.size() != out.size()) {
    throw StructuralError("sprint_update: vector lengths disagree");
  }
  for (std::size_t i = 0; i < self.size(); ++i) {
    out[i] =
        beta * self[i] + (1.0 - beta) * (alpha * neighbor[i] +
                                         (1.0 - alpha) * delta[i]);
  }
}

std::vector<double> sprint_update(std::span<const double> self,
                                  std::span<const double> neighbor,
                                  std::span<const double> delta, double alpha,
                                  double beta) {
  std::vector<double> out(self.size());
  sprint_update_into(self, neighbor, delta, alpha, beta, out);
  return out;
}

std::vector<std::size_t> delta_bins(const EdgeEvent& event,
                                    const DerivedValues& derived,
                                    const FeatureSchema& schema,
                                    const BinningSpec& binning) {
  std::vector<std::size_t> bins(schema.size());
  std::size_t edge_pos = 0;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const BinningEntry& entry = binning.at(f);
    switch (schema.at(f).source) {
      case FeatureSource::kEdge:
        bins[f] = binning::lookup(event.values.at(edge_pos++), entry);
        break;
      case FeatureSource::kDerivedInDegree:
        bins[f] = binning::lookup_numerical(derived.in_degree,
                                            entry.numerical());
        break;
      case FeatureSource::kDerivedOutDegree:
        bins[f] = binning::lookup_numerical(derived.out_degree,
                                            entry.numerical());
        break;
      case FeatureSource::kDerivedTimeDelta:
        bins[f] = derived.time_delta.has_value()
                      ? binning::lookup_numerical(*derived.time_delta,
                                                  entry.numerical())
                      : entry.bin_count() - 1;  // first event: last bin
        break;
    }
  }
  return bins;
}

std::vector<std::vector<double>> delta_vector(const EdgeEvent& event,
                                              const DerivedValues& derived,
                                              const FeatureSchema& schema,
                                              const BinningSpec& binning) {
  const std::vector<std::size_t> bins =
      delta_bins(event, derived, schema, binning);
  std::vector<std::vector<double>> out(bins.size());
  for (std::size_t f = 0; f < bins.size(); ++f) {
    out[f].assign(binning.at(f).bin_count(), 0.0);
    out[f][bins[f]] = 1.0;
  }
  return out;
}

namespace {

std::optional<double> gap_since(std::optional<double> last, double now) {
  if (!last.has_value()) return std::nullopt;
  return std::max(0.0, now - *last);
}

void plan_node(const EdgeEvent& event, const FeatureSchema& schema,
               const BinningSpec& binning, const DiscountConfig& config,
               const DegreeClock& clock, bool updates_out, bool updates_in,
               NodeUpdatePlan& out) {
  const double ts = event.timestamp;
  const std::optional<double> dt_any = gap_since(clock.last_any_event_time, ts);

  out.alpha = effective_discount(config.alpha, dt_any);
  out.beta = effective_discount(config.beta, dt_any);

  out.new_out_degree =
      updates_out ? update_degree(clock.out_degree,
                                  gap_since(clock.last_out_event_time, ts),
                                  config.degree_timescale)
                  : clock.out_degree;
  out.new_in_degree =
      updates_in ? update_degree(clock.in_degree,
                                 gap_since(clock.last_in_event_time, ts),
                                 config.degree_timescale)
                 : clock.in_degree;

  DerivedValues derived;
  derived.time_delta = dt_any;
  derived.in_degree = out.new_in_degree;
  derived.out_degree = out.new_out_degree;
  out.bins = delta_bins(event, derived, schema, binning);
}

}  // namespace

void plan_edge(const EdgeEvent& event, const FeatureSchema& schema,
               const BinningSpec& binning, const DiscountConfig& config,
               const DegreeClock& source_clock,
               const DegreeClock& destination_clock, EdgePlan& out) {
  out.timestamp = event.timestamp;
  out.self_loop = event.source_id == event.destination_id;
  if (out.self_loop) {
    plan_node(event, schema, binning, config, source_clock,
              /*updates_out=*/true, /*updates_in=*/true, out.source);
    return;
  }
  plan_node(event, schema, binning, config, source_clock,
            /*updates_out=*/true, /*updates_in=*/false, out.source);
  plan_node(event, schema, binning, config, destination_clock,
            /*updates_out=*/false, /*updates_in=*/true, out.destination);
}

SprintEngine::SprintEngine(FeatureSchema schema, BinningSpec binning,
                           DiscountConfig config, EngineOptions options)
    : schema_(std::move(schema)),
      binning_(std::move(binning)),
      layout_(schema_, binning_),
      config_(config),
      options_(options) {
  config_.validate();
  if (options_.timestamp_regression_tolerance < 0.0) {
    throw ConfigError("engine: timestamp regression tolerance must be >= 0");
  }
  scratch_src_.resize(layout_.total_bins());
  scratch_dst_.resize(layout_.total_bins());
}

std::optional<std::size_t> SprintEngine::find(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t SprintEngine::intern(const NodeId& id) {
  auto [it, inserted] = index_.try_emplace(id, states_.size());
  if (inserted) {
    ids_.push_back(id);
    if (bin_pool_.empty()) {
      states_.push_back(init_node(layout_));
    } else {
      NodeState state;
      state.bins = std::move(bin_pool_.back());
      bin_pool_.pop_back();
      fill_uniform(layout_, state.bins);
      states_.push_back(std::move(state));
    }
  }
  return it->second;
}

void SprintEngine::reserve(std::size_t node_capacity) {
  index_.reserve(node_capacity);
  ids_.reserve(node_capacity);
  states_.reserve(node_capacity);
  while (states_.size() + bin_pool_.size() < node_capacity) {
    bin_pool_.emplace_back(layout_.total_bins());
  }
}

SprintEngine::UpdateResult SprintEngine::apply_edge(const EdgeEvent& event) {
  validate_event(event, schema_);
  if (last_event_time_.has_value() &&
      event.timestamp <
          *last_event_time_ - options_.timestamp_regression_tolerance) {
    std::ostringstream msg;
    msg << "ordered stream violated: event " << events_applied_ << " ("
        << event.source_id << " -> " << event.destination_id << ") at t="
        << event.timestamp << " regresses behind t=" << *last_event_time_
        << " beyond tolerance "
        << options_.timestamp_regression_tolerance;
    throw OrderedStreamError(msg.str());
  }

  const std::size_t src = intern(event.source_id);
  const std::size_t dst = intern(event.destination_id);
  const double ts = event.timestamp;

  plan_edge(event, schema_, binning_, config_, states_[src].clock,
            states_[dst].clock, plan_);

  // The elementwise pass assumes delta == 0; the selected bin of each
  // feature is then recomputed with the full three-term expression so the
  // result is bit-identical to sprint_update on a materialized one-hot.
  auto mix_into = [this](const std::vector<double>& self,
                         const std::vector<double>& neighbor,
                         const NodeUpdatePlan& plan,
                         std::vector<double>& out) {
    const double a = plan.alpha;
    const double b = plan.beta;
    for (std::size_t i = 0; i < self.size(); ++i) {
      out[i] = b * self[i] + (1.0 - b) * (a * neighbor[i] + (1.0 - a) * 0.0);
    }
    for (std::size_t f = 0; f < layout_.feature_count(); ++f) {
      const std::size_t i = layout_.offset(f) + plan.bins[f];
      out[i] = b * self[i] + (1.0 - b) * (a * neighbor[i] + (1.0 - a) * 1.0);
    }
  };

  if (plan_.self_loop) {
    NodeState& node = states_[src];
    // single update against the node's own pre-state
    mix_into(node.bins, node.bins, plan_.source, scratch_src_);
    node.bins.swap(scratch_src_);

    node.clock.in_degree = plan_.source.new_in_degree;
    node.clock.out_degree = plan_.source.new_out_degree;
    node.clock.last_any_event_time = ts;
    node.clock.last_in_event_time = ts;
    node.clock.last_out_event_time = ts;
  } else {
    NodeState& src_node = states_[src];
    NodeState& dst_node = states_[dst];

    // Both updates read the untouched pre-update vectors, then swap in.
    mix_into(dst_node.bins, src_node.bins, plan_.destination, scratch_dst_);
    mix_into(src_node.bins, dst_node.bins, plan_.source, scratch_src_);
    src_node.bins.swap(scratch_src_);
    dst_node.bins.swap(scratch_dst_);

    src_node.clock.out_degree = plan_.source.new_out_degree;
    src_node.clock.last_any_event_time = ts;
    src_node.clock.last_out_event_time = ts;
    dst_node.clock.in_degree = plan_.destination.new_in_degree;
    dst_node.clock.last_any_event_time = ts;
    dst_node.clock.last_in_event_time = ts;
  }

  if (!last_event_time_.has_value() || ts > *last_event_time_) {
    last_event_time_ = ts;
  }
  ++events_applied_;
  return UpdateResult{src, dst};
}

Embedding SprintEngine::embedding_at(std::size_t index,
                                     bool append_raw_degrees) const {
  return node_embedding(states_.at(index), layout_, append_raw_degrees);
}

void SprintEngine::read_embedding(std::size_t index, bool append_raw_degrees,
                                  std::vector<double>& out) const {
  const NodeState& state = states_[index];
  out.assign(state.bins.begin(), state.bins.end());
  if (append_raw_degrees) {
    out.push_back(state.clock.in_degree);
    out.push_back(state.clock.out_degree);
  }
}

void SprintEngine::import_node(const NodeId& id, NodeState state) {
  if (state.bins.size() != layout_.total_bins()) {
    throw StructuralError("import_node: histogram size mismatch");
  }
  auto [it, inserted] = index_.try_emplace(id, states_.size());
  if (!inserted) {
    throw PersistenceError("import_node: duplicate node id '" + id + "'");
  }
  ids_.push_back(id);
  states_.push_back(std::move(state));
}

void SprintEngine::set_stream_position(std::optional<double> last_event_time,
                                       std::uint64_t events_applied) {
  last_event_time_ = last_event_time;
  events_applied_ = events_applied;
}

}  // namespace sprint
