#include "sprint/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace sprint::sketch {

HashPlanes::HashPlanes(std::size_t k, std::size_t dimension,
                       std::uint64_t seed)
    : k_(k), dimension_(dimension), seed_(seed) {
  if (k < 1) throw ConfigError("planes: k must be >= 1");
  if (dimension < 1) throw ConfigError("planes: dimension must be >= 1");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  rows_.resize(k * dimension);
  for (std::size_t j = 0; j < k; ++j) {
    double* row = rows_.data() + j * dimension;
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < dimension; ++i) {
      row[i] = gauss(rng);
      norm_sq += row[i] * row[i];
    }
    if (!(norm_sq > 0.0)) {
      throw ConfigError("planes: degenerate zero-norm draw");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t i = 0; i < dimension; ++i) row[i] *= inv;
  }
}

std::span<const double> HashPlanes::row(std::size_t j) const {
  if (j >= k_) {
    throw StructuralError("planes: row " + std::to_string(j) + " of " +
                          std::to_string(k_));
  }
  return std::span<const double>(rows_.data() + j * dimension_, dimension_);
}

std::vector<double> project(std::span<const double> histogram,
                            const HashPlanes& planes) {
  if (histogram.size() != planes.dimension()) {
    std::ostringstream msg;
    msg << "project: histogram length " << histogram.size()
        << " != plane dimension " << planes.dimension();
    throw StructuralError(msg.str());
  }
  std::vector<double> theta(planes.k());
  for (std::size_t j = 0; j < planes.k(); ++j) {
    const std::span<const double> row = planes.row(j);
    double dot = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) dot += row[i] * histogram[i];
    theta[j] = dot;
  }
  return theta;
}

std::vector<std::uint8_t> binarize(std::span<const double> theta) {
  std::vector<std::uint8_t> bits(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    bits[j] = theta[j] > 0.0 ? 1 : 0;
  }
  return bits;
}

double hamming_similarity(std::span<const std::uint8_t> a,
                          std::span<const std::uint8_t> b) {
  if (a.size() != b.size() || a.empty()) {
    throw StructuralError("hamming_similarity: length mismatch or empty");
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(a.size());
}

void sketch_update_into(std::span<const double> theta_self,
                        std::span<const double> theta_neighbor,
                        std::span<const double> plane_dot_delta, double alpha,
                        double beta, std::span<double> out) {
  if (theta_self.size() != theta_neighbor.size() ||
      theta_self.size() != plane_dot_delta.size() ||
      theta_self.size() != out.size()) {
    throw StructuralError("sketch_update: vector lengths disagree");
  }
  for (std::size_t j = 0; j < theta_self.size(); ++j) {
    out[j] = beta * theta_self[j] +
             (1.0 - beta) * (alpha * theta_neighbor[j] +
                             (1.0 - alpha) * plane_dot_delta[j]);
  }
}

std::vector<double> sketch_update(std::span<const double> theta_self,
                                  std::span<const double> theta_neighbor,
                                  std::span<const double> plane_dot_delta,
                                  double alpha, double beta) {
  std::vector<double> out(theta_self.size());
  sketch_update_into(theta_self, theta_neighbor, plane_dot_delta, alpha, beta,
                     out);
  return out;
}

void plane_dot_delta(const HashPlanes& planes, const HistogramLayout& layout,
                     const std::vector<std::size_t>& bins,
                     std::vector<double>& out) {
  if (planes.dimension() != layout.total_bins() ||
      bins.size() != layout.feature_count()) {
    throw StructuralError("plane_dot_delta: layout/plane shape mismatch");
  }
  out.assign(planes.k(), 0.0);
  for (std::size_t j = 0; j < planes.k(); ++j) {
    const std::span<const double> row = planes.row(j);
    double dot = 0.0;
    for (std::size_t f = 0; f < bins.size(); ++f) {
      dot += row[layout.offset(f) + bins[f]];
    }
    out[j] = dot;
  }
}

double averaging_gap(const std::vector<std::vector<double>>& histograms,
                     const HashPlanes& planes) {
  if (histograms.empty()) {
    throw StructuralError("averaging_gap: no histograms");
  }
  const std::size_t dim = planes.dimension();
  const double n = static_cast<double>(histograms.size());

  std::vector<double> summed(dim, 0.0);
  std::vector<double> theta_mean_of_proj(planes.k(), 0.0);
  for (const auto& h : histograms) {
    if (h.size() != dim) {
      throw StructuralError("averaging_gap: histogram dimension mismatch");
    }
    for (std::size_t i = 0; i < dim; ++i) summed[i] += h[i];
    const std::vector<double> theta = project(h, planes);
    for (std::size_t j = 0; j < planes.k(); ++j) {
      theta_mean_of_proj[j] += theta[j];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) summed[i] /= n;
  const std::vector<double> theta_of_mean = project(summed, planes);

  double worst = 0.0;
  for (std::size_t j = 0; j < planes.k(); ++j) {
    worst = std::max(worst,
                     std::abs(theta_of_mean[j] - theta_mean_of_proj[j] / n));
  }
  return worst;
}

SketchEngine::SketchEngine(FeatureSchema schema, BinningSpec binning,
                           DiscountConfig config, std::size_t k,
                           std::uint64_t seed, EngineOptions options)
    : schema_(std::move(schema)),
      binning_(std::move(binning)),
      layout_(schema_, binning_),
      config_(config),
      options_(options),
      planes_(k, layout_.total_bins(), seed) {
  config_.validate();
  if (options_.timestamp_regression_tolerance < 0.0) {
    throw ConfigError("engine: timestamp regression tolerance must be >= 0");
  }
  theta_uniform_ = project(init_node(layout_).bins, planes_);
  dot_src_.resize(k);
  dot_dst_.resize(k);
  scratch_src_.resize(k);
  scratch_dst_.resize(k);
}

std::optional<std::size_t> SketchEngine::find(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t SketchEngine::intern(const NodeId& id) {
  auto [it, inserted] = index_.try_emplace(id, states_.size());
  if (inserted) {
    ids_.push_back(id);
    states_.push_back(SketchState{theta_uniform_, DegreeClock{}});
  }
  return it->second;
}

void SketchEngine::reserve(std::size_t node_capacity) {
  index_.reserve(node_capacity);
  ids_.reserve(node_capacity);
  states_.reserve(node_capacity);
}

SketchEngine::UpdateResult SketchEngine::apply_edge(const EdgeEvent& event) {
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

  if (plan_.self_loop) {
    SketchState& node = states_[src];
    plane_dot_delta(planes_, layout_, plan_.source.bins, dot_src_);
    sketch_update_into(node.theta, node.theta, dot_src_, plan_.source.alpha,
                       plan_.source.beta, scratch_src_);
    node.theta.swap(scratch_src_);

    node.clock.in_degree = plan_.source.new_in_degree;
    node.clock.out_degree = plan_.source.new_out_degree;
    node.clock.last_any_event_time = ts;
    node.clock.last_in_event_time = ts;
    node.clock.last_out_event_time = ts;
  } else {
    SketchState& src_node = states_[src];
    SketchState& dst_node = states_[dst];

    plane_dot_delta(planes_, layout_, plan_.source.bins, dot_src_);
    plane_dot_delta(planes_, layout_, plan_.destination.bins, dot_dst_);
    sketch_update_into(dst_node.theta, src_node.theta, dot_dst_,
                       plan_.destination.alpha, plan_.destination.beta,
                       scratch_dst_);
    sketch_update_into(src_node.theta, dst_node.theta, dot_src_,
                       plan_.source.alpha, plan_.source.beta, scratch_src_);
    src_node.theta.swap(scratch_src_);
    dst_node.theta.swap(scratch_dst_);

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

std::vector<std::uint8_t> SketchEngine::bits_at(std::size_t index) const {
  return binarize(states_.at(index).theta);
}

void SketchEngine::read_embedding(std::size_t index,
                                  std::vector<double>& out) const {
  const SketchState& state = states_[index];
  out.assign(state.theta.begin(), state.theta.end());
  out.push_back(state.clock.in_degree);
  out.push_back(state.clock.out_degree);
}

std::vector<std::string> SketchEngine::embedding_labels() const {
  std::vector<std::string> labels;
  labels.reserve(planes_.k() + 2);
  for (std::size_t j = 0; j < planes_.k(); ++j) {
    labels.push_back("theta_" + std::to_string(j));
  }
  labels.emplace_back("in_degree");
  labels.emplace_back("out_degree");
  return labels;
}

void SketchEngine::import_node(const NodeId& id, SketchState state) {
  if (state.theta.size() != planes_.k()) {
    throw StructuralError("import_node: theta size mismatch");
  }
  auto [it, inserted] = index_.try_emplace(id, states_.size());
  if (!inserted) {
    throw PersistenceError("import_node: duplicate node id '" + id + "'");
  }
  ids_.push_back(id);
  states_.push_back(std::move(state));
}

void SketchEngine::set_stream_position(std::optional<double> last_event_time,
                                       std::uint64_t events_applied) {
  last_event_time_ = last_event_time;
  events_applied_ = events_applied;
}

}  // namespace sprint::sketch
