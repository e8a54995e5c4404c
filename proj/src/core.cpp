#include "sprint/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace sprint {

namespace {

const char* source_name(FeatureSource source) {
  switch (source) {
    case FeatureSource::kEdge:
      return "edge";
    case FeatureSource::kDerivedInDegree:
      return "derived_in_degree";
    case FeatureSource::kDerivedOutDegree:
      return "derived_out_degree";
    case FeatureSource::kDerivedTimeDelta:
      return "derived_time_delta";
  }
  return "?";
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureDef> features)
    : features_(std::move(features)) {
  std::unordered_set<std::string> names;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureDef& f = features_[i];
    if (f.name.empty()) {
      throw ConfigError("schema: feature name must not be empty");
    }
    if (!names.insert(f.name).second) {
      throw ConfigError("schema: duplicate feature name '" + f.name + "'");
    }
    if (f.source == FeatureSource::kEdge) {
      edge_feature_indices_.push_back(i);
      continue;
    }
    if (f.kind != FeatureKind::kNumerical) {
      throw ConfigError("schema: derived feature '" + f.name +
                        "' must be numerical");
    }
    std::optional<std::size_t>* slot = nullptr;
    switch (f.source) {
      case FeatureSource::kDerivedInDegree:
        slot = &in_degree_index_;
        break;
      case FeatureSource::kDerivedOutDegree:
        slot = &out_degree_index_;
        break;
      case FeatureSource::kDerivedTimeDelta:
        slot = &time_delta_index_;
        break;
      case FeatureSource::kEdge:
        break;
    }
    if (slot->has_value()) {
      throw ConfigError(std::string("schema: more than one ") +
                        source_name(f.source) + " feature");
    }
    *slot = i;
  }
  edge_feature_count_ = edge_feature_indices_.size();
}

std::optional<std::size_t> FeatureSchema::index_of(
    const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> FeatureSchema::derived_index(
    FeatureSource source) const {
  switch (source) {
    case FeatureSource::kDerivedInDegree:
      return in_degree_index_;
    case FeatureSource::kDerivedOutDegree:
      return out_degree_index_;
    case FeatureSource::kDerivedTimeDelta:
      return time_delta_index_;
    case FeatureSource::kEdge:
      break;
  }
  return std::nullopt;
}

void validate_event(const EdgeEvent& event, const FeatureSchema& schema) {
  if (!std::isfinite(event.timestamp) || event.timestamp < 0.0) {
    throw DataError("event: timestamp must be finite and >= 0, got " +
                    std::to_string(event.timestamp));
  }
  if (event.values.size() != schema.edge_feature_count()) {
    std::ostringstream msg;
    msg << "event: expected " << schema.edge_feature_count()
        << " edge feature values, got " << event.values.size();
    throw StructuralError(msg.str());
  }
  for (std::size_t i = 0; i < event.values.size(); ++i) {
    const std::size_t fi = schema.edge_feature_indices()[i];
    const FeatureDef& def = schema.at(fi);
    if (const double* x = std::get_if<double>(&event.values[i])) {
      if (def.kind != FeatureKind::kNumerical) {
        throw DataError("event: feature '" + def.name +
                        "' is categorical but got a number");
      }
      if (!std::isfinite(*x)) {
        throw DataError("event: non-finite value for feature '" + def.name +
                        "'");
      }
    } else if (def.kind != FeatureKind::kCategorical) {
      throw DataError("event: feature '" + def.name +
                      "' is numerical but got a token");
    }
  }
}

std::optional<std::size_t> CategoricalBins::find(
    const std::string& token) const {
  auto it = std::lower_bound(
      token_bins.begin(), token_bins.end(), token,
      [](const auto& entry, const std::string& t) { return entry.first < t; });
  if (it != token_bins.end() && it->first == token) return it->second;
  return std::nullopt;
}

std::size_t BinningEntry::bin_count() const {
  return std::visit([](const auto& b) { return b.bin_count(); }, bins);
}

BinningSpec::BinningSpec(std::vector<BinningEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const BinningEntry& e = entries_[i];
    if (e.bin_count() < 1) {
      throw ConfigError("binning: entry " + std::to_string(i) +
                        " has no bins");
    }
    if (e.is_numerical()) {
      const auto& cuts = e.numerical().cut_points;
      for (std::size_t j = 0; j < cuts.size(); ++j) {
        if (!std::isfinite(cuts[j])) {
          throw ConfigError("binning: non-finite cut point in entry " +
                            std::to_string(i));
        }
        if (j > 0 && !(cuts[j - 1] < cuts[j])) {
          throw ConfigError(
              "binning: cut points must be strictly increasing in entry " +
              std::to_string(i));
        }
      }
    } else {
      const auto& tb = e.categorical().token_bins;
      std::vector<bool> used(tb.size(), false);
      for (std::size_t j = 0; j < tb.size(); ++j) {
        if (j > 0 && !(tb[j - 1].first < tb[j].first)) {
          throw ConfigError("binning: categorical tokens must be sorted and "
                            "unique in entry " +
                            std::to_string(i));
        }
        if (tb[j].second >= tb.size()) {
          throw ConfigError("binning: categorical bin index out of range in "
                            "entry " +
                            std::to_string(i));
        }
        if (used[tb[j].second]) {
          throw ConfigError("binning: duplicate categorical bin index in "
                            "entry " +
                            std::to_string(i));
        }
        used[tb[j].second] = true;
      }
    }
  }
}

void BinningSpec::validate_against(const FeatureSchema& schema) const {
  if (entries_.size() != schema.size()) {
    std::ostringstream msg;
    msg << "binning: " << entries_.size() << " entries for " << schema.size()
        << " schema features";
    throw StructuralError(msg.str());
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const bool want_numerical = schema.at(i).kind == FeatureKind::kNumerical;
    if (entries_[i].is_numerical() != want_numerical) {
      throw StructuralError("binning: kind mismatch for feature '" +
                            schema.at(i).name + "'");
    }
  }
}

void DiscountConfig::validate() const {
  auto check = [](const DiscountMode& m, const char* name) {
    if (m.kind == DiscountMode::Kind::kConstant) {
      if (!(m.value >= 0.0 && m.value <= 1.0)) {
        throw ConfigError(std::string("discounts: constant ") + name +
                          " must lie in [0,1]");
      }
    } else {
      if (!(m.value > 0.0) || !std::isfinite(m.value)) {
        throw ConfigError(std::string("discounts: ") + name +
                          " timescale must be strictly positive");
      }
    }
  };
  check(alpha, "alpha");
  check(beta, "beta");
  if (!(degree_timescale > 0.0) || !std::isfinite(degree_timescale)) {
    throw ConfigError("discounts: degree_timescale must be strictly positive");
  }
}

HistogramLayout::HistogramLayout(const FeatureSchema& schema,
                                 const BinningSpec& binning) {
  binning.validate_against(schema);
  offsets_.reserve(schema.size());
  bin_counts_.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::size_t count = binning.at(i).bin_count();
    offsets_.push_back(total_bins_);
    bin_counts_.push_back(count);
    total_bins_ += count;
    for (std::size_t j = 0; j < count; ++j) {
      labels_.push_back(schema.at(i).name + ":bin_" + std::to_string(j));
    }
  }
}

std::span<const double> HistogramLayout::feature_slice(
    const std::vector<double>& flat, std::size_t feature) const {
  if (flat.size() != total_bins_) {
    throw StructuralError("layout: flat vector length " +
                          std::to_string(flat.size()) + " != total bins " +
                          std::to_string(total_bins_));
  }
  return std::span<const double>(flat.data() + offsets_.at(feature),
                                 bin_counts_.at(feature));
}

Embedding node_embedding(const NodeState& state, const HistogramLayout& layout,
                         bool append_raw_degrees) {
  if (state.bins.size() != layout.total_bins()) {
    throw StructuralError("embedding: state has " +
                          std::to_string(state.bins.size()) +
                          " bins, layout expects " +
                          std::to_string(layout.total_bins()));
  }
  Embedding out;
  out.values = state.bins;
  out.labels = layout.labels();
  if (append_raw_degrees) {
    out.values.push_back(state.clock.in_degree);
    out.values.push_back(state.clock.out_degree);
    out.labels.emplace_back("in_degree");
    out.labels.emplace_back("out_degree");
  }
  return out;
}

Embedding pair_embedding(const NodeState& u_state, const NodeState& v_state,
                         const HistogramLayout& layout,
                         bool append_raw_degrees) {
  if (u_state.bins.size() != v_state.bins.size()) {
    throw StructuralError("pair_embedding: states disagree in histogram size");
  }
  Embedding u = node_embedding(u_state, layout, append_raw_degrees);
  Embedding v = node_embedding(v_state, layout, append_raw_degrees);
  Embedding out;
  out.values.reserve(u.values.size() * 2);
  out.labels.reserve(u.labels.size() * 2);
  out.values.insert(out.values.end(), u.values.begin(), u.values.end());
  out.values.insert(out.values.end(), v.values.begin(), v.values.end());
  for (const auto& l : u.labels) out.labels.push_back("src_" + l);
  for (const auto& l : v.labels) out.labels.push_back("dst_" + l);
  return out;
}

double normalization_error(const NodeState& state,
                           const HistogramLayout& layout) {
  double worst = 0.0;
  for (std::size_t f = 0; f < layout.feature_count(); ++f) {
    double sum = 0.0;
    for (double x : layout.feature_slice(state.bins, f)) {
      if (x < 0.0) return std::abs(x) + 1.0;  // negative entry: force failure
      sum += x;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

}  // namespace sprint
