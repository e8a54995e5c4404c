#include "sprint/verify.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "sprint/binning.hpp"
#include "sprint/core.hpp"
#include "sprint/engine.hpp"
#include "sprint/io.hpp"
#include "sprint/oracle.hpp"
#include "sprint/sketch.hpp"
#include "sprint/synthetic.hpp"

namespace sprint::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SuiteReport make_report(std::string name, double measured, double threshold,
                        std::string detail) {
  SuiteReport r;
  r.name = std::move(name);
  r.measured = measured;
  r.threshold = threshold;
  r.passed = measured <= threshold;
  r.detail = std::move(detail);
  return r;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Single numerical edge feature over four bins; enough to light up every
// bin with values in [0,4).
FeatureSchema tiny_schema() {
  return FeatureSchema(
      {{"f", FeatureKind::kNumerical, FeatureSource::kEdge}});
}

BinningSpec tiny_binning() {
  return BinningSpec({BinningEntry{NumericalBins{{1.0, 2.0, 3.0}}}});
}

std::vector<EdgeEvent> make_chain(std::size_t length, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> val(0.0, 4.0);
  std::vector<EdgeEvent> chain;
  chain.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    EdgeEvent e;
    e.source_id = "c" + std::to_string(i + 1);
    e.destination_id = "c" + std::to_string(i);
    e.timestamp = static_cast<double>(i + 1);
    e.values = {FeatureValue(val(rng))};
    chain.push_back(std::move(e));
  }
  return chain;
}

}  // namespace

SuiteReport normalization_suite(std::size_t n_events, std::size_t n_nodes,
                                std::uint64_t seed) {
  synthetic::StreamOptions opt;
  opt.n_events = n_events;
  opt.n_nodes = n_nodes;
  opt.seed = seed;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> constant(0.05, 0.95);
  std::uniform_real_distribution<double> timescale(0.5, 20.0);

  double worst = 0.0;
  for (int mode = 0; mode < 4; ++mode) {
    DiscountConfig discounts;
    discounts.alpha = (mode & 1) != 0
                          ? DiscountMode::exp_time_decay(timescale(rng))
                          : DiscountMode::constant(constant(rng));
    discounts.beta = (mode & 2) != 0
                         ? DiscountMode::exp_time_decay(timescale(rng))
                         : DiscountMode::constant(constant(rng));
    discounts.degree_timescale = timescale(rng);
    const synthetic::Fixture fx = synthetic::make_fixture(opt, discounts);
    SprintEngine engine(fx.schema, fx.binning, discounts);
    for (const EdgeEvent& e : fx.events) engine.apply_edge(e);
    for (std::size_t i = 0; i < engine.node_count(); ++i) {
      worst = std::max(
          worst, normalization_error(engine.state_at(i), engine.layout()));
    }
  }
  std::ostringstream detail;
  detail << n_events << " events x 4 discount mode combinations, " << n_nodes
         << " nodes";
  return make_report("normalization", worst, 1e-9, detail.str());
}

SuiteReport chain_suite(std::size_t max_length, std::uint64_t seed) {
  const FeatureSchema schema = tiny_schema();
  const BinningSpec binning = tiny_binning();
  std::mt19937_64 rng(seed);
  const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};

  double worst = 0.0;
  std::size_t n_chains = 0;
  for (std::size_t length = 1; length <= max_length; ++length) {
    for (double alpha : alphas) {
      const std::vector<EdgeEvent> chain = make_chain(length, rng);
      const oracle::ChainCheck check =
          oracle::chain_equivalence(chain, alpha, schema, binning);
      worst = std::max(worst, check.max_discrepancy);
      ++n_chains;
    }
  }
  return make_report("chain equivalence", worst, 1e-12,
                     std::to_string(n_chains) + " chains, lengths 1.." +
                         std::to_string(max_length));
}

SuiteReport replay_suite(std::size_t n_events, std::size_t n_checkpoints,
                         std::uint64_t seed) {
  synthetic::StreamOptions opt;
  opt.n_events = n_events;
  opt.n_nodes = std::max<std::size_t>(10, n_events / 10);
  opt.seed = seed;

  DiscountConfig configs[2];
  configs[0].alpha = DiscountMode::exp_time_decay(5.0);
  configs[0].beta = DiscountMode::constant(0.3);
  configs[0].degree_timescale = 2.0;
  configs[1].alpha = DiscountMode::constant(0.7);
  configs[1].beta = DiscountMode::exp_time_decay(4.0);
  configs[1].degree_timescale = 0.5;

  double worst = 0.0;
  std::string where;
  for (const DiscountConfig& discounts : configs) {
    const synthetic::Fixture fx = synthetic::make_fixture(opt, discounts);
    SprintEngine engine(fx.schema, fx.binning, discounts);
    std::size_t applied = 0;
    for (std::size_t c = 1; c <= n_checkpoints; ++c) {
      const std::size_t until = n_events * c / n_checkpoints;
      for (; applied < until; ++applied) engine.apply_edge(fx.events[applied]);
      const oracle::NaiveStore naive = oracle::naive_replay(
          std::span<const EdgeEvent>(fx.events).subspan(0, until), fx.schema,
          fx.binning, discounts);
      const oracle::ReplayDiff diff = oracle::compare_replay(engine, naive);
      if (diff.max_abs > worst) {
        worst = diff.max_abs;
        where = diff.where;
      }
    }
  }
  std::ostringstream detail;
  detail << n_checkpoints << " checkpoints x 2 discount configurations";
  if (!where.empty()) detail << ", worst at " << where;
  return make_report("replay", worst, 1e-12, detail.str());
}

SuiteReport sketch_suite(std::size_t n_events, std::size_t k,
                         std::uint64_t seed) {
  synthetic::StreamOptions opt;
  opt.n_events = n_events;
  opt.n_nodes = std::max<std::size_t>(10, n_events / 20);
  opt.seed = seed;

  DiscountConfig discounts;
  discounts.alpha = DiscountMode::exp_time_decay(3.0);
  discounts.beta = DiscountMode::constant(0.4);
  discounts.degree_timescale = 2.0;

  const synthetic::Fixture fx = synthetic::make_fixture(opt, discounts);
  SprintEngine full(fx.schema, fx.binning, discounts);
  sketch::SketchEngine compressed(fx.schema, fx.binning, discounts, k,
                                  seed ^ 0xc0ffee);
  for (const EdgeEvent& e : fx.events) {
    full.apply_edge(e);
    compressed.apply_edge(e);
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < full.node_count(); ++i) {
    const std::vector<double> reference =
        sketch::project(full.state_at(i).bins, compressed.planes());
    const std::vector<double>& theta = compressed.state_at(i).theta;
    for (std::size_t j = 0; j < reference.size(); ++j) {
      worst = std::max(worst, std::abs(reference[j] - theta[j]));
    }
  }
  std::ostringstream detail;
  detail << n_events << " events, k=" << k << ", " << full.node_count()
         << " nodes";
  return make_report("sketch linearity", worst, 1e-9, detail.str());
}

SuiteReport averaging_suite(std::size_t n_histograms, std::size_t k,
                            std::uint64_t seed) {
  constexpr std::size_t kFeatures = 4;
  constexpr std::size_t kBins = 12;
  const std::size_t dim = kFeatures * kBins;
  const sketch::HashPlanes planes(k, dim, seed ^ 0x51ee7);

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  std::vector<std::vector<double>> histograms(n_histograms);
  for (auto& h : histograms) {
    h.resize(dim);
    for (std::size_t f = 0; f < kFeatures; ++f) {
      double sum = 0.0;
      for (std::size_t b = 0; b < kBins; ++b) {
        h[f * kBins + b] = ex(rng);
        sum += h[f * kBins + b];
      }
      for (std::size_t b = 0; b < kBins; ++b) h[f * kBins + b] /= sum;
    }
  }
  const double gap = sketch::averaging_gap(histograms, planes);
  return make_report("averaging preservation", gap, 1e-12,
                     std::to_string(n_histograms) + " histograms, k=" +
                         std::to_string(k));
}

SuiteReport walk_chain_suite(std::uint64_t seed) {
  const FeatureSchema schema = tiny_schema();
  const BinningSpec binning = tiny_binning();
  std::mt19937_64 rng(seed);

  double worst = 0.0;
  const std::size_t lengths[] = {1, 5, 20};
  const double alphas[] = {0.3, 0.9};
  for (std::size_t length : lengths) {
    for (double alpha : alphas) {
      const std::vector<EdgeEvent> chain = make_chain(length, rng);
      const oracle::ChainCheck check =
          oracle::chain_equivalence(chain, alpha, schema, binning);
      // On a chain every walk is forced, so 64 walks must agree exactly.
      const oracle::WalkEstimate est = oracle::walk_sampler(
          chain, "c" + std::to_string(length), alpha, 64, 64, seed, schema,
          binning);
      for (std::size_t i = 0; i < est.mean.size(); ++i) {
        worst = std::max(worst, std::abs(est.mean[i] - check.oracle_state[i]));
        worst = std::max(worst, est.standard_error[i]);
      }
    }
  }
  return make_report("walk chain exactness", worst, 0.0,
                     "6 chains, walks forced to a single path");
}

SuiteReport walk_star_suite(std::size_t n_walks, std::uint64_t seed) {
  const FeatureSchema schema = tiny_schema();
  const BinningSpec binning = tiny_binning();
  const HistogramLayout layout(schema, binning);

  // Hub sends three edges; walking back from the newest leaf forces one hop
  // to the hub and then a uniform pick between the two older edges.
  std::vector<EdgeEvent> events(3);
  const double values[] = {0.5, 1.5, 2.5};  // bins 0, 1, 2
  for (std::size_t i = 0; i < 3; ++i) {
    events[i].source_id = "hub";
    events[i].destination_id = "leaf" + std::to_string(i + 1);
    events[i].timestamp = static_cast<double>(i + 1);
    events[i].values = {FeatureValue(values[i])};
  }
  const double alpha = 0.5;
  const oracle::WalkEstimate est = oracle::walk_sampler(
      events, "leaf3", alpha, n_walks, 8, seed, schema, binning);

  // Closed form: depth is always 2, the middle step mixes edges 1 and 2.
  std::vector<double> analytic(layout.total_bins(),
                               alpha * alpha * 0.25);  // uniform tail
  analytic[2] += (1.0 - alpha);                        // newest edge, bin 2
  analytic[0] += alpha * (1.0 - alpha) * 0.5;          // older edge, bin 0
  analytic[1] += alpha * (1.0 - alpha) * 0.5;          // older edge, bin 1

  // z-score per bin with a floor so deterministic bins (zero variance)
  // still demand agreement at rounding level.
  const double se_floor = 1e-12 / 3.0;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double se = std::max(est.standard_error[i], se_floor);
    worst_z = std::max(worst_z, std::abs(est.mean[i] - analytic[i]) / se);
  }
  return make_report("walk star mixture", worst_z, 3.0,
                     std::to_string(n_walks) + " walks vs closed form, in "
                     "standard errors");
}

SuiteReport degree_suite(std::size_t n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> degree(0.0, 50.0);
  std::uniform_real_distribution<double> gap(0.0, 100.0);
  std::uniform_real_distribution<double> timescale(0.1, 20.0);

  double worst = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double d = degree(rng);
    const double dt = gap(rng);
    const double tau = timescale(rng);
    const double got = update_degree(d, dt, tau);
    const double want = d * std::exp(-dt / tau) + 1.0;
    worst = std::max(worst, std::abs(got - want));
    if (update_degree(degree(rng), std::nullopt, tau) != 1.0) {
      worst = kInf;
    }
  }
  return make_report("degree closed form", worst, 1e-12,
                     std::to_string(n_samples) + " random (d, dt, tau) "
                     "triples plus first-event checks");
}

SuiteReport lookup_suite(std::size_t n_pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> n_cuts(1, 32);
  std::uniform_real_distribution<double> cut_value(-100.0, 100.0);
  std::uniform_real_distribution<double> probe_value(-150.0, 150.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::size_t mismatches = 0;
  NumericalBins bins;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    if (i % 1000 == 0) {
      bins.cut_points.clear();
      const std::size_t n = n_cuts(rng);
      for (std::size_t c = 0; c < n; ++c) {
        bins.cut_points.push_back(cut_value(rng));
      }
      std::sort(bins.cut_points.begin(), bins.cut_points.end());
      bins.cut_points.erase(
          std::unique(bins.cut_points.begin(), bins.cut_points.end()),
          bins.cut_points.end());
    }
    double x;
    const double mode = unit(rng);
    std::uniform_int_distribution<std::size_t> pick_cut(
        0, bins.cut_points.size() - 1);
    if (mode < 0.3) {
      x = bins.cut_points[pick_cut(rng)];  // exactly on a boundary
    } else if (mode < 0.5) {
      const double c = bins.cut_points[pick_cut(rng)];
      x = unit(rng) < 0.5 ? std::nextafter(c, -1e9) : std::nextafter(c, 1e9);
    } else {
      x = probe_value(rng);
    }
    const std::size_t fast = binning::lookup_numerical(x, bins);
    std::size_t slow = 0;
    for (double cut : bins.cut_points) {
      if (cut <= x) ++slow;
    }
    if (fast != slow) ++mismatches;
  }

  // Pin the quantile hand case alongside: deciles of 1..10 at 5 bins.
  const NumericalBins hand = binning::fit_quantile_bins(
      {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 5);
  if (hand.cut_points != std::vector<double>{2, 4, 6, 8}) ++mismatches;

  return make_report("bin lookup equivalence",
                     static_cast<double>(mismatches), 0.0,
                     std::to_string(n_pairs) + " probes vs linear scan");
}

SuiteReport persistence_suite(std::size_t n_events, std::size_t stride,
                              std::uint64_t seed) {
  synthetic::StreamOptions opt;
  opt.n_events = n_events;
  opt.n_nodes = std::max<std::size_t>(10, n_events / 10);
  opt.seed = seed;

  DiscountConfig discounts;
  discounts.alpha = DiscountMode::constant(0.7);
  discounts.beta = DiscountMode::exp_time_decay(4.0);
  discounts.degree_timescale = 2.0;
  const synthetic::Fixture fx = synthetic::make_fixture(opt, discounts);

  SprintEngine straight(fx.schema, fx.binning, discounts);
  for (const EdgeEvent& e : fx.events) straight.apply_edge(e);

  namespace fs = std::filesystem;
  const std::string snap =
      (fs::temp_directory_path() /
       ("sprint_verify_" + std::to_string(::getpid()) + "_" +
        std::to_string(seed) + ".json"))
          .string();

  std::optional<SprintEngine> resumed;
  resumed.emplace(fx.schema, fx.binning, discounts);
  for (std::size_t i = 0; i < fx.events.size(); ++i) {
    resumed->apply_edge(fx.events[i]);
    if ((i + 1) % stride == 0) {
      io::save_snapshot(snap, *resumed);
      resumed.emplace(
          io::restore_snapshot(snap, fx.schema, fx.binning, discounts));
    }
  }

  double worst = 0.0;
  std::string detail;
  auto clock_gap = [](const std::optional<double>& a,
                      const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return kInf;
    return a.has_value() ? std::abs(*a - *b) : 0.0;
  };
  if (straight.node_count() != resumed->node_count()) {
    worst = kInf;
    detail = "node counts disagree";
  } else {
    for (std::size_t i = 0; i < straight.node_count(); ++i) {
      if (straight.node_id(i) != resumed->node_id(i)) {
        worst = kInf;
        detail = "node order disagrees";
        break;
      }
      const NodeState& a = straight.state_at(i);
      const NodeState& b = resumed->state_at(i);
      for (std::size_t j = 0; j < a.bins.size(); ++j) {
        worst = std::max(worst, std::abs(a.bins[j] - b.bins[j]));
      }
      worst = std::max(worst, std::abs(a.clock.in_degree - b.clock.in_degree));
      worst =
          std::max(worst, std::abs(a.clock.out_degree - b.clock.out_degree));
      worst = std::max(worst, clock_gap(a.clock.last_any_event_time,
                                        b.clock.last_any_event_time));
      worst = std::max(worst, clock_gap(a.clock.last_in_event_time,
                                        b.clock.last_in_event_time));
      worst = std::max(worst, clock_gap(a.clock.last_out_event_time,
                                        b.clock.last_out_event_time));
    }
  }

  // A snapshot written under one discount setup must not restore under
  // another, and a snapshot whose stored hash was edited must be refused.
  io::save_snapshot(snap, *resumed);
  DiscountConfig other = discounts;
  other.alpha = DiscountMode::constant(0.123);
  bool refused_config = false;
  try {
    io::restore_snapshot(snap, fx.schema, fx.binning, other);
  } catch (const PersistenceError&) {
    refused_config = true;
  }

  bool refused_tamper = false;
  {
    std::ifstream in(snap);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    const io::ConfigHashes hashes =
        io::compute_hashes(fx.schema, fx.binning, discounts);
    const std::size_t pos = text.find(hashes.config_hash);
    if (pos != std::string::npos) {
      text.replace(pos, hashes.config_hash.size(), "deadbeefdeadbeef");
      std::ofstream out(snap);
      out << text;
    }
  }
  try {
    io::restore_snapshot(snap, fx.schema, fx.binning, discounts);
  } catch (const PersistenceError&) {
    refused_tamper = true;
  }
  fs::remove(snap);

  if (!refused_config || !refused_tamper) {
    worst = kInf;
    detail = "tampered snapshot was not refused";
  }
  if (detail.empty()) {
    std::ostringstream d;
    d << n_events << " events, snapshot every " << stride
      << ", tamper checks refused";
    detail = d.str();
  }
  return make_report("snapshot round trip", worst, 1e-12, detail);
}

std::string format_report(const SuiteReport& report) {
  std::string line = report.passed ? "[PASS] " : "[FAIL] ";
  line += report.name;
  line += ": measured " + fmt(report.measured) + " (threshold " +
          fmt(report.threshold) + ")";
  if (!report.detail.empty()) {
    line += " -- " + report.detail;
  }
  return line;
}

}  // namespace sprint::verify
