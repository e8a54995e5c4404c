#include "sprint/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "sprint/core.hpp"
#include "sprint/engine.hpp"
#include "sprint/synthetic.hpp"

namespace sprint::bench {

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

BenchReport run_scaling(const std::vector<std::size_t>& node_counts,
                        std::size_t n_events, std::size_t warmup,
                        std::size_t reps, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;

  DiscountConfig discounts;
  discounts.alpha = DiscountMode::exp_time_decay(5.0);
  discounts.beta = DiscountMode::constant(0.4);
  discounts.degree_timescale = 2.0;

  synthetic::StreamOptions base;
  base.n_events = n_events;
  base.seed = seed;
  base.n_nodes = *std::min_element(node_counts.begin(), node_counts.end());

  // One binning for every size, fitted on the smallest stream, so the bin
  // counts (and with them the per-event arithmetic) match across sizes.
  const synthetic::Fixture smallest = synthetic::make_fixture(base, discounts);

  struct SizeRun {
    std::size_t n_nodes = 0;
    std::vector<EdgeEvent> events;
    std::vector<double> samples;
    std::vector<double> rep_means;
  };

  std::vector<SizeRun> runs;
  runs.reserve(node_counts.size());
  for (std::size_t n_nodes : node_counts) {
    synthetic::StreamOptions opt = base;
    opt.n_nodes = n_nodes;
    SizeRun run;
    run.n_nodes = n_nodes;
    run.events = n_nodes == base.n_nodes
                     ? smallest.events
                     : synthetic::make_events(smallest.schema, opt);
    run.samples.reserve(reps * (n_events > warmup ? n_events - warmup : 0));
    run.rep_means.reserve(reps);
    runs.push_back(std::move(run));
  }

  // Alternate sizes within each repetition so clock and thermal drift over
  // the sweep spreads evenly instead of penalizing the sizes run last.
  std::vector<double> embedding;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    for (SizeRun& run : runs) {
      SprintEngine engine(smallest.schema, smallest.binning, discounts);
      engine.reserve(run.n_nodes);
      double rep_sum = 0.0;
      std::size_t rep_count = 0;
      for (std::size_t i = 0; i < run.events.size(); ++i) {
        if (i < warmup) {
          engine.apply_edge(run.events[i]);
          continue;
        }
        const auto t0 = clock::now();
        const SprintEngine::UpdateResult touched =
            engine.apply_edge(run.events[i]);
        engine.read_embedding(touched.source_index, true, embedding);
        const auto t1 = clock::now();
        const double ns = static_cast<double>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                .count());
        run.samples.push_back(ns);
        rep_sum += ns;
        ++rep_count;
      }
      if (rep_count > 0) {
        run.rep_means.push_back(rep_sum / static_cast<double>(rep_count));
      }
    }
  }

  BenchReport report;
  for (SizeRun& run : runs) {
    std::sort(run.samples.begin(), run.samples.end());
    SizeResult r;
    r.n_nodes = run.n_nodes;
    r.events_timed = run.samples.size();
    const double sum =
        std::accumulate(run.samples.begin(), run.samples.end(), 0.0);
    r.mean_ns = run.samples.empty()
                    ? 0.0
                    : sum / static_cast<double>(run.samples.size());
    r.p50_ns = percentile(run.samples, 0.50);
    r.p99_ns = percentile(run.samples, 0.99);
    // Spread reported across repetition means, not across raw events.
    double sq = 0.0;
    for (double m : run.rep_means) sq += (m - r.mean_ns) * (m - r.mean_ns);
    r.stddev_ns =
        run.rep_means.size() > 1
            ? std::sqrt(sq / static_cast<double>(run.rep_means.size() - 1))
            : 0.0;
    report.sizes.push_back(r);
  }

  const auto smallest_it = std::min_element(
      report.sizes.begin(), report.sizes.end(),
      [](const SizeResult& a, const SizeResult& b) { return a.n_nodes < b.n_nodes; });
  const auto largest_it = std::max_element(
      report.sizes.begin(), report.sizes.end(),
      [](const SizeResult& a, const SizeResult& b) { return a.n_nodes < b.n_nodes; });
  if (smallest_it != report.sizes.end() && largest_it != report.sizes.end() &&
      smallest_it->mean_ns > 0.0) {
    report.ratio_largest_to_smallest = largest_it->mean_ns / smallest_it->mean_ns;
  }
  return report;
}

}  // namespace sprint::bench
