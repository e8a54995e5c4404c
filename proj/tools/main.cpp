#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sprint/bench.hpp"
#include "sprint/binning.hpp"
#include "sprint/core.hpp"
#include "sprint/engine.hpp"
#include "sprint/fitting.hpp"
#include "sprint/io.hpp"
#include "sprint/oracle.hpp"
#include "sprint/sketch.hpp"
#include "sprint/synthetic.hpp"
#include "sprint/verify.hpp"

namespace {

using nlohmann::json;

std::string render(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

double percentile_of(std::vector<double>& samples, double p) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double pos = p * static_cast<double>(samples.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return samples[lo] * (1.0 - frac) + samples[hi] * frac;
}

// ---------------------------------------------------------------------------
// fit-bins
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string config;
  std::string stream;
  std::string output;
  std::size_t n_bins = 10;
  std::size_t max_categories = 10;
  double train_fraction = 1.0;
  std::optional<double> train_cutoff;
};

int cmd_fit_bins(const FitArgs& args) {
  const sprint::io::RunConfig cfg = sprint::io::load_run_config(args.config);
  const std::vector<sprint::EdgeEvent> events =
      sprint::io::read_edge_stream(args.stream, cfg.schema);

  sprint::fitting::FitOptions options;
  options.n_bins = args.n_bins;
  options.max_categories = args.max_categories;
  options.train_fraction = args.train_fraction;
  options.train_cutoff = args.train_cutoff;
  const sprint::fitting::FitReport report =
      sprint::fitting::fit_bins(events, cfg.schema, cfg.discounts, options);
  sprint::io::save_binning(args.output, cfg.schema, report.binning);

  std::cout << "fitted bins on " << report.events_used << " of "
            << events.size() << " events\n";
  json bins = json::object();
  for (std::size_t f = 0; f < cfg.schema.size(); ++f) {
    const sprint::FeatureDef& def = cfg.schema.at(f);
    std::cout << "  " << def.name << ": " << report.bins_per_feature[f]
              << " bins\n";
    bins[def.name] = report.bins_per_feature[f];
  }
  for (const std::string& w : report.warnings) {
    std::cout << "warning: " << w << "\n";
  }
  std::cout << "wrote " << args.output << "\n";

  json summary = {{"command", "fit-bins"},
                  {"events_used", report.events_used},
                  {"bins", bins},
                  {"warnings", report.warnings.size()},
                  {"output", args.output}};
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string stream;
  std::string output;
  std::string bins;  // overrides the config's binning when set
  bool sketch = false;
  bool pair = false;
  bool append_degrees = false;
  std::string emit;  // "final" or "per-event"; empty keeps the config value
};

int cmd_run(const RunArgs& args) {
  sprint::io::RunConfig cfg = sprint::io::load_run_config(args.config);
  if (!args.bins.empty()) {
    cfg.binning = sprint::io::load_binning(args.bins, cfg.schema);
  }
  if (!cfg.binning.has_value()) {
    throw sprint::ConfigError(
        "no bins available: the config carries none and --bins was not "
        "given; run fit-bins first");
  }
  if (args.sketch) cfg.sketch.enabled = true;
  if (args.pair) cfg.embedding.pair = true;
  if (args.append_degrees) cfg.embedding.append_raw_degrees = true;
  if (!args.emit.empty()) {
    cfg.embedding.emit = args.emit == "final"
                             ? sprint::io::EmitMode::kFinal
                             : sprint::io::EmitMode::kPerEvent;
  }
  const bool per_event = cfg.embedding.emit == sprint::io::EmitMode::kPerEvent;
  if (cfg.embedding.pair && !per_event) {
    throw sprint::ConfigError(
        "pair embeddings are per-event by nature; use --emit per-event");
  }

  std::ofstream out(args.output);
  if (!out) {
    throw sprint::ConfigError("cannot open output file '" + args.output + "'");
  }

  sprint::EngineOptions engine_options;
  engine_options.timestamp_regression_tolerance =
      cfg.timestamp_regression_tolerance;

  // The two engine flavors share the event loop; only state layout and
  // label sets differ.
  std::optional<sprint::SprintEngine> full;
  std::optional<sprint::sketch::SketchEngine> compressed;
  std::vector<std::string> labels;
  if (cfg.sketch.enabled) {
    compressed.emplace(cfg.schema, *cfg.binning, cfg.discounts, cfg.sketch.k,
                       cfg.sketch.seed, engine_options);
    labels = compressed->embedding_labels();
  } else {
    full.emplace(cfg.schema, *cfg.binning, cfg.discounts, engine_options);
    labels = full->layout().labels();
    if (cfg.embedding.append_raw_degrees) {
      labels.push_back("in_degree");
      labels.push_back("out_degree");
    }
  }

  std::vector<std::string> entity_columns;
  std::vector<std::string> value_labels;
  if (cfg.embedding.pair) {
    entity_columns = {"event", "source", "destination", "timestamp"};
    for (const std::string& l : labels) value_labels.push_back("src_" + l);
    for (const std::string& l : labels) value_labels.push_back("dst_" + l);
  } else if (per_event) {
    entity_columns = {"event", "node", "timestamp"};
    value_labels = labels;
  } else {
    entity_columns = {"node"};
    value_labels = labels;
  }
  sprint::io::EmbeddingWriter writer(out, entity_columns, value_labels);

  auto read_one = [&](std::size_t index, std::vector<double>& buf) {
    if (compressed.has_value()) {
      compressed->read_embedding(index, buf);
    } else {
      full->read_embedding(index, cfg.embedding.append_raw_degrees, buf);
    }
  };

  using clock = std::chrono::steady_clock;
  const auto wall_start = clock::now();
  sprint::io::EdgeStreamReader reader(args.stream, cfg.schema);
  std::vector<double> latencies_ns;
  std::vector<double> emb_src;
  std::vector<double> emb_dst;
  std::vector<double> row;
  std::size_t n_events = 0;
  while (std::optional<sprint::EdgeEvent> event = reader.next()) {
    std::size_t src_index = 0;
    std::size_t dst_index = 0;
    const auto t0 = clock::now();
    if (compressed.has_value()) {
      const auto touched = compressed->apply_edge(*event);
      src_index = touched.source_index;
      dst_index = touched.destination_index;
    } else {
      const auto touched = full->apply_edge(*event);
      src_index = touched.source_index;
      dst_index = touched.destination_index;
    }
    read_one(src_index, emb_src);
    const auto t1 = clock::now();
    latencies_ns.push_back(static_cast<double>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
            .count()));

    if (per_event) {
      const std::string ts = render(event->timestamp);
      if (cfg.embedding.pair) {
        read_one(dst_index, emb_dst);
        row.assign(emb_src.begin(), emb_src.end());
        row.insert(row.end(), emb_dst.begin(), emb_dst.end());
        const std::string entity[] = {std::to_string(n_events),
                                      event->source_id, event->destination_id,
                                      ts};
        writer.write_row(entity, row);
      } else {
        const std::string entity[] = {std::to_string(n_events),
                                      event->source_id, ts};
        writer.write_row(entity, emb_src);
      }
    }
    ++n_events;
  }

  const std::size_t n_nodes =
      compressed.has_value() ? compressed->node_count() : full->node_count();
  if (!per_event) {
    for (std::size_t i = 0; i < n_nodes; ++i) {
      read_one(i, emb_src);
      const std::string entity[] = {
          compressed.has_value() ? compressed->node_id(i) : full->node_id(i)};
      writer.write_row(entity, emb_src);
    }
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(clock::now() - wall_start)
          .count();

  std::vector<double> sorted = latencies_ns;
  const double p50 = percentile_of(sorted, 0.50);
  const double p99 = percentile_of(sorted, 0.99);

  std::cout << "processed " << n_events << " events, " << n_nodes
            << " nodes, " << writer.rows_written() << " output rows\n";
  char line[160];
  std::snprintf(line, sizeof(line),
                "wall time %.1f ms, per-edge latency p50 %.0f ns, p99 %.0f ns\n",
                wall_ms, p50, p99);
  std::cout << line;

  json summary = {{"command", "run"},
                  {"events", n_events},
                  {"nodes", n_nodes},
                  {"rows", writer.rows_written()},
                  {"sketch", cfg.sketch.enabled},
                  {"wall_ms", wall_ms},
                  {"latency_ns", {{"p50", p50}, {"p99", p99}}},
                  {"output", args.output}};
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  std::size_t events = 10000;
  std::size_t nodes = 1000;
  std::size_t k = 16;
  std::size_t walks = 100000;
  std::size_t checkpoints = 5;
  std::size_t chain_max = 20;
  std::size_t samples = 1000;
  std::size_t pairs = 100000;
  std::size_t stride = 100;
  std::uint64_t seed = 42;
};

void print_walk_table(std::uint64_t seed) {
  sprint::synthetic::StreamOptions opt;
  opt.n_nodes = 12;
  opt.n_events = 60;
  opt.seed = seed;
  opt.with_derived = false;  // walks cover edge features only
  const sprint::FeatureSchema schema = sprint::synthetic::make_schema(opt);
  const std::vector<sprint::EdgeEvent> events =
      sprint::synthetic::make_events(schema, opt);

  sprint::DiscountConfig discounts;
  discounts.alpha = sprint::DiscountMode::constant(0.5);
  discounts.beta = sprint::DiscountMode::constant(0.0);
  sprint::fitting::FitOptions fit;
  fit.n_bins = 4;
  fit.max_categories = 5;
  const sprint::fitting::FitReport fitted =
      sprint::fitting::fit_bins(events, schema, discounts, fit);

  const std::vector<sprint::oracle::ApproximationRow> rows =
      sprint::oracle::approximation_report(events, schema, fitted.binning, 0.5,
                                           400, 32, seed);
  std::cout << "walk approximation on a " << opt.n_events << "-event stream "
            << "(engine histograms vs 400-walk estimates):\n";
  std::cout << "  node          l1_distance  mean_standard_error\n";
  for (const auto& r : rows) {
    char line[120];
    std::snprintf(line, sizeof(line), "  %-12s  %11.4f  %19.5f\n",
                  r.node.c_str(), r.l1_distance, r.mean_standard_error);
    std::cout << line;
  }
}

int cmd_verify(const VerifyArgs& args) {
  namespace v = sprint::verify;
  std::vector<v::SuiteReport> reports;
  const bool all = args.suite == "all";
  if (all) {
    reports.push_back(
        v::normalization_suite(args.events, args.nodes, args.seed));
  }
  if (all || args.suite == "chain") {
    reports.push_back(v::chain_suite(args.chain_max, args.seed));
  }
  if (all || args.suite == "replay") {
    reports.push_back(
        v::replay_suite(args.events, args.checkpoints, args.seed));
  }
  if (all || args.suite == "sketch") {
    reports.push_back(v::sketch_suite(args.events, args.k, args.seed));
    reports.push_back(v::averaging_suite(100, args.k, args.seed));
  }
  if (all || args.suite == "walks") {
    reports.push_back(v::walk_chain_suite(args.seed));
    reports.push_back(v::walk_star_suite(args.walks, args.seed));
  }
  if (all) {
    reports.push_back(v::degree_suite(args.samples, args.seed));
    reports.push_back(v::lookup_suite(args.pairs, args.seed));
    reports.push_back(
        v::persistence_suite(std::min<std::size_t>(args.events, 1000),
                             args.stride, args.seed));
  }

  bool passed = true;
  json lines = json::array();
  for (const v::SuiteReport& r : reports) {
    std::cout << v::format_report(r) << "\n";
    passed = passed && r.passed;
    lines.push_back({{"name", r.name},
                     {"passed", r.passed},
                     {"measured", r.measured},
                     {"threshold", r.threshold}});
  }
  if (all || args.suite == "walks") {
    print_walk_table(args.seed);
  }

  json summary = {
      {"command", "verify"}, {"passed", passed}, {"suites", lines}};
  std::cout << summary.dump() << "\n";
  return passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
  std::vector<std::size_t> nodes = {1000, 10000, 100000};
  std::size_t events = 40000;
  std::size_t warmup = 5000;
  std::size_t reps = 10;
  std::uint64_t seed = 42;
  std::string output;
};

int cmd_bench(const BenchArgs& args) {
  const sprint::bench::BenchReport report = sprint::bench::run_scaling(
      args.nodes, args.events, args.warmup, args.reps, args.seed);

  std::cout << "    n_nodes  events_timed     mean_ns      p50_ns      p99_ns"
            << "   std_ns\n";
  for (const sprint::bench::SizeResult& r : report.sizes) {
    char line[160];
    std::snprintf(line, sizeof(line),
                  "%11zu  %12zu  %10.1f  %10.1f  %10.1f  %7.1f\n", r.n_nodes,
                  r.events_timed, r.mean_ns, r.p50_ns, r.p99_ns, r.stddev_ns);
    std::cout << line;
  }
  char ratio_line[120];
  std::snprintf(ratio_line, sizeof(ratio_line),
                "largest/smallest mean latency ratio: %.3f\n",
                report.ratio_largest_to_smallest);
  std::cout << ratio_line;

  if (!args.output.empty()) {
    std::ofstream out(args.output);
    if (!out) {
      throw sprint::ConfigError("cannot open output file '" + args.output +
                                "'");
    }
    out << "n_nodes,events_timed,mean_ns,p50_ns,p99_ns,std_ns\n";
    for (const sprint::bench::SizeResult& r : report.sizes) {
      out << r.n_nodes << "," << r.events_timed << "," << render(r.mean_ns)
          << "," << render(r.p50_ns) << "," << render(r.p99_ns) << ","
          << render(r.stddev_ns) << "\n";
    }
    std::cout << "wrote " << args.output << "\n";
  }

  // The flat-latency contract applies once the sweep spans two orders of
  // magnitude in node count; smaller sweeps are informational.
  const auto [min_it, max_it] =
      std::minmax_element(args.nodes.begin(), args.nodes.end());
  const bool contract = *max_it >= 100 * *min_it;
  bool passed = true;
  if (contract) {
    passed = report.ratio_largest_to_smallest <= 2.0;
    std::cout << (passed ? "[PASS]" : "[FAIL]")
              << " flat-latency contract: ratio "
              << render(report.ratio_largest_to_smallest)
              << " (threshold 2.0)\n";
  }

  json sizes = json::array();
  for (const sprint::bench::SizeResult& r : report.sizes) {
    sizes.push_back({{"n_nodes", r.n_nodes},
                     {"events_timed", r.events_timed},
                     {"mean_ns", r.mean_ns},
                     {"p50_ns", r.p50_ns},
                     {"p99_ns", r.p99_ns},
                     {"std_ns", r.stddev_ns}});
  }
  json summary = {{"command", "bench"},
                  {"sizes", sizes},
                  {"ratio", report.ratio_largest_to_smallest},
                  {"passed", passed}};
  std::cout << summary.dump() << "\n";
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming graph feature engine"};
  app.require_subcommand(1);

  FitArgs fit_args;
  double cutoff_value = 0.0;
  CLI::App* fit = app.add_subcommand(
      "fit-bins", "fit quantile and category bins on a training prefix");
  fit->add_option("--config", fit_args.config, "run config JSON")->required();
  fit->add_option("--stream", fit_args.stream, "edge stream (CSV or JSONL)")
      ->required();
  fit->add_option("--output", fit_args.output, "binning file to write")
      ->required();
  fit->add_option("--n-bins", fit_args.n_bins, "quantile bins per numerical feature");
  fit->add_option("--max-categories", fit_args.max_categories,
                  "categorical bins including overflow");
  fit->add_option("--train-fraction", fit_args.train_fraction,
                  "leading fraction of events used for fitting");
  CLI::Option* cutoff_opt = fit->add_option(
      "--train-cutoff", cutoff_value, "fit on events with ts <= cutoff");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "stream events and write embeddings");
  run->add_option("--config", run_args.config, "run config JSON")->required();
  run->add_option("--stream", run_args.stream, "edge stream (CSV or JSONL)")
      ->required();
  run->add_option("--output", run_args.output, "embedding CSV to write")
      ->required();
  run->add_option("--bins", run_args.bins, "binning file (overrides config)");
  run->add_flag("--sketch", run_args.sketch, "use the projection engine");
  run->add_flag("--pair-embeddings", run_args.pair,
                "one source+destination row per event");
  run->add_flag("--append-degrees", run_args.append_degrees,
                "append raw degree columns");
  run->add_option("--emit", run_args.emit, "output mode")
      ->check(CLI::IsMember({"final", "per-event"}));

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run oracle suites");
  verify->add_option("--suite", verify_args.suite, "which suite to run")
      ->check(CLI::IsMember({"chain", "replay", "sketch", "walks", "all"}));
  verify->add_option("--events", verify_args.events, "stream length");
  verify->add_option("--nodes", verify_args.nodes, "node count");
  verify->add_option("--k", verify_args.k, "projection count");
  verify->add_option("--walks", verify_args.walks, "walks for the star check");
  verify->add_option("--checkpoints", verify_args.checkpoints,
                     "replay checkpoints");
  verify->add_option("--chain-max", verify_args.chain_max, "longest chain");
  verify->add_option("--samples", verify_args.samples, "degree-form samples");
  verify->add_option("--pairs", verify_args.pairs, "lookup probes");
  verify->add_option("--stride", verify_args.stride, "snapshot stride");
  verify->add_option("--seed", verify_args.seed, "random seed");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "per-edge latency across sizes");
  bench->add_option("--nodes", bench_args.nodes, "node counts to sweep")
      ->delimiter(',');
  bench->add_option("--events", bench_args.events, "events per run");
  bench->add_option("--warmup", bench_args.warmup, "untimed leading events");
  bench->add_option("--reps", bench_args.reps, "repetitions per size");
  bench->add_option("--seed", bench_args.seed, "random seed");
  bench->add_option("--output", bench_args.output, "CSV table to write");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      if (cutoff_opt->count() > 0) fit_args.train_cutoff = cutoff_value;
      return cmd_fit_bins(fit_args);
    }
    if (run->parsed()) return cmd_run(run_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (bench->parsed()) return cmd_bench(bench_args);
  } catch (const sprint::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
