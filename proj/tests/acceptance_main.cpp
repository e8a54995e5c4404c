// Acceptance gate: nine end-to-end checks over the assembled library, one
// pass/fail line each. Run with no arguments for the full gate or with
// criterion numbers (e.g. "acceptance 3 7") for a subset. Exit status is
// the number of failed criteria.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "sprint/bench.hpp"
#include "sprint/verify.hpp"

namespace {

using sprint::verify::SuiteReport;

constexpr std::uint64_t kSeed = 42;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

bool finish(int id, bool ok, const std::string& detail, double elapsed,
            double limit_s) {
  if (limit_s > 0.0 && elapsed > limit_s) ok = false;
  char timing[64];
  if (limit_s > 0.0) {
    std::snprintf(timing, sizeof(timing), "%.1fs (limit %.0fs)", elapsed,
                  limit_s);
  } else {
    std::snprintf(timing, sizeof(timing), "%.1fs", elapsed);
  }
  std::printf("[%s] criterion %d: %s; %s\n", ok ? "PASS" : "FAIL", id,
              detail.c_str(), timing);
  return ok;
}

std::string brief(const SuiteReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %.3g %s %.3g", r.name.c_str(),
                r.measured, r.passed ? "<=" : ">", r.threshold);
  return buf;
}

bool criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport r = sprint::verify::normalization_suite(100000, 1000, kSeed);
  return finish(1, r.passed,
                "per-feature sums after 1e5 events over 1e3 nodes, " + brief(r),
                seconds_since(t0), 30.0);
}

bool criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport r = sprint::verify::chain_suite(20, kSeed);
  return finish(2, r.passed,
                "chains 1..20 across five alpha values, " + brief(r),
                seconds_since(t0), 5.0);
}

bool criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport r = sprint::verify::replay_suite(10000, 5, kSeed);
  return finish(3, r.passed,
                "incremental vs naive replay at 5 checkpoints, " + brief(r),
                seconds_since(t0), 60.0);
}

bool criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport lin = sprint::verify::sketch_suite(10000, 16, kSeed);
  const SuiteReport avg = sprint::verify::averaging_suite(100, 16, kSeed);
  return finish(4, lin.passed && avg.passed, brief(lin) + "; " + brief(avg),
                seconds_since(t0), 0.0);
}

bool criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport r = sprint::verify::degree_suite(1000, kSeed);
  return finish(5, r.passed, brief(r) + ", first events exact",
                seconds_since(t0), 0.0);
}

bool criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport forced = sprint::verify::walk_chain_suite(kSeed);
  const SuiteReport star = sprint::verify::walk_star_suite(100000, kSeed);
  return finish(6, forced.passed && star.passed,
                brief(forced) + "; " + brief(star), seconds_since(t0), 60.0);
}

bool criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const sprint::bench::BenchReport report =
      sprint::bench::run_scaling({1000, 100000}, 40000, 5000, 10, kSeed);
  const bool ok = report.ratio_largest_to_smallest > 0.0 &&
                  report.ratio_largest_to_smallest <= 2.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "mean per-edge latency %.0f ns at 1e3 nodes vs %.0f ns at 1e5 "
                "nodes, ratio %.3f %s 2.0",
                report.sizes.front().mean_ns, report.sizes.back().mean_ns,
                report.ratio_largest_to_smallest, ok ? "<=" : ">");
  return finish(7, ok, buf, seconds_since(t0), 300.0);
}

bool criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport r = sprint::verify::persistence_suite(1000, 100, kSeed);
  return finish(8, r.passed, brief(r) + ", tampered hashes refused",
                seconds_since(t0), 0.0);
}

bool criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport r = sprint::verify::lookup_suite(100000, kSeed);
  return finish(9, r.passed,
                brief(r) + " mismatches, quantile hand case reproduced",
                seconds_since(t0), 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  bool (*criteria[])() = {criterion_1, criterion_2, criterion_3,
                          criterion_4, criterion_5, criterion_6,
                          criterion_7, criterion_8, criterion_9};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 9) {
      std::fprintf(stderr, "unknown criterion '%s' (expect 1..9)\n", argv[i]);
      return 64;
    }
    selected.push_back(id);
  }
  if (selected.empty()) {
    for (int id = 1; id <= 9; ++id) selected.push_back(id);
  }

  int failures = 0;
  for (int id : selected) {
    if (!criteria[id - 1]()) ++failures;
  }
  if (failures == 0) {
    std::printf("all %zu criteria passed\n", selected.size());
  } else {
    std::printf("%d of %zu criteria FAILED\n", failures, selected.size());
  }
  return failures;
}
