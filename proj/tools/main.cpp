// Copyright 2026 The layered_nav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// lnav: plan / run / bench / export.
//
// Exit codes:
//   0  success (run: goal reached)
//   2  bad arguments, unreadable or malformed config/library, Ts mismatch
//   3  plan: no path converged; export: empty library
//   4  run: collision
//   5  run: timeout

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lnav/config.hpp"
#include "lnav/library_io.hpp"
#include "lnav/sim.hpp"

namespace fs = std::filesystem;
using namespace lnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitCollided = 4;
constexpr int kExitTimeout = 5;

struct Options {
  std::string config;
  std::string library;
  std::string controller = "mcbf";
  std::string out;
  int trials = 5;
  std::optional<std::uint64_t> seed;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Config config_from(const Options& o) {
  if (o.config.empty()) return Config{};
  return load_config(o.config);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

// Library from --library, or planned on the spot when none is given.
PathLibrary library_for(const Config& cfg, const Options& o) {
  PathLibrary lib;
  if (o.library.empty()) {
    lib = build_library(cfg.scenario.start, cfg.scenario.goal, cfg.trajopt);
  } else {
    lib = read_library(o.library);
  }
  if (lib.ts != cfg.trajopt.ts) {
    throw UsageError("library Ts " + std::to_string(lib.ts) + " does not match config Ts " +
                     std::to_string(cfg.trajopt.ts));
  }
  if ((lib.goal.position() - cfg.scenario.goal.position()).norm() > 1e-9) {
    throw UsageError("library goal does not match the scenario goal");
  }
  if (lib.converged_count() == 0) throw UsageError("library has no converged path");
  return lib;
}

void print_metrics(const Metrics& m) {
  std::printf("qp_failures=%d safety_pct=%.1f success_pct=%.1f v_bar=%.4f omega_bar=%.4f "
              "e_v=%.4f e_omega=%.4f\n",
              m.qp_failures, m.safety_pct, m.success_pct, m.v_bar, m.omega_bar, m.e_v,
              m.e_omega);
}

int cmd_plan(const Options& o) {
  const Config cfg = config_from(o);
  if (o.out.empty()) throw UsageError("plan requires --out");
  BuildStats stats;
  const PathLibrary lib =
      build_library(cfg.scenario.start, cfg.scenario.goal, cfg.trajopt, &stats);
  for (std::size_t p = 0; p < lib.entries.size(); ++p) {
    const PathEntry& e = lib.entries[p];
    std::printf("path %d offset %+.3f %s iters=%d primal=%.2e dual=%.2e time=%.3fs\n",
                e.path_index, e.lateral_offset, e.converged ? "converged" : "NOT converged",
                e.iterations, e.primal_residual, e.dual_residual, stats.path_seconds[p]);
  }
  for (const auto& w : stats.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("%zu/%zu paths converged, total %.3fs\n", lib.converged_count(),
              lib.entries.size(), stats.total_seconds);
  if (lib.converged_count() == 0) return kExitEmpty;
  write_library(lib, o.out);
  return kExitOk;
}

int cmd_run(const Options& o) {
  const Config cfg = config_from(o);
  const ControllerKind kind = parse_controller(o.controller);
  const PathLibrary lib = library_for(cfg, o);
  const EpisodeResult res = run_episode(cfg.scenario, kind, lib, cfg.navigator);
  if (!o.out.empty()) write_file(o.out, trace_to_csv(res.trace));
  std::printf("controller=%s outcome=%s ticks=%zu final_goal_distance=%.3f\n",
              o.controller.c_str(), outcome_name(res.outcome).c_str(), res.trace.size() - 1,
              res.final_goal_distance);
  print_metrics(res.metrics);
  switch (res.outcome) {
    case Outcome::kReached:
      return kExitOk;
    case Outcome::kCollided:
      return kExitCollided;
    case Outcome::kTimeout:
      return kExitTimeout;
  }
  return kExitTimeout;
}

int cmd_bench(const Options& o) {
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  const Config cfg = config_from(o);
  const PathLibrary lib = library_for(cfg, o);
  const std::uint64_t seed = o.seed.value_or(cfg.scenario.seed);
  const BenchmarkResult res = run_benchmark(cfg.scenario, {ControllerKind::kCbf, ControllerKind::kMcbf},
                                            o.trials, seed, lib, cfg.navigator);
  const std::string table = metrics_table(res.rows);
  std::fputs(table.c_str(), stdout);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_file(dir / "metrics.csv", metrics_csv(res.rows));
    write_file(dir / "metrics.txt", table);
    for (const auto& e : res.episodes) {
      write_file(dir / "traces" /
                     (controller_name(e.controller) + "_trial" + std::to_string(e.trial) + ".csv"),
                 trace_to_csv(e.result.trace));
    }
  }
  return kExitOk;
}

int cmd_export(const Options& o) {
  if (o.library.empty()) throw UsageError("export requires --library");
  if (o.out.empty()) throw UsageError("export requires --out");
  const PathLibrary lib = read_library(o.library);
  if (lib.entries.empty()) {
    std::fprintf(stderr, "library is empty\n");
    return kExitEmpty;
  }
  const fs::path dir(o.out);
  std::string wp = "path,k,x,y\n";
  char buf[160];
  for (const auto& e : lib.entries) {
    std::string poly = "i,t,px,py,theta\n";
    for (std::size_t i = 0; i < e.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", i,
                    static_cast<double>(i) * lib.ts, e.x[i].px, e.x[i].py, e.x[i].theta);
      poly += buf;
    }
    write_file(dir / ("path_" + std::to_string(e.path_index) + ".csv"), poly);
    for (std::size_t k = 0; k < e.waypoints.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%d,%zu,%.17g,%.17g\n", e.path_index, k, e.waypoints[k].x(),
                    e.waypoints[k].y());
      wp += buf;
    }
  }
  write_file(dir / "waypoints.csv", wp);
  std::printf("exported %zu paths to %s\n", lib.entries.size(), dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered navigation: offline path library plus reactive safety filter"};
  app.require_subcommand(1);
  Options o;

  auto* plan = app.add_subcommand("plan", "Build the path library and write it to --out");
  plan->add_option("--config", o.config, "JSON config (defaults when omitted)");
  plan->add_option("--out", o.out, "Library output file")->required();

  auto* run = app.add_subcommand("run", "Run one closed-loop episode");
  run->add_option("--config", o.config, "JSON config");
  run->add_option("--library", o.library, "Library file (planned on the fly when omitted)");
  run->add_option("--controller", o.controller, "mcbf or cbf")
      ->check(CLI::IsMember({"mcbf", "cbf"}));
  run->add_option("--out", o.out, "Trace CSV output");

  auto* bench = app.add_subcommand("bench", "Benchmark both controllers over seeded starts");
  bench->add_option("--config", o.config, "JSON config");
  bench->add_option("--library", o.library, "Library file (planned on the fly when omitted)");
  bench->add_option("--trials", o.trials, "Trials per controller");
  bench->add_option("--seed", o.seed, "Seed for the start draws (config seed by default)");
  bench->add_option("--out", o.out, "Output directory for tables and traces");

  auto* exp = app.add_subcommand("export", "Dump library polylines and waypoints as CSV");
  exp->add_option("--library", o.library, "Library file")->required();
  exp->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(o);
    if (*run) return cmd_run(o);
    if (*bench) return cmd_bench(o);
    if (*exp) return cmd_export(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const LibraryFormatError& e) {
    std::fprintf(stderr, "library error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
