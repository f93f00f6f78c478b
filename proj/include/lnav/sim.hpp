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

// Fixed-step closed-loop simulator, episode metrics and the benchmark
// harness. Everything here is deterministic given the scenario and seed.

#ifndef LNAV_SIM_HPP_
#define LNAV_SIM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lnav/navigator.hpp"
#include "lnav/parallel.hpp"

namespace lnav {

struct ActuatorLimits {
  double v_accel = 2.0;      // m/s^2
  double omega_accel = 4.0;  // rad/s^2

  friend bool operator==(const ActuatorLimits&, const ActuatorLimits&) = default;
};

struct Scenario {
  Vec2 bounds_lo = Vec2(-1.0, -3.0);
  Vec2 bounds_hi = Vec2(8.0, 3.0);
  World obstacles;
  State start;
  State goal = {4.0, 0.0, 0.0};
  double control_period = 0.01;  // s
  ActuatorLimits accel;
  double duration = 60.0;  // s
  std::uint64_t seed = 1;
  /// Half-widths (m, m, rad) of the box benchmark starts are drawn from.
  Vec3 start_jitter = Vec3::Zero();

  /// Throws std::invalid_argument if start or goal is outside the bounds or
  /// inside an obstacle at t = 0, or on non-positive periods.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Rate-limits each channel toward the command, then clamps to bounds.
Input actuator_step(const Input& measured, const Input& commanded, double dt,
                    const ActuatorLimits& limits, const InputBounds& bounds);

enum class Outcome { kReached, kCollided, kTimeout };
std::string outcome_name(Outcome o);

enum class TickStatus { kInit, kOptimal, kManifoldDropped, kSlack, kHold };
std::string tick_status_name(TickStatus s);
TickStatus parse_tick_status(const std::string& name);

struct TraceRow {
  double t = 0.0;
  Input cmd;
  Input meas;
  State state;
  double min_h = 0.0;
  int path_q = -1;
  int ref_i = 0;
  TickStatus status = TickStatus::kInit;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

using Trace = std::vector<TraceRow>;

struct Metrics {
  int qp_failures = 0;
  double safety_pct = 100.0;
  double success_pct = 0.0;
  double v_bar = 0.0;
  double omega_bar = 0.0;
  double e_v = 0.0;
  double e_omega = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Outcome implied by a trace: collided if any min_h <= 0, reached if the
/// last state is within goal_tol of the goal, timeout otherwise.
Outcome trace_outcome(const Trace& trace, const Vec2& goal, double goal_tol);
/// Table metrics of one episode, computed from its trace alone.
Metrics compute_metrics(const Trace& trace, const Vec2& goal, double goal_tol);

struct EpisodeResult {
  Trace trace;
  Metrics metrics;
  Outcome outcome = Outcome::kTimeout;
  double final_goal_distance = 0.0;
  /// Wall time of every control_step call.
  std::vector<double> step_seconds;
};

EpisodeResult run_episode(const Scenario& sc, ControllerKind controller, const PathLibrary& lib,
                          const NavigatorParams& params);

/// Start of benchmark trial `trial`: sc.start plus a uniform draw from the
/// jitter box, redrawn until it is collision-free.
State trial_start(const Scenario& sc, std::uint64_t seed, int trial);

struct BenchmarkRow {
  std::string controller;
  Metrics metrics;
};

struct EpisodeSummary {
  ControllerKind controller = ControllerKind::kMcbf;
  int trial = 0;
  EpisodeResult result;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;  // sorted by controller name
  std::vector<EpisodeSummary> episodes;
};

/// Mean of per-trial metrics, except qp_failures which is summed.
Metrics aggregate_metrics(const std::vector<Metrics>& per_trial);

/// Throws std::invalid_argument for trials < 1.
BenchmarkResult run_benchmark(const Scenario& sc, const std::vector<ControllerKind>& controllers,
                              int trials, std::uint64_t seed, const PathLibrary& lib,
                              const NavigatorParams& params,
                              Execution exec = Execution::kParallel);

std::string trace_to_csv(const Trace& trace);
/// Throws std::runtime_error on a malformed file.
Trace trace_from_csv(const std::string& text);

std::string metrics_csv(const std::vector<BenchmarkRow>& rows);
std::string metrics_table(const std::vector<BenchmarkRow>& rows);

}  // namespace lnav

#endif  // LNAV_SIM_HPP_
