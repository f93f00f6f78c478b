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

#include <gtest/gtest.h>

#include <cmath>

#include "lnav/sim.hpp"

using namespace lnav;

namespace {

const PathLibrary& library() {
  static const PathLibrary lib = build_library({0, 0, 0}, {4, 0, 0}, TrajoptConfig{});
  return lib;
}

Scenario moving_scenario() {
  Scenario sc;
  sc.duration = 20.0;
  sc.obstacles = {Obstacle(0, Circle{{2.0, 0.6}, 0.3}),
                  Obstacle(1, Circle{{3.0, 1.5}, 0.3}, MotionScript{{{3.0, 1.5}, {3.0, -1.5}}, 0.8})};
  sc.start_jitter = Vec3(0.2, 0.2, 0.2);
  return sc;
}

}  // namespace

TEST(Actuator, RateLimit) {
  const ActuatorLimits lim;
  const InputBounds b;
  EXPECT_EQ(actuator_step({0.4, 0.1}, {0.4, 0.1}, 0.01, lim, b), Input({0.4, 0.1}));
  EXPECT_DOUBLE_EQ(actuator_step({0, 0}, {1, 0}, 0.01, lim, b).v, 0.02);
  // Reaches the command within ceil(|d| / (a dt)) ticks.
  Input m;
  const int bound = static_cast<int>(std::ceil(1.0 / (lim.v_accel * 0.01)));
  int k = 0;
  while (m.v != 1.0 && k < 1000) {
    m = actuator_step(m, {1.0, 0.0}, 0.01, lim, b);
    ++k;
  }
  EXPECT_LE(k, bound);
  EXPECT_EQ(actuator_step({0.9, 0}, {5, -5}, 1.0, lim, b), Input({1.0, -2.0}));
}

TEST(Episode, EmptyWorldReaches) {
  const EpisodeResult r = run_episode(Scenario{}, ControllerKind::kMcbf, library(), {});
  EXPECT_EQ(r.outcome, Outcome::kReached);
  EXPECT_EQ(r.metrics.safety_pct, 100.0);
  EXPECT_EQ(r.metrics.success_pct, 100.0);
  EXPECT_EQ(r.metrics.qp_failures, 0);
  EXPECT_LE(r.final_goal_distance, 0.3);
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    EXPECT_NEAR(r.trace[k].t, 0.01 * static_cast<double>(k), 1e-12);
  }
}

TEST(Episode, StartInsideObstacleCollidesAtTickZero) {
  Scenario sc;
  sc.obstacles = {Obstacle(0, Circle{{0, 0}, 0.5})};
  const EpisodeResult r = run_episode(sc, ControllerKind::kMcbf, library(), {});
  EXPECT_EQ(r.outcome, Outcome::kCollided);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.metrics.safety_pct, 0.0);
  EXPECT_THROW(sc.validate(), std::invalid_argument);
}

TEST(Episode, DeterministicTrace) {
  const Scenario sc = moving_scenario();
  const EpisodeResult a = run_episode(sc, ControllerKind::kMcbf, library(), {});
  const EpisodeResult b = run_episode(sc, ControllerKind::kMcbf, library(), {});
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(trace_to_csv(a.trace), trace_to_csv(b.trace));
}

TEST(Episode, TraceReplayGivesSameMetrics) {
  const Scenario sc = moving_scenario();
  for (auto kind : {ControllerKind::kMcbf, ControllerKind::kCbf}) {
    const EpisodeResult r = run_episode(sc, kind, library(), {});
    const Trace back = trace_from_csv(trace_to_csv(r.trace));
    EXPECT_EQ(back, r.trace);
    EXPECT_EQ(compute_metrics(back, sc.goal.position(), 0.3), r.metrics);
    EXPECT_EQ(trace_outcome(back, sc.goal.position(), 0.3), r.outcome);
    // Safety accounting agrees with the outcome.
    bool any_hit = false;
    for (const auto& row : back) any_hit = any_hit || row.min_h <= 0.0;
    EXPECT_EQ(r.metrics.safety_pct == 100.0, !any_hit);
    EXPECT_EQ(r.outcome == Outcome::kCollided, any_hit);
  }
  EXPECT_THROW(trace_from_csv("t,cmd_v\n1,2\n"), std::runtime_error);
}

TEST(Episode, NoTrackingErrorWithUnlimitedActuators) {
  Scenario sc = moving_scenario();
  sc.accel = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const EpisodeResult r = run_episode(sc, ControllerKind::kMcbf, library(), {});
  EXPECT_EQ(r.metrics.e_v, 0.0);
  EXPECT_EQ(r.metrics.e_omega, 0.0);
}

TEST(Metrics, HandComputed) {
  Trace t(3);
  t[0].state = {0, 0, 0};
  t[0].min_h = 1.0;
  t[1].cmd = {1.0, 0.5};
  t[1].meas = {0.5, -0.5};
  t[1].min_h = 1.0;
  t[1].status = TickStatus::kSlack;
  t[2].cmd = {0.0, 0.0};
  t[2].meas = {0.25, 0.25};
  t[2].state = {3.9, 0, 0};
  t[2].min_h = 0.5;
  t[2].status = TickStatus::kOptimal;
  const Metrics m = compute_metrics(t, {4, 0}, 0.3);
  EXPECT_EQ(m.qp_failures, 1);
  EXPECT_EQ(m.success_pct, 100.0);
  EXPECT_EQ(m.safety_pct, 100.0);
  EXPECT_DOUBLE_EQ(m.v_bar, 0.375);
  EXPECT_DOUBLE_EQ(m.omega_bar, 0.375);
  EXPECT_DOUBLE_EQ(m.e_v, 0.375);
  EXPECT_DOUBLE_EQ(m.e_omega, 0.625);
  t[1].min_h = 0.0;
  EXPECT_EQ(trace_outcome(t, {4, 0}, 0.3), Outcome::kCollided);

  const Metrics agg = aggregate_metrics({m, compute_metrics(t, {4, 0}, 0.3)});
  EXPECT_EQ(agg.qp_failures, 2);
  EXPECT_EQ(agg.safety_pct, 50.0);
  EXPECT_EQ(agg.success_pct, 50.0);
}

TEST(Benchmark, EmptyWorldRowsIdentical) {
  const BenchmarkResult r = run_benchmark(Scenario{}, {ControllerKind::kMcbf, ControllerKind::kCbf},
                                          1, 5, library(), {});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].controller, "cbf");
  EXPECT_EQ(r.rows[1].controller, "mcbf");
  EXPECT_EQ(r.rows[0].metrics, r.rows[1].metrics);
  EXPECT_THROW(run_benchmark(Scenario{}, {ControllerKind::kMcbf}, 0, 5, library(), {}),
               std::invalid_argument);
}

TEST(Benchmark, ParallelMatchesSerial) {
  const Scenario sc = moving_scenario();
  const auto kinds = {ControllerKind::kMcbf, ControllerKind::kCbf};
  const BenchmarkResult p = run_benchmark(sc, kinds, 3, 9, library(), {}, Execution::kParallel);
  const BenchmarkResult s = run_benchmark(sc, kinds, 3, 9, library(), {}, Execution::kSerial);
  EXPECT_EQ(metrics_csv(p.rows), metrics_csv(s.rows));
  EXPECT_EQ(metrics_table(p.rows), metrics_table(s.rows));
  ASSERT_EQ(p.episodes.size(), s.episodes.size());
  for (std::size_t k = 0; k < p.episodes.size(); ++k) {
    EXPECT_EQ(p.episodes[k].result.trace, s.episodes[k].result.trace);
  }
}

TEST(Benchmark, TrialStarts) {
  Scenario sc = moving_scenario();
  const State a = trial_start(sc, 17, 2), b = trial_start(sc, 17, 2);
  EXPECT_EQ(a, b);
  EXPECT_NE(trial_start(sc, 17, 3), a);
  for (int k = 0; k < 50; ++k) {
    const State s = trial_start(sc, 4, k);
    EXPECT_LE(std::abs(s.px - sc.start.px), 0.2);
    EXPECT_LE(std::abs(s.py - sc.start.py), 0.2);
    EXPECT_TRUE(collision_check(s.position(), sc.obstacles, 0.0));
  }
  sc.start_jitter.setZero();
  EXPECT_EQ(trial_start(sc, 4, 1), sc.start);
}

TEST(Benchmark, TableShape) {
  const BenchmarkResult r = run_benchmark(Scenario{}, {ControllerKind::kMcbf, ControllerKind::kCbf},
                                          2, 5, library(), {});
  const std::string csv = metrics_csv(r.rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 7);  // controller + 7 metrics
}

TEST(ScenarioValidate, Errors) {
  Scenario sc;
  EXPECT_NO_THROW(sc.validate());
  sc.goal = {20, 0, 0};
  EXPECT_THROW(sc.validate(), std::invalid_argument);
  sc = Scenario{};
  sc.control_period = 0.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);
  sc = Scenario{};
  sc.obstacles = {Obstacle(0, Circle{{4, 0}, 0.2})};
  EXPECT_THROW(sc.validate(), std::invalid_argument);
  EXPECT_EQ(parse_tick_status("manifold_dropped"), TickStatus::kManifoldDropped);
  EXPECT_THROW(parse_tick_status("bogus"), std::runtime_error);
}
