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

#include "lnav/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lnav {

namespace {

double move_toward(double from, double to, double max_step) {
  const double d = to - from;
  if (std::abs(d) <= max_step) return to;
  return from + std::copysign(max_step, d);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

TickStatus status_of(const StepReport& rep) {
  if (rep.holding) return TickStatus::kHold;
  switch (rep.filter.outcome) {
    case FilterOutcome::kOptimal:
      return TickStatus::kOptimal;
    case FilterOutcome::kManifoldDropped:
      return TickStatus::kManifoldDropped;
    case FilterOutcome::kSlack:
      return TickStatus::kSlack;
  }
  return TickStatus::kOptimal;
}

bool inside(const Scenario& sc, const Vec2& p) {
  return (p.array() > sc.bounds_lo.array()).all() && (p.array() < sc.bounds_hi.array()).all();
}

// 53-bit uniform in [0, 1) straight from the engine, so draws do not depend
// on the standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void Scenario::validate() const {
  if (!(control_period > 0.0) || !(duration > 0.0)) {
    throw std::invalid_argument("scenario: control_period and duration must be positive");
  }
  if (!(accel.v_accel > 0.0) || !(accel.omega_accel > 0.0)) {
    throw std::invalid_argument("scenario: actuator limits must be positive");
  }
  if (!inside(*this, start.position())) throw std::invalid_argument("scenario: start outside bounds");
  if (!inside(*this, goal.position())) throw std::invalid_argument("scenario: goal outside bounds");
  World w = obstacles;
  for (auto& o : w) o.set_time(0.0);
  if (!collision_check(start.position(), w, 0.0)) {
    throw std::invalid_argument("scenario: start inside an obstacle");
  }
  if (!collision_check(goal.position(), w, 0.0)) {
    throw std::invalid_argument("scenario: goal inside an obstacle");
  }
}

Input actuator_step(const Input& measured, const Input& commanded, double dt,
                    const ActuatorLimits& limits, const InputBounds& bounds) {
  Input out;
  out.v = move_toward(measured.v, commanded.v, limits.v_accel * dt);
  out.omega = move_toward(measured.omega, commanded.omega, limits.omega_accel * dt);
  return bounds.clamp(out);
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kReached:
      return "reached";
    case Outcome::kCollided:
      return "collided";
    case Outcome::kTimeout:
      return "timeout";
  }
  return "timeout";
}

std::string tick_status_name(TickStatus s) {
  switch (s) {
    case TickStatus::kInit:
      return "init";
    case TickStatus::kOptimal:
      return "optimal";
    case TickStatus::kManifoldDropped:
      return "manifold_dropped";
    case TickStatus::kSlack:
      return "slack";
    case TickStatus::kHold:
      return "hold";
  }
  return "init";
}

TickStatus parse_tick_status(const std::string& name) {
  for (auto s : {TickStatus::kInit, TickStatus::kOptimal, TickStatus::kManifoldDropped,
                 TickStatus::kSlack, TickStatus::kHold}) {
    if (tick_status_name(s) == name) return s;
  }
  throw std::runtime_error("unknown qp_status '" + name + "'");
}

Outcome trace_outcome(const Trace& trace, const Vec2& goal, double goal_tol) {
  for (const auto& r : trace) {
    if (r.min_h <= 0.0) return Outcome::kCollided;
  }
  if (!trace.empty() && (trace.back().state.position() - goal).norm() <= goal_tol) {
    return Outcome::kReached;
  }
  return Outcome::kTimeout;
}

Metrics compute_metrics(const Trace& trace, const Vec2& goal, double goal_tol) {
  Metrics m;
  const Outcome o = trace_outcome(trace, goal, goal_tol);
  m.safety_pct = o == Outcome::kCollided ? 0.0 : 100.0;
  m.success_pct = o == Outcome::kReached ? 100.0 : 0.0;
  std::size_t n = 0;
  for (const auto& r : trace) {
    if (r.status == TickStatus::kInit) continue;
    if (r.status == TickStatus::kManifoldDropped || r.status == TickStatus::kSlack) {
      ++m.qp_failures;
    }
    m.v_bar += std::abs(r.meas.v);
    m.omega_bar += std::abs(r.meas.omega);
    m.e_v += std::abs(r.cmd.v - r.meas.v);
    m.e_omega += std::abs(r.cmd.omega - r.meas.omega);
    ++n;
  }
  if (n > 0) {
    const double inv = 1.0 / static_cast<double>(n);
    m.v_bar *= inv;
    m.omega_bar *= inv;
    m.e_v *= inv;
    m.e_omega *= inv;
  }
  return m;
}

EpisodeResult run_episode(const Scenario& sc, ControllerKind controller, const PathLibrary& lib,
                          const NavigatorParams& params) {
  EpisodeResult res;
  World world = sc.obstacles;
  std::vector<ObstacleTrack> tracks(world.size());
  const double dt = sc.control_period;
  const auto steps = static_cast<long>(std::llround(sc.duration / dt));
  const Vec2 goal = lib.goal.position();

  for (auto& o : world) o.set_time(0.0);
  State s = sc.start;
  Input meas;
  NavigatorState nav;

  TraceRow row;
  row.t = 0.0;
  row.state = s;
  row.min_h = min_boundary(s.position(), world);
  res.trace.push_back(row);

  auto finished = [&](const TraceRow& r) {
    return r.min_h <= 0.0 || (r.state.position() - goal).norm() <= params.goal_tol;
  };

  if (!finished(row)) {
    res.trace.reserve(static_cast<std::size_t>(steps) + 1);
    res.step_seconds.reserve(static_cast<std::size_t>(steps));
    for (long k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      for (std::size_t j = 0; j < world.size(); ++j) {
        world[j].set_time(t);
        tracks[j].add_sample(t, world[j].reference_point());
      }
      const auto c0 = std::chrono::steady_clock::now();
      const StepReport rep = control_step(s, lib, world, tracks, t, dt, controller, params, nav);
      res.step_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count());

      meas = actuator_step(meas, rep.command, dt, sc.accel, params.filter.bounds);
      s = rk4_step(s, meas, dt);

      const double t_next = static_cast<double>(k + 1) * dt;
      for (auto& o : world) o.set_time(t_next);
      row.t = t_next;
      row.cmd = rep.command;
      row.meas = meas;
      row.state = s;
      row.min_h = min_boundary(s.position(), world);
      row.path_q = nav.q;
      row.ref_i = nav.i;
      row.status = status_of(rep);
      res.trace.push_back(row);
      if (finished(row)) break;
    }
  }

  res.outcome = trace_outcome(res.trace, goal, params.goal_tol);
  res.metrics = compute_metrics(res.trace, goal, params.goal_tol);
  res.final_goal_distance = (res.trace.back().state.position() - goal).norm();
  return res;
}

State trial_start(const Scenario& sc, std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  World w = sc.obstacles;
  for (auto& o : w) o.set_time(0.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    State s = sc.start;
    s.px += (2.0 * unit_uniform(rng) - 1.0) * sc.start_jitter(0);
    s.py += (2.0 * unit_uniform(rng) - 1.0) * sc.start_jitter(1);
    s.theta = wrap_angle(s.theta + (2.0 * unit_uniform(rng) - 1.0) * sc.start_jitter(2));
    if (inside(sc, s.position()) && collision_check(s.position(), w, 0.0)) return s;
  }
  return sc.start;
}

Metrics aggregate_metrics(const std::vector<Metrics>& per_trial) {
  Metrics m;
  m.safety_pct = 0.0;
  if (per_trial.empty()) return m;
  for (const auto& t : per_trial) {
    m.qp_failures += t.qp_failures;
    m.safety_pct += t.safety_pct;
    m.success_pct += t.success_pct;
    m.v_bar += t.v_bar;
    m.omega_bar += t.omega_bar;
    m.e_v += t.e_v;
    m.e_omega += t.e_omega;
  }
  const double inv = 1.0 / static_cast<double>(per_trial.size());
  m.safety_pct *= inv;
  m.success_pct *= inv;
  m.v_bar *= inv;
  m.omega_bar *= inv;
  m.e_v *= inv;
  m.e_omega *= inv;
  return m;
}

BenchmarkResult run_benchmark(const Scenario& sc, const std::vector<ControllerKind>& controllers,
                              int trials, std::uint64_t seed, const PathLibrary& lib,
                              const NavigatorParams& params, Execution exec) {
  if (trials < 1) throw std::invalid_argument("run_benchmark: trials must be >= 1");
  std::vector<ControllerKind> ctrls = controllers;
  std::sort(ctrls.begin(), ctrls.end(), [](ControllerKind a, ControllerKind b) {
    return controller_name(a) < controller_name(b);
  });
  ctrls.erase(std::unique(ctrls.begin(), ctrls.end()), ctrls.end());

  std::vector<State> starts;
  for (int k = 0; k < trials; ++k) starts.push_back(trial_start(sc, seed, k));

  BenchmarkResult out;
  const int n = static_cast<int>(ctrls.size()) * trials;
  out.episodes.resize(static_cast<std::size_t>(n));
  auto run_one = [&](int idx) {
    const auto c = static_cast<std::size_t>(idx / trials);
    const int k = idx % trials;
    Scenario trial_sc = sc;
    trial_sc.start = starts[static_cast<std::size_t>(k)];
    EpisodeSummary& e = out.episodes[static_cast<std::size_t>(idx)];
    e.controller = ctrls[c];
    e.trial = k;
    e.result = run_episode(trial_sc, ctrls[c], lib, params);
  };

  if (exec == Execution::kParallel && n > 1) {
    const int threads = std::min(worker_count(), n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int idx = 0; idx < n; ++idx) run_one(idx);
  } else {
    for (int idx = 0; idx < n; ++idx) run_one(idx);
  }

  for (std::size_t c = 0; c < ctrls.size(); ++c) {
    std::vector<Metrics> per;
    for (int k = 0; k < trials; ++k) {
      per.push_back(out.episodes[c * static_cast<std::size_t>(trials) + static_cast<std::size_t>(k)]
                        .result.metrics);
    }
    out.rows.push_back({controller_name(ctrls[c]), aggregate_metrics(per)});
  }
  return out;
}

std::string trace_to_csv(const Trace& trace) {
  std::string out = "t,cmd_v,cmd_w,meas_v,meas_w,px,py,theta,min_h,path_q,ref_i,qp_status\n";
  for (const auto& r : trace) {
    out += fmt(r.t) + ',' + fmt(r.cmd.v) + ',' + fmt(r.cmd.omega) + ',' + fmt(r.meas.v) + ',' +
           fmt(r.meas.omega) + ',' + fmt(r.state.px) + ',' + fmt(r.state.py) + ',' +
           fmt(r.state.theta) + ',' + fmt(r.min_h) + ',' + std::to_string(r.path_q) + ',' +
           std::to_string(r.ref_i) + ',' + tick_status_name(r.status) + '\n';
  }
  return out;
}

Trace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,cmd_v,cmd_w,meas_v,meas_w,px,py,theta,min_h,path_q,ref_i,qp_status") {
    throw std::runtime_error("trace: unexpected header");
  }
  Trace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 12) throw std::runtime_error("trace: expected 12 fields");
    try {
      TraceRow r;
      r.t = std::stod(f[0]);
      r.cmd = {std::stod(f[1]), std::stod(f[2])};
      r.meas = {std::stod(f[3]), std::stod(f[4])};
      r.state = {std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
      r.min_h = std::stod(f[8]);
      r.path_q = std::stoi(f[9]);
      r.ref_i = std::stoi(f[10]);
      r.status = parse_tick_status(f[11]);
      trace.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("trace: malformed number in '" + line + "'");
    }
  }
  return trace;
}

std::string metrics_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "controller,qp_failures,safety_pct,success_pct,v_bar,omega_bar,e_v,e_omega\n";
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    out += r.controller + ',' + std::to_string(m.qp_failures) + ',' + fixed(m.safety_pct, 1) +
           ',' + fixed(m.success_pct, 1) + ',' + fixed(m.v_bar, 6) + ',' + fixed(m.omega_bar, 6) +
           ',' + fixed(m.e_v, 6) + ',' + fixed(m.e_omega, 6) + '\n';
  }
  return out;
}

std::string metrics_table(const std::vector<BenchmarkRow>& rows) {
  const std::vector<std::string> head = {"controller", "qp_fail", "safety_%", "success_%",
                                         "v_bar",      "w_bar",   "e_v",      "e_w"};
  std::vector<std::vector<std::string>> cells = {head};
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    cells.push_back({r.controller, std::to_string(m.qp_failures), fixed(m.safety_pct, 1),
                     fixed(m.success_pct, 1), fixed(m.v_bar, 3), fixed(m.omega_bar, 3),
                     fixed(m.e_v, 3), fixed(m.e_omega, 3)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out += c == 0 ? row[c] + pad : "  " + pad + row[c];
    }
    out += '\n';
  }
  return out;
}

}  // namespace lnav
