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

#include "lnav/trajopt.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lnav {

// ---------------------------------------------------------------------------
// Waypoints

std::vector<WaypointSet> generate_waypoints(const State& start, const State& goal, double L,
                                            double delta, int tau,
                                            const std::vector<WaypointOverride>& overrides) {
  if (!(L > 0.0) || !(delta > 0.0) || tau < 1) {
    throw std::invalid_argument("generate_waypoints requires L > 0, delta > 0, tau >= 1");
  }
  const Vec2 p0 = start.position();
  const Vec2 span = goal.position() - p0;
  const double dist = span.norm();
  const Vec2 dir = dist > 0.0 ? Vec2(span / dist)
                              : Vec2(std::cos(start.theta), std::sin(start.theta));
  const Vec2 normal(-dir.y(), dir.x());

  int n = L < delta ? 1 : static_cast<int>(std::lround(L / delta));
  n = std::max(n, 1);

  std::vector<WaypointSet> sets(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    WaypointSet& s = sets[static_cast<std::size_t>(p)];
    s.path_index = p;
    s.lateral_offset = (p - 0.5 * (n - 1)) * delta;
    s.start = start;
    s.goal = goal;
    for (int k = 1; k <= tau; ++k) {
      const double along = k * dist / (tau + 1);
      s.points.push_back(p0 + along * dir + s.lateral_offset * normal);
    }
  }
  for (const auto& o : overrides) {
    if (o.path < 0 || o.path >= n || o.waypoint < 0 || o.waypoint >= tau) {
      std::ostringstream msg;
      msg << "waypoint override (" << o.path << ", " << o.waypoint << ") out of range";
      throw std::invalid_argument(msg.str());
    }
    sets[static_cast<std::size_t>(o.path)].points[static_cast<std::size_t>(o.waypoint)] =
        o.position;
  }
  return sets;
}

std::vector<int> waypoint_time_indices(int horizon, int tau) {
  if (tau < 1 || horizon % (tau + 1) != 0) {
    throw std::invalid_argument("horizon must be a multiple of tau + 1");
  }
  const int spacing = horizon / (tau + 1);
  std::vector<int> idx;
  for (int k = 1; k <= tau; ++k) idx.push_back(k * spacing);
  return idx;
}

// ---------------------------------------------------------------------------
// Trajectory arithmetic

TrajectoryVars TrajectoryVars::zeros(int horizon) {
  TrajectoryVars t;
  t.x.assign(static_cast<std::size_t>(horizon + 1), Vec3::Zero());
  t.u.assign(static_cast<std::size_t>(horizon), Vec2::Zero());
  return t;
}

TrajectoryVars traj_diff(const TrajectoryVars& a, const TrajectoryVars& b) {
  TrajectoryVars out;
  out.x.resize(a.x.size());
  out.u.resize(a.u.size());
  for (std::size_t i = 0; i < a.x.size(); ++i) out.x[i] = state_diff(a.x[i], b.x[i]);
  for (std::size_t i = 0; i < a.u.size(); ++i) out.u[i] = a.u[i] - b.u[i];
  return out;
}

double traj_inf_norm(const TrajectoryVars& a) {
  double m = 0.0;
  for (const auto& x : a.x) m = std::max(m, x.cwiseAbs().maxCoeff());
  for (const auto& u : a.u) m = std::max(m, u.cwiseAbs().maxCoeff());
  return m;
}

// ---------------------------------------------------------------------------
// zbar step: per-time-step projection

TrajectoryVars zbar_update(const TrajectoryVars& z, const TrajectoryVars& v,
                           const WaypointSet& wp, const InputBounds& bounds, double rho,
                           const CostParams& cost) {
  const int horizon = z.horizon();
  const int tau = static_cast<int>(wp.points.size());
  const std::vector<int> wp_idx = waypoint_time_indices(horizon, tau);

  TrajectoryVars zbar;
  zbar.x.resize(z.x.size());
  zbar.u.resize(z.u.size());

  const double u_scale = rho / (2.0 * cost.input_weight + rho);
  for (int i = 0; i < horizon; ++i) {
    const Vec2 target = z.u[i] + v.u[i];
    zbar.u[i] = Vec2(std::clamp(u_scale * target(0), bounds.v_min, bounds.v_max),
                     std::clamp(u_scale * target(1), bounds.omega_min, bounds.omega_max));
  }

  const Vec2 goal_pos = wp.goal.position();
  const double denom = rho + 2.0 * cost.state_weight;
  for (int i = 0; i <= horizon; ++i) {
    const Vec3 target = z.x[i] + v.x[i];
    Vec3 xb = target;
    if (i == horizon) {
      xb = wp.goal.vec();
    } else if (auto it = std::find(wp_idx.begin(), wp_idx.end(), i); it != wp_idx.end()) {
      const Vec2& w = wp.points[static_cast<std::size_t>(it - wp_idx.begin())];
      xb.head<2>() = w;
    } else if (cost.state_weight > 0.0) {
      xb.head<2>() = (rho * target.head<2>() + 2.0 * cost.state_weight * goal_pos) / denom;
    }
    zbar.x[i] = xb;
  }
  return zbar;
}

// ---------------------------------------------------------------------------
// Riccati backward pass

RiccatiResult riccati_backward(const std::vector<Mat3>& A, const std::vector<Mat32>& B,
                               const TrackingResiduals& res, double rho) {
  const std::size_t horizon = A.size();
  if (B.size() != horizon || res.d.size() != horizon || res.c.size() != horizon + 1) {
    throw std::invalid_argument("riccati_backward: inconsistent sequence lengths");
  }
  if (!(rho > 0.0)) throw std::invalid_argument("riccati_backward: rho must be positive");

  RiccatiResult r;
  r.K.resize(horizon);
  r.w.resize(horizon);
  r.P.resize(horizon + 1);
  r.b.resize(horizon + 1);
  r.q.resize(horizon + 1);

  const double half_rho = 0.5 * rho;
  r.P[horizon] = half_rho * Mat3::Identity();
  r.b[horizon] = rho * res.c[horizon];
  r.q[horizon] = half_rho * res.c[horizon].squaredNorm();

  for (std::size_t k = horizon; k-- > 0;) {
    const Mat3& Pn = r.P[k + 1];
    const Vec3& bn = r.b[k + 1];
    const Mat3& Ak = A[k];
    const Mat32& Bk = B[k];
    const Vec3& c = res.c[k];
    const Vec2& d = res.d[k];

    Mat2 phi = half_rho * Mat2::Identity() + Bk.transpose() * Pn * Bk;
    Eigen::LLT<Mat2> llt(phi);
    if (llt.info() != Eigen::Success) {
      phi += 1e-9 * Mat2::Identity();
      llt.compute(phi);
      r.regularized = true;
    }
    const Mat23 K = llt.solve(Bk.transpose() * Pn * Ak);
    const Vec2 w = 0.5 * llt.solve(rho * d + Bk.transpose() * bn);
    const Mat3 a_cl = Ak - Bk * K;
    const Vec3 pbw = Pn * (Bk * w);

    r.K[k] = K;
    r.w[k] = w;
    r.P[k] = half_rho * Mat3::Identity() + half_rho * K.transpose() * K +
             a_cl.transpose() * Pn * a_cl;
    r.P[k] = 0.5 * (r.P[k] + r.P[k].transpose());
    r.b[k] = rho * c + rho * K.transpose() * (w - d) + a_cl.transpose() * bn -
             2.0 * a_cl.transpose() * pbw;
    r.q[k] = half_rho * c.squaredNorm() + half_rho * (d - w).squaredNorm() +
             (Bk * w).dot(pbw) - bn.dot(Bk * w) + r.q[k + 1];
  }
  return r;
}

// ---------------------------------------------------------------------------
// iLQR z step

std::vector<Vec3> rollout(const State& xi, const std::vector<Vec2>& u, double ts) {
  std::vector<Vec3> x(u.size() + 1);
  x[0] = xi.vec();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const State s{x[i](0), x[i](1), x[i](2)};
    x[i + 1] = x[i] + rk4_increment(s, Input::from_vec(u[i]), ts);
  }
  return x;
}

namespace {

// Tracking target r = zbar - v.
TrajectoryVars tracking_target(const TrajectoryVars& zbar, const TrajectoryVars& v) {
  TrajectoryVars r;
  r.x.resize(zbar.x.size());
  r.u.resize(zbar.u.size());
  for (std::size_t i = 0; i < zbar.x.size(); ++i) r.x[i] = zbar.x[i] - v.x[i];
  for (std::size_t i = 0; i < zbar.u.size(); ++i) r.u[i] = zbar.u[i] - v.u[i];
  return r;
}

double tracking_cost(const TrajectoryVars& z, const TrajectoryVars& r, double rho) {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.x.size(); ++i) acc += state_diff(z.x[i], r.x[i]).squaredNorm();
  for (std::size_t i = 0; i < z.u.size(); ++i) acc += (z.u[i] - r.u[i]).squaredNorm();
  return 0.5 * rho * acc;
}

RiccatiResult backward_at(const TrajectoryVars& z, const TrajectoryVars& r, double rho,
                          double ts) {
  const std::size_t horizon = z.u.size();
  std::vector<Mat3> A(horizon);
  std::vector<Mat32> B(horizon);
  TrackingResiduals res;
  res.c.resize(horizon + 1);
  res.d.resize(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    const Jacobians j = linearize(State{z.x[i](0), z.x[i](1), z.x[i](2)},
                                  Input::from_vec(z.u[i]), ts);
    A[i] = j.a;
    B[i] = j.b;
    res.c[i] = state_diff(z.x[i], r.x[i]);
    res.d[i] = z.u[i] - r.u[i];
  }
  res.c[horizon] = state_diff(z.x[horizon], r.x[horizon]);
  return riccati_backward(A, B, res, rho);
}

}  // namespace

double prox_objective(const TrajectoryVars& z, const TrajectoryVars& zbar,
                      const TrajectoryVars& v, double rho) {
  return tracking_cost(z, tracking_target(zbar, v), rho);
}

IlqrResult ilqr_solve(const TrajectoryVars& zbar, const TrajectoryVars& v, const State& xi,
                      double rho, double ts, int max_inner, double tol,
                      const std::vector<Vec2>& u_init) {
  const int horizon = zbar.horizon();
  const TrajectoryVars r = tracking_target(zbar, v);

  IlqrResult out;
  out.z.u = u_init.empty() ? std::vector<Vec2>(static_cast<std::size_t>(horizon), Vec2::Zero())
                           : u_init;
  out.z.x = rollout(xi, out.z.u, ts);
  double cost = tracking_cost(out.z, r, rho);
  out.objective_trace.push_back(cost);

  constexpr int kMaxHalvings = 8;
  TrajectoryVars cand;
  cand.u.resize(out.z.u.size());
  for (int it = 0; it < max_inner; ++it) {
    ++out.iterations;
    const RiccatiResult bw = backward_at(out.z, r, rho, ts);

    bool accepted = false;
    double step = 1.0;
    double cand_cost = cost;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      cand.x.assign(out.z.x.size(), Vec3::Zero());
      cand.x[0] = xi.vec();
      for (int i = 0; i < horizon; ++i) {
        const Vec3 dx = state_diff(cand.x[i], out.z.x[i]);
        cand.u[i] = out.z.u[i] - step * bw.w[i] - bw.K[i] * dx;
        const State s{cand.x[i](0), cand.x[i](1), cand.x[i](2)};
        cand.x[i + 1] = cand.x[i] + rk4_increment(s, Input::from_vec(cand.u[i]), ts);
      }
      cand_cost = tracking_cost(cand, r, rho);
      if (cand_cost <= cost) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.improved = false;
      break;
    }
    const double decrease = cost - cand_cost;
    out.z = cand;
    cost = cand_cost;
    out.objective_trace.push_back(cost);
    if (decrease <= tol * std::max(cost + decrease, std::numeric_limits<double>::min())) break;
  }

  const RiccatiResult fin = backward_at(out.z, r, rho, ts);
  out.K = fin.K;
  out.w = fin.w;
  return out;
}

// ---------------------------------------------------------------------------
// Dual and penalty updates

TrajectoryVars dual_update(const TrajectoryVars& v, const TrajectoryVars& z,
                           const TrajectoryVars& zbar) {
  TrajectoryVars out = traj_diff(z, zbar);
  for (std::size_t i = 0; i < out.x.size(); ++i) out.x[i] += v.x[i];
  for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] += v.u[i];
  return out;
}

double rho_update(double rho, double primal_res, double dual_res, const RhoSchedule& s) {
  if (primal_res > s.mu * dual_res) return rho * s.tau_incr;
  if (dual_res > s.mu * primal_res) return rho / s.tau_decr;
  return rho;
}

void rescale_dual(TrajectoryVars& v, double rho_old, double rho_new) {
  const double f = rho_old / rho_new;
  for (auto& x : v.x) x *= f;
  for (auto& u : v.u) u *= f;
}

// ---------------------------------------------------------------------------
// Path planning

void TrajoptConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("trajopt.T must be >= 1");
  if (!(ts > 0.0)) throw std::invalid_argument("trajopt.Ts must be > 0");
  if (tau < 1) throw std::invalid_argument("trajopt.tau must be >= 1");
  if (horizon % (tau + 1) != 0) throw std::invalid_argument("trajopt.T must be a multiple of tau + 1");
  if (!(lateral_span > 0.0)) throw std::invalid_argument("trajopt.L must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("trajopt.delta must be > 0");
  if (!(eps_pri > 0.0) || !(eps_dual > 0.0)) throw std::invalid_argument("trajopt tolerances must be > 0");
  if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("trajopt iteration caps must be >= 1");
  if (!(rho0 > 0.0)) throw std::invalid_argument("trajopt.rho0 must be > 0");
  if (cost.input_weight < 0.0 || cost.state_weight < 0.0) throw std::invalid_argument("cost weights must be >= 0");
  if (!bounds.valid()) throw std::invalid_argument("input bounds are inverted");
}

namespace {

TrajectoryVars straight_line_init(const State& start, const State& goal, int horizon) {
  TrajectoryVars z = TrajectoryVars::zeros(horizon);
  const Vec3 a = start.vec();
  const Vec3 dx = state_diff(goal, start);
  for (int i = 0; i <= horizon; ++i) {
    z.x[i] = a + (static_cast<double>(i) / horizon) * dx;
  }
  return z;
}

double waypoint_deviation(const std::vector<State>& x, const WaypointSet& wp, int horizon) {
  const std::vector<int> idx = waypoint_time_indices(horizon, static_cast<int>(wp.points.size()));
  double m = (x.back().position() - wp.goal.position()).norm();
  m = std::max(m, std::abs(wrap_angle(x.back().theta - wp.goal.theta)));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    m = std::max(m, (x[static_cast<std::size_t>(idx[k])].position() - wp.points[k]).norm());
  }
  return m;
}

}  // namespace

PathEntry plan_path(const WaypointSet& wp, const TrajoptConfig& config) {
  config.validate();
  const int horizon = config.horizon;
  if (static_cast<int>(wp.points.size()) != config.tau) {
    throw std::invalid_argument("waypoint count does not match tau");
  }

  TrajectoryVars z = straight_line_init(wp.start, wp.goal, horizon);
  TrajectoryVars v = TrajectoryVars::zeros(horizon);
  double rho = config.rho0;

  PathEntry entry;
  entry.path_index = wp.path_index;
  entry.lateral_offset = wp.lateral_offset;
  entry.waypoints = wp.points;

  IlqrResult inner;
  std::vector<Vec2> warm;
  double primal = std::numeric_limits<double>::infinity();
  double dual = std::numeric_limits<double>::infinity();
  bool done = false;
  int k = 0;
  for (; k < config.max_outer && !done; ++k) {
    const TrajectoryVars zbar = zbar_update(z, v, wp, config.bounds, rho, config.cost);
    inner = ilqr_solve(zbar, v, wp.start, rho, config.ts, config.max_inner, config.inner_tol, warm);
    warm = inner.z.u;

    primal = traj_inf_norm(traj_diff(inner.z, zbar));
    dual = rho * traj_inf_norm(traj_diff(inner.z, z));
    v = dual_update(v, inner.z, zbar);
    z = inner.z;

    if (primal <= config.eps_pri && dual <= config.eps_dual) {
      // Accept only if the clamped replay also honours the waypoints.
      std::vector<Vec2> u_clamped(z.u.size());
      for (std::size_t i = 0; i < z.u.size(); ++i) {
        u_clamped[i] = config.bounds.clamp(Input::from_vec(z.u[i])).vec();
      }
      const std::vector<Vec3> xs = rollout(wp.start, u_clamped, config.ts);
      std::vector<State> states;
      for (const auto& x : xs) states.push_back(State::from_vec(x));
      if (waypoint_deviation(states, wp, horizon) <= config.eps_pri) done = true;
    }
    if (!done && config.adapt_rho) {
      const double rho_new = rho_update(rho, primal, dual, config.rho_schedule);
      if (rho_new != rho) {
        rescale_dual(v, rho, rho_new);
        rho = rho_new;
      }
    }
  }

  // Nominal inputs are clamped and the reference is their exact replay.
  entry.mu.resize(z.u.size());
  std::vector<Vec2> u_star(z.u.size());
  for (std::size_t i = 0; i < z.u.size(); ++i) {
    entry.mu[i] = config.bounds.clamp(Input::from_vec(z.u[i]));
    u_star[i] = entry.mu[i].vec();
  }
  const std::vector<Vec3> xs = rollout(wp.start, u_star, config.ts);
  entry.x.reserve(xs.size());
  for (const auto& x : xs) entry.x.push_back(State::from_vec(x));

  // Gains from the Riccati pass around the stored reference.
  TrajectoryVars zstar;
  zstar.x = xs;
  zstar.u = u_star;
  const TrajectoryVars zbar_final = zbar_update(zstar, v, wp, config.bounds, rho, config.cost);
  const IlqrResult gains = ilqr_solve(zbar_final, v, wp.start, rho, config.ts, 0, 0.0, u_star);
  entry.K = gains.K;

  entry.converged = done;
  entry.primal_residual = primal;
  entry.dual_residual = dual;
  entry.iterations = k;
  return entry;
}

bool operator==(const PathEntry& a, const PathEntry& b) {
  if (a.path_index != b.path_index || a.lateral_offset != b.lateral_offset ||
      a.converged != b.converged || a.primal_residual != b.primal_residual ||
      a.dual_residual != b.dual_residual || a.iterations != b.iterations ||
      a.mu != b.mu || a.x != b.x || a.K.size() != b.K.size() ||
      a.waypoints.size() != b.waypoints.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.K.size(); ++i) {
    if (a.K[i] != b.K[i]) return false;
  }
  for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
    if (a.waypoints[i] != b.waypoints[i]) return false;
  }
  return true;
}

bool operator==(const PathLibrary& a, const PathLibrary& b) {
  return a.ts == b.ts && a.horizon == b.horizon && a.delta == b.delta &&
         a.center_path_index == b.center_path_index && a.start == b.start && a.goal == b.goal &&
         a.entries == b.entries;
}

std::size_t PathLibrary::converged_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const PathEntry& e) { return e.converged; }));
}

PathLibrary build_library(const State& start, const State& goal, const TrajoptConfig& config,
                          BuildStats* stats, Execution exec) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  const std::vector<WaypointSet> sets = generate_waypoints(
      start, goal, config.lateral_span, config.delta, config.tau, config.overrides);
  const int n = static_cast<int>(sets.size());

  PathLibrary lib;
  lib.ts = config.ts;
  lib.horizon = config.horizon;
  lib.delta = config.delta;
  lib.start = start;
  lib.goal = goal;
  lib.entries.resize(sets.size());
  std::vector<double> seconds(sets.size(), 0.0);

  auto solve_one = [&](int p) {
    const auto ts0 = Clock::now();
    lib.entries[static_cast<std::size_t>(p)] = plan_path(sets[static_cast<std::size_t>(p)], config);
    seconds[static_cast<std::size_t>(p)] =
        std::chrono::duration<double>(Clock::now() - ts0).count();
  };

  if (exec == Execution::kParallel && n > 1) {
    const int threads = std::min(worker_count(), n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int p = 0; p < n; ++p) solve_one(p);
  } else {
    for (int p = 0; p < n; ++p) solve_one(p);
  }

  lib.center_path_index = 0;
  for (int p = 1; p < n; ++p) {
    if (std::abs(sets[static_cast<std::size_t>(p)].lateral_offset) <
        std::abs(sets[static_cast<std::size_t>(lib.center_path_index)].lateral_offset)) {
      lib.center_path_index = p;
    }
  }

  if (stats) {
    stats->path_seconds = seconds;
    stats->total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    for (const auto& e : lib.entries) {
      if (!e.converged) {
        std::ostringstream msg;
        msg << "path " << e.path_index << " did not converge (primal " << e.primal_residual
            << ", dual " << e.dual_residual << ") and is excluded from selection";
        stats->warnings.push_back(msg.str());
      }
    }
  }
  return lib;
}

}  // namespace lnav
