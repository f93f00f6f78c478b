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

// Offline path-library generation.
//
// Each path solves a waypoint-constrained optimal control problem over a
// horizon of T steps by ADMM splitting:
//
//   zbar <- argmin J(zbar) + rho/2 |z - zbar + v|^2   s.t. waypoints, box
//   z    <- argmin rho/2 |z - zbar + v|^2             s.t. dynamics, x0
//   v    <- v + z - zbar
//
// The first step is separable per time step and solved in closed form; the
// second is an unconstrained nonlinear tracking problem solved by iLQR,
// whose Riccati pass also yields the time-varying feedback gains stored in
// the library.

#ifndef LNAV_TRAJOPT_HPP_
#define LNAV_TRAJOPT_HPP_

#include <string>
#include <vector>

#include "lnav/dynamics.hpp"
#include "lnav/parallel.hpp"

namespace lnav {

struct WaypointOverride {
  int path = 0;
  int waypoint = 0;  // 0-based among the tau interior waypoints
  Vec2 position = Vec2::Zero();

  friend bool operator==(const WaypointOverride&, const WaypointOverride&) = default;
};

struct WaypointSet {
  int path_index = 0;
  double lateral_offset = 0.0;
  /// tau interior waypoint positions, in time order.
  std::vector<Vec2> points;
  State start;
  State goal;
};

/// Grid of round(L/delta) laterally offset waypoint sets (at least one).
/// Interior waypoints are spaced D/(tau+1) along the start-goal line.
/// Throws std::invalid_argument unless L > 0, delta > 0 and tau >= 1.
std::vector<WaypointSet> generate_waypoints(const State& start, const State& goal, double L,
                                            double delta, int tau,
                                            const std::vector<WaypointOverride>& overrides = {});

/// Stacked trajectory z = (x_0..x_T, u_0..u_{T-1}).
struct TrajectoryVars {
  std::vector<Vec3> x;
  std::vector<Vec2> u;

  static TrajectoryVars zeros(int horizon);
  int horizon() const { return static_cast<int>(u.size()); }
};

/// a - b, heading differences wrapped.
TrajectoryVars traj_diff(const TrajectoryVars& a, const TrajectoryVars& b);
double traj_inf_norm(const TrajectoryVars& a);

struct CostParams {
  /// Stage cost r_u |u|^2.
  double input_weight = 0.1;
  /// Optional pull of free positions toward the goal, q_x |p - p_goal|^2.
  double state_weight = 0.0;
  friend bool operator==(const CostParams&, const CostParams&) = default;
};

/// Time indices {Delta, 2 Delta, ..., tau Delta}, Delta = T / (tau + 1).
/// Throws std::invalid_argument unless (tau + 1) divides T.
std::vector<int> waypoint_time_indices(int horizon, int tau);

TrajectoryVars zbar_update(const TrajectoryVars& z, const TrajectoryVars& v,
                           const WaypointSet& wp, const InputBounds& bounds, double rho,
                           const CostParams& cost);

/// Residuals of the linearized tracking problem around the current iterate:
/// c_i = x_i - r_x,i (T+1 entries), d_i = u_i - r_u,i (T entries).
struct TrackingResiduals {
  std::vector<Vec3> c;
  std::vector<Vec2> d;
};

/// Backward pass for min rho/2 sum |dx_i + c_i|^2 + |du_i + d_i|^2 subject to
/// dx_{i+1} = A_i dx_i + B_i du_i, with cost-to-go V_i = dx'P dx + b'dx + q.
/// The minimizer is du_i = -K_i dx_i - w_i.
struct RiccatiResult {
  std::vector<Mat23> K;
  std::vector<Vec2> w;
  std::vector<Mat3> P;
  std::vector<Vec3> b;
  std::vector<double> q;
  bool regularized = false;
};

RiccatiResult riccati_backward(const std::vector<Mat3>& A, const std::vector<Mat32>& B,
                               const TrackingResiduals& res, double rho);

struct IlqrResult {
  TrajectoryVars z;
  std::vector<Mat23> K;
  std::vector<Vec2> w;
  int iterations = 0;
  bool improved = true;
  /// Prox objective of every accepted iterate, starting with the initial one.
  std::vector<double> objective_trace;
};

/// Exact rollout of `u` from `xi` (heading continuous, not wrapped).
std::vector<Vec3> rollout(const State& xi, const std::vector<Vec2>& u, double ts);

/// rho/2 |z - zbar + v|^2 with heading differences wrapped.
double prox_objective(const TrajectoryVars& z, const TrajectoryVars& zbar,
                      const TrajectoryVars& v, double rho);

/// Solves the z-step by iLQR, warm-started from `u_init` (zeros when empty).
IlqrResult ilqr_solve(const TrajectoryVars& zbar, const TrajectoryVars& v, const State& xi,
                      double rho, double ts, int max_inner, double tol,
                      const std::vector<Vec2>& u_init = {});

/// v + (z - zbar).
TrajectoryVars dual_update(const TrajectoryVars& v, const TrajectoryVars& z,
                           const TrajectoryVars& zbar);

struct RhoSchedule {
  double mu = 10.0;
  double tau_incr = 2.0;
  double tau_decr = 2.0;
  friend bool operator==(const RhoSchedule&, const RhoSchedule&) = default;
};

/// Residual-balancing penalty update.
double rho_update(double rho, double primal_res, double dual_res, const RhoSchedule& s = {});

/// Rescales the scaled dual so that rho * v is unchanged.
void rescale_dual(TrajectoryVars& v, double rho_old, double rho_new);

struct TrajoptConfig {
  int horizon = 16;
  double ts = 0.5;
  int tau = 3;
  double lateral_span = 4.0;  // L
  double delta = 0.8;
  CostParams cost;
  InputBounds bounds;
  double eps_pri = 1e-3;
  double eps_dual = 1e-3;
  int max_outer = 200;
  int max_inner = 10;
  double inner_tol = 1e-6;
  double rho0 = 1.0;
  bool adapt_rho = true;
  RhoSchedule rho_schedule;
  std::vector<WaypointOverride> overrides;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;

  friend bool operator==(const TrajoptConfig&, const TrajoptConfig&) = default;
};

struct PathEntry {
  int path_index = 0;
  double lateral_offset = 0.0;
  std::vector<Input> mu;   // T
  std::vector<Mat23> K;    // T
  std::vector<State> x;    // T + 1
  std::vector<Vec2> waypoints;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;

  int horizon() const { return static_cast<int>(mu.size()); }
};

bool operator==(const PathEntry& a, const PathEntry& b);

struct PathLibrary {
  double ts = 0.5;
  int horizon = 16;
  double delta = 0.8;
  int center_path_index = 0;
  State start;
  State goal;
  std::vector<PathEntry> entries;

  std::size_t converged_count() const;
};

bool operator==(const PathLibrary& a, const PathLibrary& b);

/// ADMM solve of one waypoint set. Never throws on non-convergence; the
/// returned entry carries converged = false and the exit residuals.
PathEntry plan_path(const WaypointSet& wp, const TrajoptConfig& config);

struct BuildStats {
  std::vector<double> path_seconds;
  double total_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Plans every waypoint set. With Execution::kParallel the paths are solved
/// by an OpenMP team capped by NAV_THREADS; output is identical to the
/// serial reference regardless of scheduling.
PathLibrary build_library(const State& start, const State& goal, const TrajoptConfig& config,
                          BuildStats* stats = nullptr, Execution exec = Execution::kParallel);

}  // namespace lnav

#endif  // LNAV_TRAJOPT_HPP_
