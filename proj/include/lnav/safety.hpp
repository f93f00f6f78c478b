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

// Reactive safety filters for the unicycle.
//
// Every visible obstacle contributes one barrier row built from the lifted
// barrier hbar = h + w_h grad(h).(cos th, sin th), which has relative degree
// one in both v and omega:
//
//   d/dt hbar = (dhbar/dp . b) v + (dhbar/dth) omega + (dhbar/dx_o . v_o)
//             >= -alpha * hbar.
//
// The on-manifold variant adds a row forcing progress of at least gamma
// along the boundary tangent of the nearest obstacle, which removes the
// boundary equilibria of the plain CBF-QP.

#ifndef LNAV_SAFETY_HPP_
#define LNAV_SAFETY_HPP_

#include <map>
#include <optional>
#include <vector>

#include "lnav/environment.hpp"
#include "lnav/qp.hpp"

namespace lnav {

struct FilterParams {
  double alpha_gain = 1.0;  // 1/s
  double gamma = 0.05;      // m/s
  double w_h = 0.3;         // m
  double d_act = 1.0;       // m
  double hysteresis_margin = 0.1;  // m
  double slack_penalty = 1e6;
  double sensing_radius = 3.0;  // m
  /// Heading weight of the manifold row. 0 gives phi = (t, 0); a positive
  /// value makes the row act on the look-ahead point p + lookahead * b.
  double manifold_lookahead = 0.3;  // m
  /// Keep the tangent orientation chosen when an obstacle first comes
  /// within d_act until it leaves that range again.
  bool sticky_tangent = true;
  InputBounds bounds;

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

/// hbar_dot >= -alpha(hbar) as a row on (v, omega).
LinearConstraint barrier_constraint(const State& s, const Obstacle& obs, const Vec2& obs_vel,
                                    const FilterParams& params);

/// grad(h) . u >= -alpha h for a planar single integrator with velocity u.
LinearConstraint single_integrator_barrier(const Vec2& p, const Obstacle& obs, double alpha_gain);

/// Per-obstacle tangent orientation (+1 counter-clockwise, -1 clockwise)
/// and, for composites, the member the tangent currently follows.
class TangentMemory {
 public:
  std::optional<int> sign(int obstacle_id) const;
  std::optional<std::size_t> piece(int obstacle_id) const;
  void set(int obstacle_id, int sign) { signs_[obstacle_id] = sign; }
  void set_piece(int obstacle_id, std::size_t piece) { pieces_[obstacle_id] = piece; }
  void forget(int obstacle_id) {
    signs_.erase(obstacle_id);
    pieces_.erase(obstacle_id);
  }
  void clear() {
    signs_.clear();
    pieces_.clear();
  }

 private:
  std::map<int, int> signs_;
  std::map<int, std::size_t> pieces_;
};

/// Boundary tangent rot90(grad h), oriented toward `ref_point`. Within the
/// hysteresis band the remembered orientation (default +1) is kept; with
/// sticky_tangent any remembered orientation is kept. Returns nullopt (and
/// forgets the obstacle) when h > d_act, and nullopt when the gradient is
/// undefined.
///
/// For a composite the tangent comes from one member: on engagement the one
/// with the smallest lifted barrier, afterwards (with sticky_tangent) the
/// remembered one until the obstacle leaves d_act. The tangent then hands over
/// to any member within 2 w_h that it points into.
std::optional<Vec2> tangent_direction(const State& s, const Obstacle& obs, const Vec2& ref_point,
                                      const FilterParams& params, TangentMemory& memory);

/// phi' g(x) u >= gamma with phi = (t, lookahead * t . b_perp).
LinearConstraint manifold_constraint(const State& s, const Vec2& t, double gamma,
                                     double lookahead = 0.0);

/// v_min <= v <= v_max, omega_min <= omega <= omega_max as four hard rows.
std::vector<LinearConstraint> input_box_rows(const InputBounds& bounds);

enum class FilterOutcome {
  kOptimal,          // QP solved with every row
  kManifoldDropped,  // infeasible; solved again without the manifold row
  kSlack,            // barriers softened by a slack variable
};

struct FilterDiagnostics {
  FilterOutcome outcome = FilterOutcome::kOptimal;
  std::vector<LinearConstraint> constraints;
  std::vector<std::size_t> active_set;
  bool manifold_active = false;
  std::optional<Vec2> tangent;
  int manifold_obstacle = -1;
  double slack = 0.0;
  Input pre_clamp;
  double clamp_magnitude = 0.0;
  double solve_time = 0.0;

  bool qp_failure() const { return outcome != FilterOutcome::kOptimal; }
};

struct FilterResult {
  Input u;
  FilterDiagnostics diag;
};

/// Everything the filter needs to know about the world at one instant.
struct FilterContext {
  const World& world;
  const std::vector<ObstacleTrack>& tracks;  // parallel to world; may be empty
  double now = 0.0;
  Vec2 ref_point = Vec2::Zero();
};

FilterResult mcbf_filter(const State& s, const Input& u_nom, const FilterContext& ctx,
                         const FilterParams& params, TangentMemory& memory);

FilterResult cbf_filter(const State& s, const Input& u_nom, const FilterContext& ctx,
                        const FilterParams& params);

/// CBF-QP for a planar single integrator; the two QP variables are (vx, vy).
/// Infeasibility cannot occur with a single obstacle.
Vec2 single_integrator_filter(const Vec2& p, const Vec2& u_nom, const World& world,
                              double alpha_gain);

}  // namespace lnav

#endif  // LNAV_SAFETY_HPP_
