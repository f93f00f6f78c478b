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

#include "lnav/safety.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace lnav {

namespace {

Vec2 heading(const State& s) { return {std::cos(s.theta), std::sin(s.theta)}; }
Vec2 heading_perp(const State& s) { return {-std::sin(s.theta), std::cos(s.theta)}; }

// Visible obstacles sorted by current h, nearest first.
std::vector<std::size_t> nearest_visible(const State& s, const World& world, double radius) {
  auto idx = visible_obstacles(s, world, radius);
  std::vector<std::pair<double, std::size_t>> by_h;
  by_h.reserve(idx.size());
  for (auto j : idx) by_h.emplace_back(world[j].eval(s.position()).h, j);
  std::stable_sort(by_h.begin(), by_h.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  idx.clear();
  for (const auto& [h, j] : by_h) idx.push_back(j);
  return idx;
}

FilterResult run_filter(const State& s, const Input& u_nom, const FilterContext& ctx,
                        const FilterParams& params, TangentMemory* memory) {
  const auto t0 = std::chrono::steady_clock::now();
  FilterResult out;
  FilterDiagnostics& d = out.diag;

  const auto box = input_box_rows(params.bounds);
  const std::size_t cap = kMaxQpConstraints - box.size() - (memory ? 1 : 0);
  const auto visible = nearest_visible(s, ctx.world, params.sensing_radius);

  // One row per convex piece, nearest pieces first, at most `cap` rows.
  std::vector<std::pair<double, LinearConstraint>> rows;
  for (auto j : visible) {
    Vec2 vel = Vec2::Zero();
    if (j < ctx.tracks.size()) vel = estimate_velocity(ctx.tracks[j], ctx.now);
    for (const auto& piece : convex_pieces(ctx.world[j])) {
      rows.emplace_back(piece.eval(s.position()).h, barrier_constraint(s, piece, vel, params));
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (rows.size() > cap) rows.resize(cap);
  std::vector<LinearConstraint> barriers;
  for (auto& r : rows) barriers.push_back(r.second);

  std::optional<LinearConstraint> manifold;
  if (memory && !visible.empty()) {
    const Obstacle& nearest = ctx.world[visible.front()];
    d.tangent = tangent_direction(s, nearest, ctx.ref_point, params, *memory);
    if (d.tangent) {
      manifold = manifold_constraint(s, *d.tangent, params.gamma, params.manifold_lookahead);
      manifold->obstacle_id = nearest.id();
      d.manifold_obstacle = nearest.id();
    }
  }

  // The box joins the QP only when there is something to filter, so the
  // obstacle-free command is the nominal one untouched.
  auto assemble = [&](bool with_manifold) {
    std::vector<LinearConstraint> rows = barriers;
    if (with_manifold && manifold) rows.push_back(*manifold);
    if (!rows.empty()) rows.insert(rows.end(), box.begin(), box.end());
    return rows;
  };

  d.constraints = assemble(true);
  QPSolution sol = solve_qp(u_nom, d.constraints);
  if (sol.status == QpStatus::kInfeasible && manifold) {
    d.outcome = FilterOutcome::kManifoldDropped;
    d.constraints = assemble(false);
    sol = solve_qp(u_nom, d.constraints);
  }
  Input u;
  if (sol.status == QpStatus::kOptimal) {
    u = sol.u;
    d.active_set = sol.active_set;
    if (manifold && d.outcome == FilterOutcome::kOptimal) {
      const std::size_t mi = barriers.size();
      d.manifold_active = std::find(d.active_set.begin(), d.active_set.end(), mi) !=
                          d.active_set.end();
    }
  } else {
    d.outcome = FilterOutcome::kSlack;
    d.constraints = assemble(false);
    const auto soft = solve_slack_qp(u_nom, d.constraints, params.slack_penalty);
    u = soft.u;
    d.slack = soft.slack;
  }

  d.pre_clamp = u;
  out.u = params.bounds.clamp(u);
  d.clamp_magnitude = (out.u.vec() - u.vec()).norm();
  d.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

LinearConstraint barrier_constraint(const State& s, const Obstacle& obs, const Vec2& obs_vel,
                                    const FilterParams& params) {
  const HoCbf hc = ho_cbf(s, obs, params.w_h);
  LinearConstraint c;
  c.a = {hc.grad_state.head<2>().dot(heading(s)), hc.grad_state(2)};
  c.b = -params.alpha_gain * hc.hbar - hc.obstacle_coeff.dot(obs_vel);
  c.kind = ConstraintKind::kBarrier;
  c.obstacle_id = obs.id();
  return c;
}

LinearConstraint single_integrator_barrier(const Vec2& p, const Obstacle& obs, double alpha_gain) {
  const BoundaryEval e = obs.eval(p);
  LinearConstraint c;
  c.a = e.grad;
  c.b = -alpha_gain * e.h;
  c.obstacle_id = obs.id();
  return c;
}

std::optional<int> TangentMemory::sign(int obstacle_id) const {
  auto it = signs_.find(obstacle_id);
  if (it == signs_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TangentMemory::piece(int obstacle_id) const {
  auto it = pieces_.find(obstacle_id);
  if (it == pieces_.end()) return std::nullopt;
  return it->second;
}

std::optional<Vec2> tangent_direction(const State& s, const Obstacle& obs, const Vec2& ref_point,
                                      const FilterParams& params, TangentMemory& memory) {
  const BoundaryEval e = obs.eval(s.position());
  if (e.h > params.d_act) {
    memory.forget(obs.id());
    return std::nullopt;
  }
  const auto remembered = memory.sign(obs.id());
  Vec2 grad = e.grad;
  if (std::holds_alternative<Composite>(obs.shape())) {
    // Start from the remembered piece, else the one with the smallest lifted
    // barrier. In a concave corner its tangent runs into a neighbouring
    // piece; hand over to that piece once it is within 2 w_h, keeping the
    // orientation.
    const auto pieces = convex_pieces(obs);
    std::vector<BoundaryEval> evals;
    std::size_t cur = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const HoCbf hc = ho_cbf(s, pieces[k], params.w_h);
      evals.push_back(hc.boundary);
      if (hc.hbar < best) {
        best = hc.hbar;
        cur = k;
      }
    }
    const auto kept = memory.piece(obs.id());
    if (params.sticky_tangent && kept && *kept < pieces.size()) cur = *kept;
    const int orient = remembered.value_or(1);
    for (std::size_t hop = 0; hop < pieces.size(); ++hop) {
      const Vec2 g = evals[cur].grad;
      const Vec2 t = orient * Vec2(-g.y(), g.x());
      std::size_t next = cur;
      double next_h = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (k == cur || evals[k].h > 2.0 * params.w_h || evals[k].grad.dot(t) >= 0.0) continue;
        if (evals[k].h < next_h) {
          next_h = evals[k].h;
          next = k;
        }
      }
      if (next == cur) break;
      cur = next;
    }
    grad = evals[cur].grad;
    memory.set_piece(obs.id(), cur);
  } else if (e.degenerate) {
    return std::nullopt;
  }
  const Vec2 t0(-grad.y(), grad.x());
  const double along = t0.dot(ref_point - s.position());
  int sign;
  if (params.sticky_tangent && remembered) {
    sign = *remembered;
  } else if (std::abs(along) <= params.hysteresis_margin) {
    sign = memory.sign(obs.id()).value_or(1);
  } else {
    sign = along > 0.0 ? 1 : -1;
  }
  memory.set(obs.id(), sign);
  return sign * t0;
}

LinearConstraint manifold_constraint(const State& s, const Vec2& t, double gamma,
                                     double lookahead) {
  LinearConstraint c;
  c.a = {t.dot(heading(s)), lookahead * t.dot(heading_perp(s))};
  c.b = gamma;
  c.kind = ConstraintKind::kManifold;
  return c;
}

std::vector<LinearConstraint> input_box_rows(const InputBounds& bounds) {
  std::vector<LinearConstraint> rows(4);
  rows[0].a = {1.0, 0.0};
  rows[0].b = bounds.v_min;
  rows[1].a = {-1.0, 0.0};
  rows[1].b = -bounds.v_max;
  rows[2].a = {0.0, 1.0};
  rows[2].b = bounds.omega_min;
  rows[3].a = {0.0, -1.0};
  rows[3].b = -bounds.omega_max;
  for (auto& r : rows) r.kind = ConstraintKind::kBound;
  return rows;
}

FilterResult mcbf_filter(const State& s, const Input& u_nom, const FilterContext& ctx,
                         const FilterParams& params, TangentMemory& memory) {
  return run_filter(s, u_nom, ctx, params, &memory);
}

FilterResult cbf_filter(const State& s, const Input& u_nom, const FilterContext& ctx,
                        const FilterParams& params) {
  return run_filter(s, u_nom, ctx, params, nullptr);
}

Vec2 single_integrator_filter(const Vec2& p, const Vec2& u_nom, const World& world,
                              double alpha_gain) {
  std::vector<LinearConstraint> rows;
  for (const auto& obs : world) rows.push_back(single_integrator_barrier(p, obs, alpha_gain));
  const auto sol = solve_qp(Input::from_vec(u_nom), rows);
  return sol.u.vec();
}

}  // namespace lnav
