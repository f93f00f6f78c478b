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

#include "lnav/navigator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lnav {

namespace {
constexpr double kTieTol = 1e-9;
}

std::string controller_name(ControllerKind kind) {
  return kind == ControllerKind::kMcbf ? "mcbf" : "cbf";
}

ControllerKind parse_controller(const std::string& name) {
  if (name == "mcbf") return ControllerKind::kMcbf;
  if (name == "cbf") return ControllerKind::kCbf;
  throw std::invalid_argument("unknown controller '" + name + "' (expected mcbf or cbf)");
}

State predict_next(const State& s, const Input& last_command, double dt) {
  return rk4_step(s, last_command, dt);
}

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

int select_path(const PathLibrary& lib, const State& x_pred) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  const Vec2 p = x_pred.position();
  const int center = lib.center_path_index;
  for (std::size_t e = 0; e < lib.entries.size(); ++e) {
    const PathEntry& entry = lib.entries[e];
    if (!entry.converged || entry.x.empty()) continue;
    double d = (entry.x.front().position() - p).norm();
    for (std::size_t k = 1; k < entry.x.size(); ++k) {
      d = std::min(d, segment_distance(entry.x[k - 1].position(), entry.x[k].position(), p));
    }
    const int idx = static_cast<int>(e);
    bool take = best < 0 || d < best_d - kTieTol;
    if (!take && std::abs(d - best_d) <= kTieTol) {
      take = std::abs(idx - center) < std::abs(best - center);
    }
    if (take) {
      best = idx;
      best_d = d;
    }
  }
  return best;
}

int nearest_index(const PathEntry& entry, const Vec2& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entry.x.size(); ++i) {
    const double d = (entry.x[i].position() - p).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int advance_index(const PathEntry& entry, const State& s, int i, double tol_adv, int lookback,
                  bool on_approach) {
  const int horizon = entry.horizon();
  const Vec2 p = s.position();
  auto dist = [&](int k) { return (entry.x[static_cast<std::size_t>(k)].position() - p).norm(); };
  int next = std::max(i, nearest_index(entry, p) - lookback);
  next = std::clamp(next, 0, horizon);
  while (next < horizon && (dist(next) <= tol_adv || (on_approach && dist(next + 1) <= dist(next)))) {
    ++next;
  }
  return next;
}

Input nominal_input(const PathEntry& entry, int i, const State& s) {
  const int horizon = entry.horizon();
  i = std::clamp(i, 0, horizon);
  const auto iu = static_cast<std::size_t>(i);
  const Vec3 err = state_diff(entry.x[iu], s);
  if (i < horizon) {
    return Input::from_vec(entry.mu[iu].vec() + entry.K[iu] * err);
  }
  return Input::from_vec(entry.K[iu - 1] * err);
}

Input nominal_input(const PathEntry& entry, int i, const State& s, double los_radius) {
  const int horizon = entry.horizon();
  i = std::clamp(i, 0, horizon);
  const auto iu = static_cast<std::size_t>(i);
  const State& ref = entry.x[iu];
  const Vec2 gap = ref.position() - s.position();
  const double dist = gap.norm();
  if (los_radius <= 0.0 || dist <= los_radius) return nominal_input(entry, i, s);
  // Error seen from a virtual reference straight down the line of sight:
  // the gap lies along the reference heading, shrunk by cos of the heading
  // error so the robot turns before it drives, and the heading error is
  // measured against the bearing.
  const double bearing = std::atan2(gap.y(), gap.x());
  const double e_theta = wrap_angle(bearing - s.theta);
  const double along = dist * std::max(0.0, std::cos(e_theta));
  const Vec3 err(along * std::cos(ref.theta), along * std::sin(ref.theta), e_theta);
  if (i < horizon) return Input::from_vec(entry.mu[iu].vec() + entry.K[iu] * err);
  return Input::from_vec(entry.K[iu - 1] * err);
}

StepReport control_step(const State& s, const PathLibrary& lib, const World& world,
                        const std::vector<ObstacleTrack>& tracks, double now, double dt,
                        ControllerKind kind, const NavigatorParams& params,
                        NavigatorState& nav) {
  StepReport rep;
  if ((s.position() - lib.goal.position()).norm() <= params.goal_tol) {
    nav.goal_reached = true;
    rep.holding = true;
    nav.last_command = {};
    return rep;
  }

  int q;
  if (nav.q < 0) {
    q = lib.center_path_index;
    if (q < 0 || q >= static_cast<int>(lib.entries.size()) ||
        !lib.entries[static_cast<std::size_t>(q)].converged) {
      q = select_path(lib, s);
    }
  } else {
    q = select_path(lib, predict_next(s, nav.last_command, dt));
  }
  if (q < 0) throw std::runtime_error("control_step: library has no converged path");

  const PathEntry& entry = lib.entries[static_cast<std::size_t>(q)];
  if (q != nav.q) {
    rep.path_switched = nav.q >= 0;
    nav.i = nearest_index(entry, s.position());
    nav.q = q;
  }
  nav.i = advance_index(entry, s, nav.i, params.tol_adv, params.lookback, params.advance_on_approach);
  rep.u_nom = nominal_input(entry, nav.i, s, params.los_radius);

  FilterContext ctx{world, tracks, now, lib.goal.position()};
  if (params.tangent_reference == TangentReference::kReference) {
    ctx.ref_point = entry.x[static_cast<std::size_t>(nav.i)].position();
  }
  FilterResult fr = kind == ControllerKind::kMcbf
                        ? mcbf_filter(s, rep.u_nom, ctx, params.filter, nav.memory)
                        : cbf_filter(s, rep.u_nom, ctx, params.filter);
  rep.command = fr.u;
  rep.filter = std::move(fr.diag);
  nav.last_command = rep.command;
  return rep;
}

}  // namespace lnav
