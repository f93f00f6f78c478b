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

// Runtime layer: pick the library path whose reference is closest to the
// predicted next state, track it with the stored feedback gains, and pass
// the result through the safety filter.

#ifndef LNAV_NAVIGATOR_HPP_
#define LNAV_NAVIGATOR_HPP_

#include <string>

#include "lnav/safety.hpp"
#include "lnav/trajopt.hpp"

namespace lnav {

enum class ControllerKind { kMcbf, kCbf };

std::string controller_name(ControllerKind kind);
/// Accepts "mcbf" or "cbf"; throws std::invalid_argument otherwise.
ControllerKind parse_controller(const std::string& name);

enum class TangentReference {
  kGoal,       // orient the boundary tangent toward the goal position
  kReference,  // toward the current path reference point
};

struct NavigatorParams {
  double tol_adv = 0.3;   // m
  double goal_tol = 0.3;  // m
  int lookback = 2;
  /// Off-path recovery, both off by default: advance the reference while the
  /// next point is no farther away, and steer along the line of sight when
  /// farther than los_radius from the reference (non-positive disables).
  bool advance_on_approach = false;
  double los_radius = 0.0;  // m
  TangentReference tangent_reference = TangentReference::kGoal;
  FilterParams filter;

  friend bool operator==(const NavigatorParams&, const NavigatorParams&) = default;
};

struct NavigatorState {
  int q = -1;  // active path (entry index), -1 before the first step
  int i = 0;   // reference index on path q
  Input last_command;
  TangentMemory memory;
  bool goal_reached = false;
};

/// One RK4 step of the nominal model under the last command.
State predict_next(const State& s, const Input& last_command, double dt);

/// Distance from p to the segment [a, b].
double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p);

/// Converged entry whose reference polyline (straight segments between
/// consecutive reference positions) comes closest to x_pred.
/// Ties within 1e-9 go to the entry nearer center_path_index, then the
/// smaller index. Returns -1 when nothing converged.
int select_path(const PathLibrary& lib, const State& x_pred);

/// First index attaining min_i |x*_i - p|.
int nearest_index(const PathEntry& entry, const Vec2& p);

/// Non-decreasing reference index: floored at nearest - lookback, then
/// advanced while the reference lies within tol_adv of the robot.
/// With on_approach it also advances while x*_{i+1} is no farther from the
/// robot than x*_i.
int advance_index(const PathEntry& entry, const State& s, int i, double tol_adv,
                  int lookback = 2, bool on_approach = false);

/// mu_i + K_i (x*_i - s); at i = T the terminal hold mu = 0 with K_{T-1}.
Input nominal_input(const PathEntry& entry, int i, const State& s);

/// As above, but when s is farther than los_radius from x*_i the heading of
/// the reference is taken as the bearing from s to x*_i, so the gains turn
/// the robot toward the reference instead of settling beside or behind it.
Input nominal_input(const PathEntry& entry, int i, const State& s, double los_radius);

struct StepReport {
  Input u_nom;
  Input command;
  FilterDiagnostics filter;
  bool path_switched = false;
  bool holding = false;
};

/// One control tick. `tracks` may be empty when every obstacle is static.
StepReport control_step(const State& s, const PathLibrary& lib, const World& world,
                        const std::vector<ObstacleTrack>& tracks, double now, double dt,
                        ControllerKind kind, const NavigatorParams& params,
                        NavigatorState& nav);

}  // namespace lnav

#endif  // LNAV_NAVIGATOR_HPP_
