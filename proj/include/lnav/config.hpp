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

// JSON run configuration. Every key is optional and falls back to the
// default below; unknown keys are an error.
//
//   {
//     "scenario": {
//       "bounds": {"min": [-1, -3], "max": [8, 3]},
//       "start": [0, 0, 0], "goal": [4, 0, 0],
//       "sensing_radius": 3.0, "control_period": 0.01, "duration": 60,
//       "accel_limits": {"v": 2.0, "omega": 4.0},
//       "seed": 1, "start_jitter": [0, 0, 0],
//       "obstacles": [
//         {"id": 0, "type": "circle", "center": [2, 0], "radius": 0.5,
//          "motion": {"points": [[2, 0], [2, 2]], "speed": 0.8}},
//         {"id": 1, "type": "rect", "min": [0, 0], "max": [1, 1], "corner_radius": 0},
//         {"id": 2, "type": "composite", "members": [{"type": "rect", ...}, ...]}
//       ]
//     },
//     "trajopt": {"T": 16, "Ts": 0.5, "tau": 3, "L": 4.0, "delta": 0.8,
//                 "input_weight": 0.1, "state_weight": 0.0,
//                 "eps_pri": 1e-3, "eps_dual": 1e-3, "max_outer": 200,
//                 "max_inner": 10, "inner_tol": 1e-6,
//                 "rho0": 1.0, "adapt_rho": true, "rho_mu": 10,
//                 "rho_tau_incr": 2, "rho_tau_decr": 2,
//                 "waypoint_overrides": [{"path": 0, "waypoint": 1, "position": [x, y]}]},
//     "filter": {"alpha_gain": 1.0, "gamma": 0.05, "w_h": 0.3, "d_act": 1.0,
//                "hysteresis_margin": 0.1, "slack_penalty": 1e6,
//                "manifold_lookahead": 0.3, "sticky_tangent": true},
//     "bounds": {"v_min": 0, "v_max": 1, "omega_min": -2, "omega_max": 2},
//     "navigator": {"tol_adv": 0.3, "goal_tol": 0.3, "lookback": 2,
//                   "los_radius": 0.0, "advance_on_approach": false,
//                   "tangent_reference": "goal"}
//   }

#ifndef LNAV_CONFIG_HPP_
#define LNAV_CONFIG_HPP_

#include <stdexcept>
#include <string>

#include "lnav/sim.hpp"

namespace lnav {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  Scenario scenario;
  TrajoptConfig trajopt;
  NavigatorParams navigator;

  /// Input bounds shared by the planner and the filter.
  const InputBounds& bounds() const { return navigator.filter.bounds; }

  friend bool operator==(const Config&, const Config&) = default;
};

/// Throws ConfigError naming the offending key.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);
std::string print_config(const Config& config);

}  // namespace lnav

#endif  // LNAV_CONFIG_HPP_
