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

// Exact solver for the two-variable safety QP
//
//   min |u - u_nom|^2   s.t.   a_j' u >= b_j,
//
// by enumerating every active set of size <= 2. With two decision variables
// the optimum is always one of those candidates, so the cheapest feasible
// candidate is the global minimizer.

#ifndef LNAV_QP_HPP_
#define LNAV_QP_HPP_

#include <cstddef>
#include <vector>

#include "lnav/dynamics.hpp"

namespace lnav {

enum class ConstraintKind { kBarrier, kManifold, kBound };

/// a' u >= b for u = (v, omega).
struct LinearConstraint {
  Vec2 a = Vec2::Zero();
  double b = 0.0;
  ConstraintKind kind = ConstraintKind::kBarrier;
  int obstacle_id = -1;
};

enum class QpStatus { kOptimal, kInfeasible };

struct QPSolution {
  Input u;
  QpStatus status = QpStatus::kInfeasible;
  /// Indices into the constraint list that define the optimum.
  std::vector<std::size_t> active_set;
  double solve_time = 0.0;
};

inline constexpr std::size_t kMaxQpConstraints = 16;
inline constexpr double kQpFeasTol = 1e-9;

/// Throws std::invalid_argument for more than kMaxQpConstraints rows.
QPSolution solve_qp(const Input& u_nom, const std::vector<LinearConstraint>& constraints);

/// Soft version: min |u - u_nom|^2 + penalty * zeta^2 subject to
/// a_j' u + zeta >= b_j and zeta >= 0. kBound rows stay hard (no zeta).
/// Feasible whenever the hard rows are.
struct SlackSolution {
  Input u;
  double slack = 0.0;
};
SlackSolution solve_slack_qp(const Input& u_nom, const std::vector<LinearConstraint>& constraints,
                             double penalty);

}  // namespace lnav

#endif  // LNAV_QP_HPP_
