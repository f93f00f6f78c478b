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

#ifndef LNAV_DYNAMICS_HPP_
#define LNAV_DYNAMICS_HPP_

#include <Eigen/Dense>

namespace lnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Planar unicycle pose. `theta` is kept wrapped to (-pi, pi] by every
/// operation in this module that produces a State.
struct State {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {px, py}; }
  Vec3 vec() const { return {px, py, theta}; }
  static State from_vec(const Vec3& x) { return {x(0), x(1), wrap_angle(x(2))}; }

  friend bool operator==(const State&, const State&) = default;
};

/// Linear speed and turn rate command.
struct Input {
  double v = 0.0;
  double omega = 0.0;

  Vec2 vec() const { return {v, omega}; }
  static Input from_vec(const Vec2& u) { return {u(0), u(1)}; }

  friend bool operator==(const Input&, const Input&) = default;
};

struct InputBounds {
  double v_min = 0.0;
  double v_max = 1.0;
  double omega_min = -2.0;
  double omega_max = 2.0;

  Input clamp(const Input& u) const;
  bool contains(const Input& u, double tol = 0.0) const;
  bool valid() const { return v_min <= v_max && omega_min <= omega_max; }

  friend bool operator==(const InputBounds&, const InputBounds&) = default;
};

/// State Jacobian `a` (3x3) and input Jacobian `b` (3x2) of the discrete map.
struct Jacobians {
  Mat3 a;
  Mat32 b;
};

/// x - y with the heading component wrapped.
Vec3 state_diff(const State& x, const State& y);
Vec3 state_diff(const Vec3& x, const Vec3& y);

/// Continuous-time unicycle vector field (v cos th, v sin th, omega).
Vec3 unicycle_deriv(const State& s, const Input& u);

/// Classical RK4 step with zero-order-hold input. Heading is re-wrapped.
State rk4_step(const State& s, const Input& u, double ts);

/// Unwrapped RK4 increment x_{k+1} - x_k, used where heading continuity
/// matters more than canonical form.
Vec3 rk4_increment(const State& s, const Input& u, double ts);

/// Exact Jacobians of rk4_step, obtained by chain-ruling the four stages.
Jacobians linearize(const State& s, const Input& u, double ts);

}  // namespace lnav

#endif  // LNAV_DYNAMICS_HPP_
