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

#include "lnav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lnav {

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (a > -kPi && a <= kPi) return a;
  double r = std::fmod(a + kPi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - kPi;
}

Input InputBounds::clamp(const Input& u) const {
  return {std::clamp(u.v, v_min, v_max), std::clamp(u.omega, omega_min, omega_max)};
}

bool InputBounds::contains(const Input& u, double tol) const {
  return u.v >= v_min - tol && u.v <= v_max + tol && u.omega >= omega_min - tol &&
         u.omega <= omega_max + tol;
}

Vec3 state_diff(const Vec3& x, const Vec3& y) {
  return {x(0) - y(0), x(1) - y(1), wrap_angle(x(2) - y(2))};
}

Vec3 state_diff(const State& x, const State& y) { return state_diff(x.vec(), y.vec()); }

namespace {

Vec3 deriv(const Vec3& x, const Vec2& u) {
  return {u(0) * std::cos(x(2)), u(0) * std::sin(x(2)), u(1)};
}

// df/dx; only the heading column is nonzero.
Mat3 deriv_dx(const Vec3& x, const Vec2& u) {
  Mat3 f = Mat3::Zero();
  f(0, 2) = -u(0) * std::sin(x(2));
  f(1, 2) = u(0) * std::cos(x(2));
  return f;
}

Mat32 deriv_du(const Vec3& x) {
  Mat32 g = Mat32::Zero();
  g(0, 0) = std::cos(x(2));
  g(1, 0) = std::sin(x(2));
  g(2, 1) = 1.0;
  return g;
}

}  // namespace

Vec3 unicycle_deriv(const State& s, const Input& u) { return deriv(s.vec(), u.vec()); }

Vec3 rk4_increment(const State& s, const Input& u, double ts) {
  const Vec3 x = s.vec();
  const Vec2 w = u.vec();
  const Vec3 k1 = deriv(x, w);
  const Vec3 k2 = deriv(x + 0.5 * ts * k1, w);
  const Vec3 k3 = deriv(x + 0.5 * ts * k2, w);
  const Vec3 k4 = deriv(x + ts * k3, w);
  return (ts / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

State rk4_step(const State& s, const Input& u, double ts) {
  const Vec3 dx = rk4_increment(s, u, ts);
  return {s.px + dx(0), s.py + dx(1), wrap_angle(s.theta + dx(2))};
}

Jacobians linearize(const State& s, const Input& u, double ts) {
  const Vec3 x = s.vec();
  const Vec2 w = u.vec();
  const Mat3 eye = Mat3::Identity();

  const Vec3 k1 = deriv(x, w);
  const Mat3 k1x = deriv_dx(x, w);
  const Mat32 k1u = deriv_du(x);

  const Vec3 x2 = x + 0.5 * ts * k1;
  const Vec3 k2 = deriv(x2, w);
  const Mat3 f2 = deriv_dx(x2, w);
  const Mat3 k2x = f2 * (eye + 0.5 * ts * k1x);
  const Mat32 k2u = deriv_du(x2) + f2 * (0.5 * ts * k1u);

  const Vec3 x3 = x + 0.5 * ts * k2;
  const Mat3 f3 = deriv_dx(x3, w);
  const Mat3 k3x = f3 * (eye + 0.5 * ts * k2x);
  const Mat32 k3u = deriv_du(x3) + f3 * (0.5 * ts * k2u);
  const Vec3 k3 = deriv(x3, w);

  const Vec3 x4 = x + ts * k3;
  const Mat3 f4 = deriv_dx(x4, w);
  const Mat3 k4x = f4 * (eye + ts * k3x);
  const Mat32 k4u = deriv_du(x4) + f4 * (ts * k3u);

  Jacobians j;
  j.a = eye + (ts / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  j.b = (ts / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  return j;
}

}  // namespace lnav
