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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lnav/dynamics.hpp"
#include "oracles.hpp"

using namespace lnav;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd step_vec(const Eigen::VectorXd& xu, double ts) {
  const State s{xu(0), xu(1), xu(2)};
  return s.vec() + rk4_increment(s, {xu(3), xu(4)}, ts);
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(Dynamics, DerivExamples) {
  EXPECT_EQ(unicycle_deriv({0, 0, 0}, {1, 0}), Vec3(1, 0, 0));
  const Vec3 q = unicycle_deriv({0, 0, kPi / 2}, {1, 0});
  EXPECT_NEAR(q(0), 0.0, 1e-16);
  EXPECT_EQ(q(1), 1.0);
  EXPECT_EQ(q(2), 0.0);
  EXPECT_EQ(unicycle_deriv({5, -3, 0.7}, {0.4, 1.2}),
            Vec3(0.4 * std::cos(0.7), 0.4 * std::sin(0.7), 1.2));
}

TEST(Dynamics, Rk4TrivialSteps) {
  EXPECT_EQ(rk4_step({0, 0, 0}, {0, 0}, 0.5), State({0, 0, 0}));
  const State s = rk4_step({0, 0, 0}, {1, 0}, 0.1);
  EXPECT_DOUBLE_EQ(s.px, 0.1);
  EXPECT_EQ(s.py, 0.0);
  EXPECT_EQ(s.theta, 0.0);
}

TEST(Dynamics, Rk4MatchesFineEuler) {
  const Vec3 ref = oracle::euler_unicycle_extrapolated({0, 0, 0}, {1, 1}, 0.1, 100000);
  const State s = rk4_step({0, 0, 0}, {1, 1}, 0.1);
  EXPECT_NEAR(s.px, ref(0), 1e-8);
  EXPECT_NEAR(s.py, ref(1), 1e-8);
  EXPECT_NEAR(s.theta, ref(2), 1e-8);
}

TEST(Dynamics, StraightLineExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int k = 0; k < 200; ++k) {
    const State s{U(rng), U(rng), wrap_angle(U(rng))};
    const double v = 0.5 * (U(rng) + 3.0), ts = 0.05 + 0.1 * (U(rng) + 3.0);
    const State n = rk4_step(s, {v, 0.0}, ts);
    EXPECT_NEAR(n.px, s.px + v * ts * std::cos(s.theta), 1e-14);
    EXPECT_NEAR(n.py, s.py + v * ts * std::sin(s.theta), 1e-14);
    EXPECT_EQ(n.theta, s.theta);
  }
}

TEST(Dynamics, FourthOrderConvergence) {
  // Error against the exact arc halves by ~16 per Ts halving.
  const double v = 0.8, w = 1.7, th0 = 0.3;
  auto exact = [&](double t) {
    return Vec3((v / w) * (std::sin(th0 + w * t) - std::sin(th0)),
                -(v / w) * (std::cos(th0 + w * t) - std::cos(th0)), th0 + w * t);
  };
  const double horizon = 1.0;
  std::vector<double> errs;
  for (int n : {4, 8, 16, 32}) {
    State s{0, 0, th0};
    Vec3 x = s.vec();
    for (int k = 0; k < n; ++k) {
      x += rk4_increment(State{x(0), x(1), x(2)}, {v, w}, horizon / n);
    }
    errs.push_back((x - exact(horizon)).norm());
  }
  for (std::size_t k = 1; k < errs.size(); ++k) {
    EXPECT_GE(std::log2(errs[k - 1] / errs[k]), 3.8);
  }
}

TEST(Dynamics, LinearizeIdentityAtRest) {
  const Jacobians j = linearize({0, 0, 0}, {0, 0}, 0.5);
  EXPECT_EQ(j.a, Mat3::Identity());
}

TEST(Dynamics, LinearizeVColumnStraight) {
  const Jacobians j = linearize({0, 0, 0}, {1, 0}, 0.1);
  Eigen::VectorXd xu(5);
  xu << 0, 0, 0, 1, 0;
  const Eigen::MatrixXd fd =
      oracle::central_jacobian([](const Eigen::VectorXd& z) { return step_vec(z, 0.1); }, xu, 1e-6);
  EXPECT_NEAR(j.b(0, 0), fd(0, 3), 1e-9);
  EXPECT_NEAR(j.b(1, 0), fd(1, 3), 1e-9);
  EXPECT_NEAR(j.b(2, 0), 0.0, 1e-15);
  EXPECT_NEAR(j.b(0, 0), 0.1, 1e-12);
}

TEST(Dynamics, LinearizeMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double ts = 0.05 + 0.5 * std::abs(U(rng));
    Eigen::VectorXd xu(5);
    xu << 5 * U(rng), 5 * U(rng), kPi * U(rng), 1.0 + U(rng), 2.0 * U(rng);
    const Jacobians j = linearize({xu(0), xu(1), xu(2)}, {xu(3), xu(4)}, ts);
    const Eigen::MatrixXd fd = oracle::central_jacobian(
        [ts](const Eigen::VectorXd& z) { return step_vec(z, ts); }, xu, 1e-6);
    Eigen::MatrixXd ab(3, 5);
    ab << j.a, j.b;
    worst = std::max(worst, rel_err(ab, fd));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Dynamics, WrapKeepsTrig) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-50, 50);
  for (int k = 0; k < 1000; ++k) {
    const double a = U(rng);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
  }
  EXPECT_EQ(wrap_angle(-kPi), kPi);
}

TEST(Dynamics, BoundsClamp) {
  InputBounds b;
  EXPECT_EQ(b.clamp({2.0, -3.0}), Input({1.0, -2.0}));
  EXPECT_EQ(b.clamp({-0.5, 0.3}), Input({0.0, 0.3}));
  EXPECT_TRUE(b.contains({1.0, 2.0}));
  EXPECT_FALSE(b.contains({1.1, 0.0}));
}
