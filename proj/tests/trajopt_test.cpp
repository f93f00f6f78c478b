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
#include <random>

#include "lnav/trajopt.hpp"
#include "oracles.hpp"

using namespace lnav;

namespace {

struct LqInstance {
  std::vector<Mat3> A;
  std::vector<Mat32> B;
  TrackingResiduals res;
};

LqInstance random_lq(std::mt19937_64& rng, int T) {
  std::normal_distribution<double> N(0.0, 1.0);
  LqInstance in;
  for (int i = 0; i < T; ++i) {
    Mat3 a;
    Mat32 b;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(r, c) = (r == c ? 1.0 : 0.0) + 0.3 * N(rng);
      for (int c = 0; c < 2; ++c) b(r, c) = 0.5 * N(rng);
    }
    in.A.push_back(a);
    in.B.push_back(b);
    in.res.d.push_back(Vec2(N(rng), N(rng)));
  }
  for (int i = 0; i <= T; ++i) in.res.c.push_back(Vec3(N(rng), N(rng), N(rng)));
  return in;
}

// Tail of an instance starting at stage k.
LqInstance tail(const LqInstance& in, int k) {
  LqInstance t;
  t.A.assign(in.A.begin() + k, in.A.end());
  t.B.assign(in.B.begin() + k, in.B.end());
  t.res.c.assign(in.res.c.begin() + k, in.res.c.end());
  t.res.d.assign(in.res.d.begin() + k, in.res.d.end());
  return t;
}

std::vector<Vec2> dense(const LqInstance& in, const Vec3& dx0) {
  return oracle::dense_lq_inputs(in.A, in.B, in.res.c, in.res.d, dx0);
}

double lq_cost(const LqInstance& in, const Vec3& dx0, const std::vector<Vec2>& du, double rho) {
  Vec3 dx = dx0;
  double acc = 0.0;
  for (std::size_t i = 0; i < in.A.size(); ++i) {
    acc += (dx + in.res.c[i]).squaredNorm() + (du[i] + in.res.d[i]).squaredNorm();
    dx = in.A[i] * dx + in.B[i] * du[i];
  }
  acc += (dx + in.res.c.back()).squaredNorm();
  return 0.5 * rho * acc;
}

WaypointSet straight_set(const State& start, const State& goal, int tau) {
  return generate_waypoints(start, goal, 0.5, 0.8, tau).front();
}

}  // namespace

TEST(Waypoints, GridCountAndSpacing) {
  const auto sets = generate_waypoints({0, 0, 0}, {8, 0, 0}, 4.0, 0.8, 3);
  ASSERT_EQ(sets.size(), 5u);
  const double offsets[] = {-1.6, -0.8, 0.0, 0.8, 1.6};
  for (std::size_t p = 0; p < 5; ++p) {
    EXPECT_NEAR(sets[p].lateral_offset, offsets[p], 1e-12);
    ASSERT_EQ(sets[p].points.size(), 3u);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(sets[p].points[k].x(), 2.0 * (k + 1), 1e-12);
      EXPECT_NEAR(sets[p].points[k].y(), offsets[p], 1e-12);
    }
  }
}

TEST(Waypoints, SinglePathOnLine) {
  const auto sets = generate_waypoints({1, 1, 0}, {4, 5, 0}, 0.5, 0.8, 2);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].lateral_offset, 0.0);
  for (const auto& p : sets[0].points) {
    // Collinear with start and goal.
    const Vec2 a = p - Vec2(1, 1), b = Vec2(3, 4);
    EXPECT_NEAR(a.x() * b.y() - a.y() * b.x(), 0.0, 1e-12);
  }
}

TEST(Waypoints, OverridesAndErrors) {
  const auto sets = generate_waypoints({0, 0, 0}, {8, 0, 0}, 4.0, 0.8, 3, {{1, 2, {6.0, -2.5}}});
  EXPECT_EQ(sets[1].points[2], Vec2(6.0, -2.5));
  EXPECT_THROW(generate_waypoints({0, 0, 0}, {8, 0, 0}, 4.0, 0.8, 3, {{5, 0, {0, 0}}}),
               std::invalid_argument);
  EXPECT_THROW(generate_waypoints({0, 0, 0}, {8, 0, 0}, 0.0, 0.8, 3), std::invalid_argument);
  EXPECT_THROW(generate_waypoints({0, 0, 0}, {8, 0, 0}, 4.0, 0.8, 0), std::invalid_argument);
  EXPECT_EQ(waypoint_time_indices(16, 3), (std::vector<int>{4, 8, 12}));
  EXPECT_THROW(waypoint_time_indices(16, 4), std::invalid_argument);
}

TEST(ZbarUpdate, LargeRhoIsProjection) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  const int T = 8;
  const WaypointSet wp = straight_set({0, 0, 0}, {4, 0, 0.2}, 3);
  TrajectoryVars z = TrajectoryVars::zeros(T), v = TrajectoryVars::zeros(T);
  for (auto& x : z.x) x = Vec3(N(rng), N(rng), N(rng));
  for (auto& u : z.u) u = Vec2(N(rng), N(rng));
  for (auto& x : v.x) x = Vec3(N(rng), N(rng), 0.1 * N(rng));
  for (auto& u : v.u) u = Vec2(N(rng), N(rng));
  InputBounds b;
  const TrajectoryVars zb = zbar_update(z, v, wp, b, 1e8, {});
  const std::vector<int> idx = waypoint_time_indices(T, 3);
  for (int i = 0; i < T; ++i) {
    const Vec2 t = z.u[i] + v.u[i];
    EXPECT_NEAR(zb.u[i](0), std::clamp(t(0), b.v_min, b.v_max), 1e-8);
    EXPECT_NEAR(zb.u[i](1), std::clamp(t(1), b.omega_min, b.omega_max), 1e-8);
  }
  for (int i = 0; i <= T; ++i) {
    const Vec3 t = z.x[i] + v.x[i];
    if (i == T) {
      EXPECT_EQ(zb.x[i], wp.goal.vec());
      continue;
    }
    auto it = std::find(idx.begin(), idx.end(), i);
    if (it != idx.end()) {
      EXPECT_EQ(zb.x[i].head<2>(), wp.points[it - idx.begin()]);
      EXPECT_EQ(zb.x[i](2), t(2));  // heading left free
    } else {
      EXPECT_NEAR((zb.x[i] - t).norm(), 0.0, 1e-12);
    }
  }
}

TEST(ZbarUpdate, ZeroWeightClampsToBound) {
  const WaypointSet wp = straight_set({0, 0, 0}, {4, 0, 0}, 1);
  TrajectoryVars z = TrajectoryVars::zeros(2), v = TrajectoryVars::zeros(2);
  z.u[0] = Vec2(3.0, -7.0);
  z.u[1] = Vec2(-1.0, 0.5);
  const TrajectoryVars zb = zbar_update(z, v, wp, {}, 1.0, {0.0, 0.0});
  EXPECT_EQ(zb.u[0], Vec2(1.0, -2.0));
  EXPECT_EQ(zb.u[1], Vec2(0.0, 0.5));
}

TEST(ZbarUpdate, MatchesPerStepKkt) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0.0, 1.5);
  std::uniform_real_distribution<double> U(0.05, 5.0);
  const int T = 12;
  const WaypointSet wp = straight_set({0, 0, 0}, {5, 1, 0}, 2);
  for (int trial = 0; trial < 200; ++trial) {
    TrajectoryVars z = TrajectoryVars::zeros(T), v = TrajectoryVars::zeros(T);
    for (auto& x : z.x) x = Vec3(N(rng), N(rng), N(rng));
    for (auto& u : z.u) u = Vec2(N(rng), N(rng));
    for (auto& u : v.u) u = Vec2(N(rng), N(rng));
    for (auto& x : v.x) x = Vec3(N(rng), N(rng), N(rng));
    const double rho = U(rng);
    const CostParams cost{U(rng), U(rng)};
    const InputBounds b{0.0, 1.0, -2.0, 2.0};
    const TrajectoryVars zb = zbar_update(z, v, wp, b, rho, cost);
    for (int i = 0; i < T; ++i) {
      const Vec2 ref = oracle::box_prox_kkt(z.u[i] + v.u[i], cost.input_weight, rho,
                                            {b.v_min, b.omega_min}, {b.v_max, b.omega_max});
      EXPECT_NEAR((zb.u[i] - ref).norm(), 0.0, 1e-8);
    }
    const std::vector<int> idx = waypoint_time_indices(T, 2);
    for (int i = 0; i < T; ++i) {
      if (std::find(idx.begin(), idx.end(), i) != idx.end()) continue;
      // Free position: argmin q|p - g|^2 + rho/2 |p - t|^2 via its normal equation.
      const Vec3 t = z.x[i] + v.x[i];
      const Eigen::Matrix2d H = (2.0 * cost.state_weight + rho) * Eigen::Matrix2d::Identity();
      const Vec2 rhs = 2.0 * cost.state_weight * wp.goal.position() + rho * t.head<2>();
      const Vec2 p = H.ldlt().solve(rhs);
      EXPECT_NEAR((zb.x[i].head<2>() - p).norm(), 0.0, 1e-8);
      EXPECT_EQ(zb.x[i](2), t(2));
    }
  }
}

TEST(ZbarUpdate, NonExpansiveInProxArgument) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N(0.0, 2.0);
  const int T = 8;
  const WaypointSet wp = straight_set({0, 0, 0}, {4, 0, 0}, 3);
  for (int trial = 0; trial < 200; ++trial) {
    TrajectoryVars z1 = TrajectoryVars::zeros(T), z2 = TrajectoryVars::zeros(T);
    const TrajectoryVars v = TrajectoryVars::zeros(T);
    double in = 0.0;
    for (int i = 0; i <= T; ++i) {
      z1.x[i] = Vec3(N(rng), N(rng), 0.0);
      z2.x[i] = Vec3(N(rng), N(rng), 0.0);
      in += (z1.x[i] - z2.x[i]).squaredNorm();
    }
    for (int i = 0; i < T; ++i) {
      z1.u[i] = Vec2(N(rng), N(rng));
      z2.u[i] = Vec2(N(rng), N(rng));
      in += (z1.u[i] - z2.u[i]).squaredNorm();
    }
    const TrajectoryVars a = zbar_update(z1, v, wp, {}, 1.5, {0.1, 0.2});
    const TrajectoryVars b = zbar_update(z2, v, wp, {}, 1.5, {0.1, 0.2});
    double out = 0.0;
    for (int i = 0; i <= T; ++i) out += (a.x[i] - b.x[i]).squaredNorm();
    for (int i = 0; i < T; ++i) out += (a.u[i] - b.u[i]).squaredNorm();
    EXPECT_LE(out, in + 1e-12);
  }
}

TEST(Riccati, ZeroInputMatrixGivesZeroGain) {
  std::mt19937_64 rng(3);
  LqInstance in = random_lq(rng, 4);
  for (auto& b : in.B) b.setZero();
  const RiccatiResult r = riccati_backward(in.A, in.B, in.res, 2.0);
  for (const auto& k : r.K) EXPECT_EQ(k, Mat23::Zero());
}

TEST(Riccati, ZeroResidualZeroFeedforward) {
  std::mt19937_64 rng(4);
  LqInstance in = random_lq(rng, 4);
  for (auto& c : in.res.c) c.setZero();
  for (auto& d : in.res.d) d.setZero();
  const RiccatiResult r = riccati_backward(in.A, in.B, in.res, 1.0);
  for (const auto& w : r.w) EXPECT_EQ(w, Vec2::Zero());
}

TEST(Riccati, MatchesDenseLeastSquares) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 1.0);
  double worst_policy = 0.0, worst_gain = 0.0, worst_value = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 1 + trial % 4;
    const double rho = 0.2 + 0.1 * trial;
    const LqInstance in = random_lq(rng, T);
    const RiccatiResult r = riccati_backward(in.A, in.B, in.res, rho);

    // Closed-loop policy reproduces the dense open-loop minimizer.
    const Vec3 dx0(N(rng), N(rng), N(rng));
    const std::vector<Vec2> ref = dense(in, dx0);
    Vec3 dx = dx0;
    std::vector<Vec2> du(T);
    for (int i = 0; i < T; ++i) {
      du[i] = -r.K[i] * dx - r.w[i];
      worst_policy = std::max(worst_policy, (du[i] - ref[i]).cwiseAbs().maxCoeff());
      dx = in.A[i] * dx + in.B[i] * du[i];
    }
    // Each stage's gains: the tail problem's first input is affine in dx_k.
    for (int k = 0; k < T; ++k) {
      const LqInstance t = tail(in, k);
      const Vec2 u0 = dense(t, Vec3::Zero()).front();
      worst_gain = std::max(worst_gain, (u0 + r.w[k]).cwiseAbs().maxCoeff());
      for (int j = 0; j < 3; ++j) {
        const Vec2 uj = dense(t, Vec3::Unit(j)).front();
        worst_gain = std::max(worst_gain, (uj - u0 + r.K[k].col(j)).cwiseAbs().maxCoeff());
      }
    }
    // Cost-to-go at stage 0 equals the optimal cost.
    const double v0 = dx0.dot(r.P[0] * dx0) + r.b[0].dot(dx0) + r.q[0];
    worst_value = std::max(worst_value, std::abs(v0 - lq_cost(in, dx0, ref, rho)) /
                                            std::max(1.0, std::abs(v0)));
  }
  EXPECT_LE(worst_policy, 1e-6);
  EXPECT_LE(worst_gain, 1e-6);
  EXPECT_LE(worst_value, 1e-6);
}

TEST(Ilqr, FixedPointConvergesInOneIteration) {
  const State xi{0.5, -0.2, 0.1};
  std::vector<Vec2> u = {{0.5, 0.2}, {0.7, -0.1}, {0.3, 0.4}, {0.6, 0.0}};
  TrajectoryVars zbar;
  zbar.u = u;
  zbar.x = rollout(xi, u, 0.5);
  const TrajectoryVars v = TrajectoryVars::zeros(4);
  const IlqrResult r = ilqr_solve(zbar, v, xi, 1.0, 0.5, 10, 1e-6, u);
  EXPECT_EQ(r.iterations, 1);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(r.z.u[i], u[i]);
  for (int i = 0; i <= 4; ++i) EXPECT_NEAR((r.z.x[i] - zbar.x[i]).norm(), 0.0, 1e-15);
}

TEST(Ilqr, SingleStepSmallSignal) {
  // T = 1 around rest: x1 ~ x0 + Ts (v, 0, w), so the prox problem is the
  // linear least squares (Bs'Bs + I) u = Bs'(r1 - x0) + ru.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> N(0.0, 1e-4);
  const double ts = 0.5;
  for (int trial = 0; trial < 20; ++trial) {
    TrajectoryVars zbar = TrajectoryVars::zeros(1), v = TrajectoryVars::zeros(1);
    zbar.x[1] = Vec3(N(rng), N(rng), N(rng));
    zbar.u[0] = Vec2(N(rng), N(rng));
    v.x[1] = Vec3(N(rng), N(rng), N(rng));
    const IlqrResult r = ilqr_solve(zbar, v, {0, 0, 0}, 1.0, ts, 10, 1e-14);
    Eigen::Matrix<double, 3, 2> Bs;
    Bs << ts, 0, 0, 0, 0, ts;
    const Vec3 r1 = zbar.x[1] - v.x[1];
    const Vec2 ref = (Bs.transpose() * Bs + Eigen::Matrix2d::Identity())
                         .ldlt()
                         .solve(Bs.transpose() * r1 + zbar.u[0]);
    EXPECT_NEAR((r.z.u[0] - ref).norm(), 0.0, 1e-6);
  }
}

TEST(Ilqr, ObjectiveNonIncreasingAndExactRollout) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 4 + trial % 5;
    TrajectoryVars zbar = TrajectoryVars::zeros(T), v = TrajectoryVars::zeros(T);
    for (auto& x : zbar.x) x = Vec3(2 * N(rng), 2 * N(rng), N(rng));
    for (auto& u : zbar.u) u = Vec2(N(rng), N(rng));
    for (auto& x : v.x) x = Vec3(0.3 * N(rng), 0.3 * N(rng), 0.3 * N(rng));
    const State xi{N(rng), N(rng), N(rng)};
    const IlqrResult r = ilqr_solve(zbar, v, xi, 0.5 + std::abs(N(rng)), 0.5, 10, 1e-9);
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
      EXPECT_LE(r.objective_trace[k], r.objective_trace[k - 1]);
    }
    EXPECT_EQ(r.z.x, rollout(xi, r.z.u, 0.5));
    EXPECT_GE(r.objective_trace.back(), 0.0);
  }
}

TEST(Admm, DualAndPenaltyUpdates) {
  TrajectoryVars v = TrajectoryVars::zeros(2), z = TrajectoryVars::zeros(2);
  v.x[1] = Vec3(1, 2, 0.5);
  v.u[0] = Vec2(-1, 3);
  EXPECT_EQ(dual_update(v, z, z).x, v.x);
  EXPECT_EQ(dual_update(v, z, z).u, v.u);

  TrajectoryVars z1 = TrajectoryVars::zeros(2), zb1 = TrajectoryVars::zeros(2);
  z1.x[0] = Vec3(0.5, 0.1, 0.2);
  z1.u[1] = Vec2(0.3, -0.4);
  const TrajectoryVars zero = TrajectoryVars::zeros(2);
  EXPECT_EQ(dual_update(zero, z1, zb1).x[0], Vec3(0.5, 0.1, 0.2));
  TrajectoryVars z2 = TrajectoryVars::zeros(2);
  z2.x[0] = Vec3(0.25, 0.0, -0.1);
  const TrajectoryVars v2 = dual_update(dual_update(v, z1, zb1), z2, zb1);
  EXPECT_NEAR((v2.x[0] - (v.x[0] + z1.x[0] + z2.x[0])).norm(), 0.0, 1e-15);

  EXPECT_EQ(rho_update(1.0, 1.0, 0.05), 2.0);
  EXPECT_EQ(rho_update(4.0, 0.01, 0.5), 2.0);
  EXPECT_EQ(rho_update(3.0, 0.2, 0.2), 3.0);

  TrajectoryVars w = TrajectoryVars::zeros(1);
  w.x[0] = Vec3(1, -2, 0.5);
  w.u[0] = Vec2(0.7, 0.1);
  const Vec3 scaled = 2.0 * w.x[0];
  rescale_dual(w, 2.0, 8.0);
  EXPECT_NEAR((8.0 * w.x[0] - scaled).norm(), 0.0, 1e-15);
}

TEST(PlanPath, StationaryGoal) {
  TrajoptConfig cfg;
  const State s{1.0, 2.0, 0.3};
  WaypointSet wp;
  wp.start = s;
  wp.goal = s;
  wp.points.assign(3, s.position());
  const PathEntry e = plan_path(wp, cfg);
  EXPECT_TRUE(e.converged);
  for (const auto& m : e.mu) {
    EXPECT_LE(std::abs(m.v), 1e-6);
    EXPECT_LE(std::abs(m.omega), 1e-6);
  }
}

TEST(PlanPath, CorridorWaypointsAndExactReplay) {
  TrajoptConfig cfg;
  const auto sets = generate_waypoints({0, 0, 0}, {4, 0, 0}, cfg.lateral_span, cfg.delta, cfg.tau);
  for (const auto& wp : sets) {
    const PathEntry e = plan_path(wp, cfg);
    ASSERT_TRUE(e.converged) << wp.path_index;
    ASSERT_EQ(e.mu.size(), 16u);
    ASSERT_EQ(e.x.size(), 17u);
    ASSERT_EQ(e.K.size(), 16u);
    const auto idx = waypoint_time_indices(16, 3);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      EXPECT_LE((e.x[idx[k]].position() - wp.points[k]).norm(), 1e-3);
    }
    EXPECT_LE((e.x.back().position() - wp.goal.position()).norm(), 1e-3);
    State s = wp.start;
    EXPECT_EQ(e.x[0], s);
    for (std::size_t i = 0; i < e.mu.size(); ++i) {
      EXPECT_TRUE(cfg.bounds.contains(e.mu[i]));
      s = rk4_step(s, e.mu[i], cfg.ts);
      EXPECT_EQ(e.x[i + 1], s);
    }
  }
}

TEST(BuildLibrary, ParallelMatchesSerial) {
  TrajoptConfig cfg;
  BuildStats st;
  const PathLibrary par = build_library({0, 0, 0}, {4, 0, 0}, cfg, &st, Execution::kParallel);
  const PathLibrary ser = build_library({0, 0, 0}, {4, 0, 0}, cfg, nullptr, Execution::kSerial);
  EXPECT_TRUE(par == ser);
  EXPECT_EQ(par.entries.size(), 5u);
  EXPECT_EQ(par.center_path_index, 2);
  EXPECT_EQ(st.path_seconds.size(), 5u);
  for (std::size_t p = 1; p < par.entries.size(); ++p) {
    EXPECT_LT(par.entries[p - 1].lateral_offset, par.entries[p].lateral_offset);
  }
}

TEST(BuildLibrary, SinglePathIsCenter) {
  TrajoptConfig cfg;
  cfg.delta = 5.0;
  const PathLibrary lib = build_library({0, 0, 0}, {4, 0, 0}, cfg);
  ASSERT_EQ(lib.entries.size(), 1u);
  EXPECT_EQ(lib.center_path_index, 0);
}

TEST(BuildLibrary, NonConvergedReportedNotThrown) {
  TrajoptConfig cfg;
  cfg.max_outer = 1;
  BuildStats st;
  const PathLibrary lib = build_library({0, 0, 0}, {4, 0, 0}, cfg, &st);
  EXPECT_EQ(lib.converged_count(), 0u);
  EXPECT_EQ(st.warnings.size(), 5u);
}
