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

#include "lnav/qp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lnav {

namespace {

// Weighted projection min (x - x0)' W (x - x0) s.t. G x >= h, W diagonal,
// enumerating every active set of size <= N. Returns false if infeasible.
template <int N>
bool enumerate_qp(const Eigen::Matrix<double, N, 1>& x0, const Eigen::Matrix<double, N, 1>& w,
                  const std::vector<Eigen::Matrix<double, N, 1>>& g, const std::vector<double>& h,
                  Eigen::Matrix<double, N, 1>& best_x, std::vector<std::size_t>& best_set) {
  using VecN = Eigen::Matrix<double, N, 1>;
  const std::size_t m = g.size();
  const VecN w_inv = w.cwiseInverse();
  double best_cost = std::numeric_limits<double>::infinity();

  auto feasible = [&](const VecN& x) {
    for (std::size_t j = 0; j < m; ++j) {
      const double scale = 1.0 + std::abs(h[j]);
      if (g[j].dot(x) < h[j] - kQpFeasTol * scale) return false;
    }
    return true;
  };
  auto consider = [&](const VecN& x, const std::vector<std::size_t>& set) {
    if (!x.allFinite() || !feasible(x)) return;
    const double cost = (x - x0).cwiseProduct(w).dot(x - x0);
    if (cost < best_cost) {
      best_cost = cost;
      best_x = x;
      best_set = set;
    }
  };

  consider(x0, {});

  std::vector<std::size_t> set;
  // Recursive enumeration of index subsets of size 1..N in lexicographic order.
  auto solve_set = [&](const std::vector<std::size_t>& s) {
    const int k = static_cast<int>(s.size());
    Eigen::MatrixXd gs(k, N);
    Eigen::VectorXd rhs(k);
    for (int r = 0; r < k; ++r) {
      gs.row(r) = g[s[static_cast<std::size_t>(r)]].transpose();
      rhs(r) = h[s[static_cast<std::size_t>(r)]] - g[s[static_cast<std::size_t>(r)]].dot(x0);
    }
    const Eigen::MatrixXd gw = gs * w_inv.asDiagonal();
    const Eigen::MatrixXd m_kkt = gw * gs.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m_kkt);
    if (lu.rank() < k) return;
    const Eigen::VectorXd lambda = lu.solve(rhs);
    const VecN x = x0 + gw.transpose() * lambda;
    consider(x, s);
  };
  auto recurse = [&](auto&& self, std::size_t first, int depth) -> void {
    for (std::size_t j = first; j < m; ++j) {
      set.push_back(j);
      solve_set(set);
      if (depth + 1 < N) self(self, j + 1, depth + 1);
      set.pop_back();
    }
  };
  recurse(recurse, 0, 0);
  return std::isfinite(best_cost);
}

}  // namespace

QPSolution solve_qp(const Input& u_nom, const std::vector<LinearConstraint>& constraints) {
  if (constraints.size() > kMaxQpConstraints) {
    throw std::invalid_argument("solve_qp: too many constraints");
  }
  const auto t0 = std::chrono::steady_clock::now();
  QPSolution sol;

  const Vec2 x0 = u_nom.vec();
  bool interior = true;
  for (const auto& c : constraints) {
    if (!(c.a.dot(x0) >= c.b)) {
      interior = false;
      break;
    }
  }
  if (interior) {
    // Bitwise passthrough when the nominal input is already admissible.
    sol.u = u_nom;
    sol.status = QpStatus::kOptimal;
  } else {
    std::vector<Vec2> g;
    std::vector<double> h;
    for (const auto& c : constraints) {
      g.push_back(c.a);
      h.push_back(c.b);
    }
    Vec2 x = x0;
    if (enumerate_qp<2>(x0, Vec2::Ones(), g, h, x, sol.active_set)) {
      sol.u = Input::from_vec(x);
      sol.status = QpStatus::kOptimal;
    } else {
      sol.u = u_nom;
      sol.status = QpStatus::kInfeasible;
    }
  }
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

SlackSolution solve_slack_qp(const Input& u_nom, const std::vector<LinearConstraint>& constraints,
                             double penalty) {
  if (constraints.size() + 1 > kMaxQpConstraints + 1) {
    throw std::invalid_argument("solve_slack_qp: too many constraints");
  }
  using Vec3d = Eigen::Vector3d;
  std::vector<Vec3d> g;
  std::vector<double> h;
  for (const auto& c : constraints) {
    g.emplace_back(c.a.x(), c.a.y(), c.kind == ConstraintKind::kBound ? 0.0 : 1.0);
    h.push_back(c.b);
  }
  g.emplace_back(0.0, 0.0, 1.0);
  h.push_back(0.0);
  const Vec3d x0(u_nom.v, u_nom.omega, 0.0);
  Vec3d x = x0;
  std::vector<std::size_t> set;
  SlackSolution out;
  if (enumerate_qp<3>(x0, Vec3d(1.0, 1.0, penalty), g, h, x, set)) {
    out.u = {x(0), x(1)};
    out.slack = x(2);
  } else {
    out.u = u_nom;
  }
  return out;
}

}  // namespace lnav
