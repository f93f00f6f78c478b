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

#include "lnav/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lnav {

namespace {

constexpr double kTieTol = 1e-9;

BoundaryEval eval_circle(const Vec2& p, const Circle& c) {
  BoundaryEval e;
  const Vec2 d = p - c.center;
  const double dist = d.norm();
  e.h = dist - c.radius;
  if (dist == 0.0) {
    e.grad = Vec2(1.0, 0.0);
    e.degenerate = true;
    return e;
  }
  e.grad = d / dist;
  e.hess = (Mat2::Identity() - e.grad * e.grad.transpose()) / dist;
  return e;
}

BoundaryEval eval_rect(const Vec2& p, const Rect& r) {
  BoundaryEval e;
  const Vec2 center = 0.5 * (r.lo + r.hi);
  const Vec2 half = 0.5 * (r.hi - r.lo);
  const double rad = std::min(r.corner_radius, half.minCoeff());
  const Vec2 d = p - center;
  const Vec2 sgn(d.x() < 0.0 ? -1.0 : 1.0, d.y() < 0.0 ? -1.0 : 1.0);
  const Vec2 q = d.cwiseAbs() - (half - Vec2::Constant(rad));

  if (q.x() > 0.0 && q.y() > 0.0) {
    // Outside a corner: distance to the rounding circle.
    const double dist = q.norm();
    e.h = dist - rad;
    e.grad = sgn.cwiseProduct(q) / dist;
    e.hess = (Mat2::Identity() - e.grad * e.grad.transpose()) / dist;
    return e;
  }
  if (q.x() >= q.y()) {
    e.h = q.x() - rad;
    e.grad = Vec2(sgn.x(), 0.0);
  } else {
    e.h = q.y() - rad;
    e.grad = Vec2(0.0, sgn.y());
  }
  if (q.x() == q.y() && q.x() <= 0.0) e.degenerate = true;
  return e;
}

BoundaryEval eval_primitive(const Vec2& p, const Primitive& prim) {
  return std::visit(
      [&](const auto& s) -> BoundaryEval {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return eval_circle(p, s);
        } else {
          return eval_rect(p, s);
        }
      },
      prim);
}

BoundaryEval eval_shape(const Vec2& p, const Shape& shape) {
  if (const auto* c = std::get_if<Circle>(&shape)) return eval_circle(p, *c);
  if (const auto* r = std::get_if<Rect>(&shape)) return eval_rect(p, *r);
  const auto& comp = std::get<Composite>(shape);
  BoundaryEval best;
  best.h = std::numeric_limits<double>::infinity();
  std::vector<BoundaryEval> evals;
  evals.reserve(comp.members.size());
  for (std::size_t i = 0; i < comp.members.size(); ++i) {
    evals.push_back(eval_primitive(p, comp.members[i]));
    if (evals.back().h < best.h) {
      best = evals.back();
      best.member = i;
    }
  }
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (i == best.member) continue;
    if (evals[i].h - best.h <= kTieTol && (evals[i].grad - best.grad).norm() > 1e-6) {
      best.degenerate = true;
    }
  }
  return best;
}

Vec2 primitive_centroid(const Primitive& prim) {
  if (const auto* c = std::get_if<Circle>(&prim)) return c->center;
  const auto& r = std::get<Rect>(prim);
  return 0.5 * (r.lo + r.hi);
}

Vec2 shape_centroid(const Shape& shape) {
  if (const auto* c = std::get_if<Circle>(&shape)) return c->center;
  if (const auto* r = std::get_if<Rect>(&shape)) return 0.5 * (r->lo + r->hi);
  const auto& comp = std::get<Composite>(shape);
  Vec2 sum = Vec2::Zero();
  for (const auto& m : comp.members) sum += primitive_centroid(m);
  return sum / static_cast<double>(comp.members.size());
}

void validate_primitive(const Primitive& prim) {
  if (const auto* c = std::get_if<Circle>(&prim)) {
    if (!(c->radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
    return;
  }
  const auto& r = std::get<Rect>(prim);
  if (!(r.lo.x() < r.hi.x() && r.lo.y() < r.hi.y())) {
    throw std::invalid_argument("rectangle min corner must be below max corner");
  }
  if (r.corner_radius < 0.0) throw std::invalid_argument("corner radius must be >= 0");
}

}  // namespace

void validate_shape(const Shape& shape) {
  if (const auto* comp = std::get_if<Composite>(&shape)) {
    if (comp->members.empty()) throw std::invalid_argument("composite obstacle is empty");
    for (const auto& m : comp->members) validate_primitive(m);
    return;
  }
  if (const auto* c = std::get_if<Circle>(&shape)) {
    validate_primitive(*c);
  } else {
    validate_primitive(std::get<Rect>(shape));
  }
}

double MotionScript::loop_length() const {
  double len = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    len += (points[(i + 1) % points.size()] - points[i]).norm();
  }
  return len;
}

Vec2 MotionScript::position_at(double t) const {
  if (points.empty()) return Vec2::Zero();
  const double total = loop_length();
  if (points.size() == 1 || total == 0.0) return points.front();
  double s = std::fmod(speed * t, total);
  if (s < 0.0) s += total;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec2& a = points[i];
    const Vec2& b = points[(i + 1) % points.size()];
    const double seg = (b - a).norm();
    if (s <= seg && seg > 0.0) return a + (s / seg) * (b - a);
    s -= seg;
  }
  return points.front();
}

Obstacle::Obstacle(int id, Shape shape, std::optional<MotionScript> motion)
    : id_(id), shape_(std::move(shape)), motion_(std::move(motion)) {
  validate_shape(shape_);
  base_reference_ = shape_centroid(shape_);
  if (motion_ && !motion_->points.empty()) {
    offset_ = motion_->position_at(0.0) - base_reference_;
  }
}

Vec2 Obstacle::reference_point() const { return base_reference_ + offset_; }

void Obstacle::set_time(double t) {
  if (!motion_ || motion_->points.empty()) return;
  offset_ = motion_->position_at(t) - base_reference_;
}

BoundaryEval Obstacle::eval(const Vec2& p) const { return eval_shape(p - offset_, shape_); }

BoundaryEval eval_boundary(const Vec2& p, const Obstacle& obs) { return obs.eval(p); }

HoCbf ho_cbf(const State& s, const Obstacle& obs, double w_h) {
  HoCbf out;
  out.boundary = obs.eval(s.position());
  const BoundaryEval& e = out.boundary;
  const Vec2 b(std::cos(s.theta), std::sin(s.theta));
  const Vec2 b_perp(-std::sin(s.theta), std::cos(s.theta));
  out.hbar = e.h + w_h * e.grad.dot(b);
  const Vec2 dpos = e.grad + w_h * (e.hess * b);
  out.grad_state = Vec3(dpos.x(), dpos.y(), w_h * e.grad.dot(b_perp));
  // The shape is rigidly translated, so d/d(offset) = -d/d(position).
  out.obstacle_coeff = -dpos;
  return out;
}

void ObstacleTrack::add_sample(double t, const Vec2& position) {
  if (!samples_.empty() && !(t > samples_.back().t)) {
    throw std::invalid_argument("obstacle track timestamps must strictly increase");
  }
  samples_.push_back({t, position});
  while (samples_.size() > kCapacity) samples_.pop_front();
}

Vec2 estimate_velocity(const ObstacleTrack& track, double now, double staleness) {
  if (track.size() < 2) return Vec2::Zero();
  const auto& last = track.at(track.size() - 1);
  const auto& prev = track.at(track.size() - 2);
  const double gap = last.t - prev.t;
  if (gap > staleness || now - last.t > staleness) return Vec2::Zero();
  return (last.position - prev.position) / gap;
}

std::vector<std::size_t> visible_obstacles(const State& s, const World& world,
                                           double sensing_radius) {
  std::vector<std::size_t> out;
  const Vec2 p = s.position();
  for (std::size_t j = 0; j < world.size(); ++j) {
    if (world[j].eval(p).h <= sensing_radius) out.push_back(j);
  }
  return out;
}

double min_boundary(const Vec2& p, const World& world) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& o : world) m = std::min(m, o.eval(p).h);
  return m;
}

bool collision_check(const Vec2& p, const World& world, double margin) {
  return min_boundary(p, world) > margin;
}

std::vector<Obstacle> convex_pieces(const Obstacle& obs) {
  const auto* comp = std::get_if<Composite>(&obs.shape());
  if (!comp) return {obs};
  std::vector<Obstacle> out;
  out.reserve(comp->members.size());
  for (const auto& m : comp->members) {
    Obstacle piece(obs.id(), std::visit([](const auto& v) -> Shape { return v; }, m));
    piece.set_offset(obs.offset());
    out.push_back(std::move(piece));
  }
  return out;
}

}  // namespace lnav
