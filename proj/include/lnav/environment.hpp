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

// Analytic obstacle boundary functions. Every obstacle exposes a signed
// distance h (positive outside, meters) together with its gradient and
// Hessian with respect to the query position.

#ifndef LNAV_ENVIRONMENT_HPP_
#define LNAV_ENVIRONMENT_HPP_

#include <cstddef>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "lnav/dynamics.hpp"

namespace lnav {

struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;

  friend bool operator==(const Circle&, const Circle&) = default;
};

/// Axis-aligned box whose four corners are rounded with `corner_radius`.
/// The box [lo, hi] is the outer extent; the rounding is inscribed.
struct Rect {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Ones();
  double corner_radius = 0.0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

using Primitive = std::variant<Circle, Rect>;

/// Union of primitives. h is the minimum over members.
struct Composite {
  std::vector<Primitive> members;

  friend bool operator==(const Composite&, const Composite&) = default;
};

using Shape = std::variant<Circle, Rect, Composite>;

/// Looped polyline traversed at constant speed, starting at points[0].
/// The positions describe where the obstacle's reference point sits.
struct MotionScript {
  std::vector<Vec2> points;
  double speed = 0.0;

  double loop_length() const;
  Vec2 position_at(double t) const;

  friend bool operator==(const MotionScript&, const MotionScript&) = default;
};

struct BoundaryEval {
  double h = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
  /// Gradient not defined here: circle center (grad falls back to (1,0)) or
  /// a composite point equidistant from two members with distinct normals.
  bool degenerate = false;
  /// Minimizing member for composites, 0 otherwise.
  std::size_t member = 0;
};

class Obstacle {
 public:
  Obstacle() = default;
  Obstacle(int id, Shape shape, std::optional<MotionScript> motion = std::nullopt);

  int id() const { return id_; }
  const Shape& shape() const { return shape_; }
  const std::optional<MotionScript>& motion() const { return motion_; }
  bool is_moving() const { return motion_.has_value() && motion_->speed != 0.0; }

  /// Current rigid translation applied to the base shape.
  const Vec2& offset() const { return offset_; }
  /// Centroid of the base shape plus the current offset.
  Vec2 reference_point() const;

  /// Places a scripted obstacle at its position for time t. No-op when static.
  void set_time(double t);
  void set_offset(const Vec2& offset) { offset_ = offset; }

  BoundaryEval eval(const Vec2& p) const;

  friend bool operator==(const Obstacle& a, const Obstacle& b) {
    return a.id_ == b.id_ && a.shape_ == b.shape_ && a.motion_ == b.motion_ &&
           a.offset_ == b.offset_;
  }

 private:
  int id_ = 0;
  Shape shape_ = Circle{};
  std::optional<MotionScript> motion_;
  Vec2 base_reference_ = Vec2::Zero();
  Vec2 offset_ = Vec2::Zero();
};

using World = std::vector<Obstacle>;

/// Throws std::invalid_argument when a shape breaks its invariants.
void validate_shape(const Shape& shape);

/// The obstacle itself, or one static obstacle per member of a composite,
/// each carrying the parent's id and current offset.
std::vector<Obstacle> convex_pieces(const Obstacle& obs);

BoundaryEval eval_boundary(const Vec2& p, const Obstacle& obs);

/// Higher-order barrier hbar = h + w_h * grad(h) . (cos th, sin th).
struct HoCbf {
  double hbar = 0.0;
  /// d hbar / d (px, py, theta).
  Vec3 grad_state = Vec3::Zero();
  /// d hbar / d (obstacle translation); multiply by obstacle velocity.
  Vec2 obstacle_coeff = Vec2::Zero();
  BoundaryEval boundary;
};

HoCbf ho_cbf(const State& s, const Obstacle& obs, double w_h);

/// Recent (time, reference point) samples of one obstacle.
class ObstacleTrack {
 public:
  static constexpr std::size_t kCapacity = 8;

  /// Throws std::invalid_argument unless t is strictly after the last sample.
  void add_sample(double t, const Vec2& position);
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  struct Sample {
    double t;
    Vec2 position;
  };
  const Sample& back() const { return samples_.back(); }
  const Sample& at(std::size_t i) const { return samples_[i]; }

 private:
  std::deque<Sample> samples_;
};

inline constexpr double kVelocityStaleness = 0.5;

/// Backward difference over the two newest samples; zero when fewer than two
/// samples exist or when either the sample gap or the age exceeds `staleness`.
Vec2 estimate_velocity(const ObstacleTrack& track, double now,
                       double staleness = kVelocityStaleness);

std::vector<std::size_t> visible_obstacles(const State& s, const World& world,
                                           double sensing_radius);

/// Minimum h over the world, +inf for an empty world.
double min_boundary(const Vec2& p, const World& world);

/// True iff min_j h_j(p) > margin.
bool collision_check(const Vec2& p, const World& world, double margin);

}  // namespace lnav

#endif  // LNAV_ENVIRONMENT_HPP_
