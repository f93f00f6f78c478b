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

#include "lnav/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lnav {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

template <int N>
Eigen::Matrix<double, N, 1> as_vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != N) fail(path, "expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int k = 0; k < N; ++k) v(k) = as_number(j[static_cast<std::size_t>(k)], path);
  return v;
}

// Object view that records which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void num(const std::string& key, double& out) {
    if (auto* v = find(key)) out = as_number(*v, at(key));
  }
  void integer(const std::string& key, int& out) {
    if (auto* v = find(key)) out = static_cast<int>(as_integer(*v, at(key)));
  }
  void boolean(const std::string& key, bool& out) {
    if (auto* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void vec2(const std::string& key, Vec2& out) {
    if (auto* v = find(key)) out = as_vec<2>(*v, at(key));
  }
  void vec3(const std::string& key, Vec3& out) {
    if (auto* v = find(key)) out = as_vec<3>(*v, at(key));
  }
  void state(const std::string& key, State& out) {
    if (auto* v = find(key)) {
      const Vec3 x = as_vec<3>(*v, at(key));
      out = {x(0), x(1), x(2)};
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Primitive parse_primitive(const json& j, const std::string& path, std::string& type) {
  Section s(j, path);
  const json* t = s.find("type");
  if (!t || !t->is_string()) fail(s.at("type"), "expected \"circle\" or \"rect\"");
  type = t->get<std::string>();
  Primitive out;
  if (type == "circle") {
    Circle c;
    s.vec2("center", c.center);
    s.num("radius", c.radius);
    out = c;
  } else if (type == "rect") {
    Rect r;
    s.vec2("min", r.lo);
    s.vec2("max", r.hi);
    s.num("corner_radius", r.corner_radius);
    out = r;
  } else {
    fail(s.at("type"), "unknown shape type '" + type + "'");
  }
  s.finish();
  return out;
}

Obstacle parse_obstacle(const json& j, const std::string& path, int default_id) {
  Section s(j, path);
  int id = default_id;
  s.integer("id", id);
  const json* t = s.find("type");
  if (!t || !t->is_string()) fail(s.at("type"), "expected a shape type");
  const std::string type = t->get<std::string>();
  Shape shape;
  if (type == "composite") {
    Composite c;
    const json* m = s.find("members");
    if (!m || !m->is_array() || m->empty()) fail(s.at("members"), "expected a non-empty array");
    for (std::size_t k = 0; k < m->size(); ++k) {
      const std::string mp = s.at("members") + "[" + std::to_string(k) + "]";
      std::string mt;
      c.members.push_back(parse_primitive((*m)[k], mp, mt));
    }
    shape = c;
  } else {
    // Re-parse the same object as a primitive; the local Section only owns
    // the obstacle-level keys.
    json prim = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "id" && it.key() != "motion") prim[it.key()] = it.value();
    }
    for (auto it = j.begin(); it != j.end(); ++it) s.find(it.key());
    std::string pt;
    const Primitive p = parse_primitive(prim, path, pt);
    shape = std::visit([](const auto& v) -> Shape { return v; }, p);
  }
  std::optional<MotionScript> motion;
  if (const json* m = s.find("motion")) {
    Section ms(*m, s.at("motion"));
    MotionScript script;
    const json* pts = ms.find("points");
    if (!pts || !pts->is_array() || pts->empty()) fail(ms.at("points"), "expected a non-empty array");
    for (std::size_t k = 0; k < pts->size(); ++k) {
      script.points.push_back(as_vec<2>((*pts)[k], ms.at("points") + "[" + std::to_string(k) + "]"));
    }
    ms.num("speed", script.speed);
    ms.finish();
    motion = script;
  }
  s.finish();
  try {
    return Obstacle(id, shape, motion);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }
json state_json(const State& s) { return json::array({s.px, s.py, s.theta}); }

json primitive_json(const Primitive& p) {
  json o;
  if (const auto* c = std::get_if<Circle>(&p)) {
    o["type"] = "circle";
    o["center"] = vec_json(c->center);
    o["radius"] = c->radius;
  } else {
    const auto& r = std::get<Rect>(p);
    o["type"] = "rect";
    o["min"] = vec_json(r.lo);
    o["max"] = vec_json(r.hi);
    o["corner_radius"] = r.corner_radius;
  }
  return o;
}

json obstacle_json(const Obstacle& obs) {
  json o;
  if (const auto* c = std::get_if<Composite>(&obs.shape())) {
    o["type"] = "composite";
    json members = json::array();
    for (const auto& m : c->members) members.push_back(primitive_json(m));
    o["members"] = members;
  } else if (const auto* ci = std::get_if<Circle>(&obs.shape())) {
    o = primitive_json(*ci);
  } else {
    o = primitive_json(std::get<Rect>(obs.shape()));
  }
  o["id"] = obs.id();
  if (obs.motion()) {
    json pts = json::array();
    for (const auto& p : obs.motion()->points) pts.push_back(vec_json(p));
    o["motion"] = {{"points", pts}, {"speed", obs.motion()->speed}};
  }
  return o;
}

}  // namespace

Config parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Config c;
  Section top(root, "");

  if (const json* b = top.find("bounds")) {
    Section s(*b, "bounds");
    InputBounds& ib = c.navigator.filter.bounds;
    s.num("v_min", ib.v_min);
    s.num("v_max", ib.v_max);
    s.num("omega_min", ib.omega_min);
    s.num("omega_max", ib.omega_max);
    s.finish();
    if (!ib.valid()) fail("bounds", "min exceeds max");
  }
  c.trajopt.bounds = c.navigator.filter.bounds;

  if (const json* j = top.find("scenario")) {
    Section s(*j, "scenario");
    Scenario& sc = c.scenario;
    if (const json* b = s.find("bounds")) {
      Section bs(*b, "scenario.bounds");
      bs.vec2("min", sc.bounds_lo);
      bs.vec2("max", sc.bounds_hi);
      bs.finish();
    }
    s.state("start", sc.start);
    s.state("goal", sc.goal);
    s.num("sensing_radius", c.navigator.filter.sensing_radius);
    s.num("control_period", sc.control_period);
    s.num("duration", sc.duration);
    if (const json* a = s.find("accel_limits")) {
      Section as(*a, "scenario.accel_limits");
      as.num("v", sc.accel.v_accel);
      as.num("omega", sc.accel.omega_accel);
      as.finish();
    }
    if (const json* sd = s.find("seed")) {
      if (!sd->is_number_unsigned()) fail("scenario.seed", "expected a non-negative integer");
      sc.seed = sd->get<std::uint64_t>();
    }
    s.vec3("start_jitter", sc.start_jitter);
    if (const json* obs = s.find("obstacles")) {
      if (!obs->is_array()) fail("scenario.obstacles", "expected an array");
      for (std::size_t k = 0; k < obs->size(); ++k) {
        sc.obstacles.push_back(parse_obstacle(
            (*obs)[k], "scenario.obstacles[" + std::to_string(k) + "]", static_cast<int>(k)));
      }
    }
    s.finish();
  }

  if (const json* j = top.find("trajopt")) {
    Section s(*j, "trajopt");
    TrajoptConfig& t = c.trajopt;
    s.integer("T", t.horizon);
    s.num("Ts", t.ts);
    s.integer("tau", t.tau);
    s.num("L", t.lateral_span);
    s.num("delta", t.delta);
    s.num("input_weight", t.cost.input_weight);
    s.num("state_weight", t.cost.state_weight);
    s.num("eps_pri", t.eps_pri);
    s.num("eps_dual", t.eps_dual);
    s.integer("max_outer", t.max_outer);
    s.integer("max_inner", t.max_inner);
    s.num("inner_tol", t.inner_tol);
    s.num("rho0", t.rho0);
    s.boolean("adapt_rho", t.adapt_rho);
    s.num("rho_mu", t.rho_schedule.mu);
    s.num("rho_tau_incr", t.rho_schedule.tau_incr);
    s.num("rho_tau_decr", t.rho_schedule.tau_decr);
    if (const json* ov = s.find("waypoint_overrides")) {
      if (!ov->is_array()) fail(s.at("waypoint_overrides"), "expected an array");
      for (std::size_t k = 0; k < ov->size(); ++k) {
        Section os((*ov)[k], s.at("waypoint_overrides") + "[" + std::to_string(k) + "]");
        WaypointOverride w;
        os.integer("path", w.path);
        os.integer("waypoint", w.waypoint);
        if (!os.find("position")) fail(os.at("position"), "required");
        os.vec2("position", w.position);
        os.finish();
        t.overrides.push_back(w);
      }
    }
    s.finish();
    try {
      t.validate();
    } catch (const std::invalid_argument& e) {
      fail("trajopt", e.what());
    }
  }

  if (const json* j = top.find("filter")) {
    Section s(*j, "filter");
    FilterParams& f = c.navigator.filter;
    s.num("alpha_gain", f.alpha_gain);
    s.num("gamma", f.gamma);
    s.num("w_h", f.w_h);
    s.num("d_act", f.d_act);
    s.num("hysteresis_margin", f.hysteresis_margin);
    s.num("slack_penalty", f.slack_penalty);
    s.num("manifold_lookahead", f.manifold_lookahead);
    s.boolean("sticky_tangent", f.sticky_tangent);
    s.finish();
    if (!(f.alpha_gain > 0.0)) fail("filter.alpha_gain", "must be positive");
    if (f.gamma < 0.0) fail("filter.gamma", "must be non-negative");
  }

  if (const json* j = top.find("navigator")) {
    Section s(*j, "navigator");
    NavigatorParams& n = c.navigator;
    s.num("tol_adv", n.tol_adv);
    s.num("goal_tol", n.goal_tol);
    s.integer("lookback", n.lookback);
    s.num("los_radius", n.los_radius);
    s.boolean("advance_on_approach", n.advance_on_approach);
    if (const json* r = s.find("tangent_reference")) {
      const std::string v = r->is_string() ? r->get<std::string>() : "";
      if (v == "goal") {
        n.tangent_reference = TangentReference::kGoal;
      } else if (v == "reference") {
        n.tangent_reference = TangentReference::kReference;
      } else {
        fail(s.at("tangent_reference"), "expected \"goal\" or \"reference\"");
      }
    }
    s.finish();
  }
  top.finish();

  try {
    c.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string print_config(const Config& c) {
  const Scenario& sc = c.scenario;
  const TrajoptConfig& t = c.trajopt;
  const FilterParams& f = c.navigator.filter;
  const NavigatorParams& n = c.navigator;

  json obstacles = json::array();
  for (const auto& o : sc.obstacles) obstacles.push_back(obstacle_json(o));
  json overrides = json::array();
  for (const auto& w : t.overrides) {
    overrides.push_back({{"path", w.path}, {"waypoint", w.waypoint}, {"position", vec_json(w.position)}});
  }

  json root;
  root["scenario"] = {
      {"bounds", {{"min", vec_json(sc.bounds_lo)}, {"max", vec_json(sc.bounds_hi)}}},
      {"start", state_json(sc.start)},
      {"goal", state_json(sc.goal)},
      {"sensing_radius", f.sensing_radius},
      {"control_period", sc.control_period},
      {"duration", sc.duration},
      {"accel_limits", {{"v", sc.accel.v_accel}, {"omega", sc.accel.omega_accel}}},
      {"seed", sc.seed},
      {"start_jitter", vec_json(sc.start_jitter)},
      {"obstacles", obstacles},
  };
  root["trajopt"] = {
      {"T", t.horizon},
      {"Ts", t.ts},
      {"tau", t.tau},
      {"L", t.lateral_span},
      {"delta", t.delta},
      {"input_weight", t.cost.input_weight},
      {"state_weight", t.cost.state_weight},
      {"eps_pri", t.eps_pri},
      {"eps_dual", t.eps_dual},
      {"max_outer", t.max_outer},
      {"max_inner", t.max_inner},
      {"inner_tol", t.inner_tol},
      {"rho0", t.rho0},
      {"adapt_rho", t.adapt_rho},
      {"rho_mu", t.rho_schedule.mu},
      {"rho_tau_incr", t.rho_schedule.tau_incr},
      {"rho_tau_decr", t.rho_schedule.tau_decr},
      {"waypoint_overrides", overrides},
  };
  root["filter"] = {
      {"alpha_gain", f.alpha_gain},   {"gamma", f.gamma},
      {"w_h", f.w_h},                 {"d_act", f.d_act},
      {"hysteresis_margin", f.hysteresis_margin},
      {"slack_penalty", f.slack_penalty},
      {"manifold_lookahead", f.manifold_lookahead},
      {"sticky_tangent", f.sticky_tangent},
  };
  root["bounds"] = {
      {"v_min", f.bounds.v_min},
      {"v_max", f.bounds.v_max},
      {"omega_min", f.bounds.omega_min},
      {"omega_max", f.bounds.omega_max},
  };
  root["navigator"] = {
      {"tol_adv", n.tol_adv},
      {"goal_tol", n.goal_tol},
      {"lookback", n.lookback},
      {"los_radius", n.los_radius},
      {"advance_on_approach", n.advance_on_approach},
      {"tangent_reference",
       n.tangent_reference == TangentReference::kGoal ? "goal" : "reference"},
  };
  return root.dump(2) + "\n";
}

}  // namespace lnav
