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

#include "lnav/library_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lnav {

using nlohmann::json;

namespace {

json state_json(const State& s) { return json::array({s.px, s.py, s.theta}); }

State state_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw LibraryFormatError("state must be a 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<double> flat(const json& j, std::size_t expected, const char* key) {
  if (!j.is_array()) throw LibraryFormatError(std::string(key) + " must be an array");
  auto v = j.get<std::vector<double>>();
  if (v.size() != expected) {
    std::ostringstream msg;
    msg << key << " has " << v.size() << " values, expected " << expected;
    throw LibraryFormatError(msg.str());
  }
  return v;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw LibraryFormatError(std::string("missing key '") + key + "'");
  return *it;
}

}  // namespace

std::string library_to_string(const PathLibrary& lib) {
  json root;
  root["format"] = "lnav.path_library";
  root["version"] = kLibraryFormatVersion;
  root["Ts"] = lib.ts;
  root["T"] = lib.horizon;
  root["delta"] = lib.delta;
  root["center_path_index"] = lib.center_path_index;
  root["start"] = state_json(lib.start);
  root["goal"] = state_json(lib.goal);
  json paths = json::array();
  for (const auto& e : lib.entries) {
    json p;
    p["path_index"] = e.path_index;
    p["lateral_offset"] = e.lateral_offset;
    p["converged"] = e.converged;
    p["primal_residual"] = e.primal_residual;
    p["dual_residual"] = e.dual_residual;
    p["iterations"] = e.iterations;
    std::vector<double> wp, mu, k, x;
    for (const auto& w : e.waypoints) {
      wp.push_back(w.x());
      wp.push_back(w.y());
    }
    for (const auto& u : e.mu) {
      mu.push_back(u.v);
      mu.push_back(u.omega);
    }
    for (const auto& g : e.K) {
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 3; ++c) k.push_back(g(r, c));
      }
    }
    for (const auto& s : e.x) {
      x.push_back(s.px);
      x.push_back(s.py);
      x.push_back(s.theta);
    }
    p["waypoints"] = wp;
    p["mu"] = mu;
    p["K"] = k;
    p["x"] = x;
    paths.push_back(std::move(p));
  }
  root["paths"] = std::move(paths);
  return root.dump(1) + "\n";
}

PathLibrary library_from_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw LibraryFormatError(std::string("library is not valid JSON: ") + e.what());
  }
  try {
    if (field(root, "format").get<std::string>() != "lnav.path_library") {
      throw LibraryFormatError("not a path library file");
    }
    const int version = field(root, "version").get<int>();
    if (version != kLibraryFormatVersion) {
      throw LibraryFormatError("unsupported library version " + std::to_string(version));
    }
    PathLibrary lib;
    lib.ts = field(root, "Ts").get<double>();
    lib.horizon = field(root, "T").get<int>();
    lib.delta = field(root, "delta").get<double>();
    lib.center_path_index = field(root, "center_path_index").get<int>();
    lib.start = state_from(field(root, "start"));
    lib.goal = state_from(field(root, "goal"));
    if (!(lib.ts > 0.0) || lib.horizon < 1) throw LibraryFormatError("invalid Ts or T");

    const auto horizon = static_cast<std::size_t>(lib.horizon);
    for (const auto& p : field(root, "paths")) {
      PathEntry e;
      e.path_index = field(p, "path_index").get<int>();
      e.lateral_offset = field(p, "lateral_offset").get<double>();
      e.converged = field(p, "converged").get<bool>();
      e.primal_residual = field(p, "primal_residual").get<double>();
      e.dual_residual = field(p, "dual_residual").get<double>();
      e.iterations = field(p, "iterations").get<int>();
      const auto& wj = field(p, "waypoints");
      if (!wj.is_array() || wj.size() % 2 != 0) throw LibraryFormatError("waypoints must be pairs");
      const auto wp = wj.get<std::vector<double>>();
      for (std::size_t i = 0; i < wp.size(); i += 2) e.waypoints.emplace_back(wp[i], wp[i + 1]);
      const auto mu = flat(field(p, "mu"), 2 * horizon, "mu");
      const auto k = flat(field(p, "K"), 6 * horizon, "K");
      const auto x = flat(field(p, "x"), 3 * (horizon + 1), "x");
      for (std::size_t i = 0; i < horizon; ++i) {
        e.mu.push_back({mu[2 * i], mu[2 * i + 1]});
        Mat23 g;
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 3; ++c) g(r, c) = k[6 * i + 3 * static_cast<std::size_t>(r) + static_cast<std::size_t>(c)];
        }
        e.K.push_back(g);
      }
      for (std::size_t i = 0; i <= horizon; ++i) {
        e.x.push_back({x[3 * i], x[3 * i + 1], x[3 * i + 2]});
      }
      lib.entries.push_back(std::move(e));
    }
    if (!lib.entries.empty() &&
        (lib.center_path_index < 0 ||
         lib.center_path_index >= static_cast<int>(lib.entries.size()))) {
      throw LibraryFormatError("center_path_index out of range");
    }
    return lib;
  } catch (const json::exception& e) {
    throw LibraryFormatError(std::string("malformed library: ") + e.what());
  }
}

void write_library(const PathLibrary& lib, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LibraryFormatError("cannot open '" + path + "' for writing");
  out << library_to_string(lib);
  if (!out) throw LibraryFormatError("failed writing '" + path + "'");
}

PathLibrary read_library(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LibraryFormatError("cannot read library '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return library_from_string(buf.str());
}

}  // namespace lnav
