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

// Versioned JSON form of a PathLibrary. Doubles are written in shortest
// round-trip form, so read(write(lib)) == lib exactly.
//
//   {
//     "format": "lnav.path_library", "version": 1,
//     "Ts": 0.5, "T": 16, "delta": 0.8, "center_path_index": 2,
//     "start": [px, py, theta], "goal": [px, py, theta],
//     "paths": [{
//       "path_index": 0, "lateral_offset": -1.6, "converged": true,
//       "primal_residual": ..., "dual_residual": ..., "iterations": ...,
//       "waypoints": [x0, y0, x1, y1, ...],
//       "mu": [v_0, w_0, v_1, w_1, ...],             // T * 2
//       "K":  [k00, k01, k02, k10, k11, k12, ...],   // T * 6, row-major 2x3
//       "x":  [px_0, py_0, th_0, ...]                // (T + 1) * 3
//     }, ...]
//   }

#ifndef LNAV_LIBRARY_IO_HPP_
#define LNAV_LIBRARY_IO_HPP_

#include <stdexcept>
#include <string>

#include "lnav/trajopt.hpp"

namespace lnav {

inline constexpr int kLibraryFormatVersion = 1;

class LibraryFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string library_to_string(const PathLibrary& lib);
/// Throws LibraryFormatError on malformed or inconsistent input.
PathLibrary library_from_string(const std::string& text);

void write_library(const PathLibrary& lib, const std::string& path);
/// Throws LibraryFormatError when the file is unreadable or malformed.
PathLibrary read_library(const std::string& path);

}  // namespace lnav

#endif  // LNAV_LIBRARY_IO_HPP_
