// Copyright 2026 The meshnas Authors. All Rights Reserved.
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

#include "meshnas/mesh.hpp"

#include <algorithm>

namespace meshnas {

double mesh_size_for(double frame_size) {
  return std::min(frame_size, frame_size * frame_size);
}

MeshState initial_mesh(const SearchSpace& space) {
  MeshState s;
  for (const auto& v : space.variables()) {
    const double frame = v.is_continuous() ? (v.upper - v.lower) / 4.0 : 1.0;
    s.frame.push_back(frame);
    s.initial_frame.push_back(frame);
    s.mesh.push_back(mesh_size_for(frame));
  }
  return s;
}

MeshState update_mesh(const MeshState& state, bool iteration_success) {
  MeshState next = state;
  for (std::size_t i = 0; i < next.frame.size(); ++i) {
    next.frame[i] = iteration_success ? std::min(2.0 * state.frame[i], state.initial_frame[i])
                                      : state.frame[i] / 2.0;
    next.mesh[i] = mesh_size_for(next.frame[i]);
  }
  ++next.iteration;
  return next;
}

bool frames_below(const MeshState& state, double min_frame_size) {
  return std::all_of(state.frame.begin(), state.frame.end(),
                     [&](double f) { return f < min_frame_size; });
}

}  // namespace meshnas
