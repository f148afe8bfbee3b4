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

#pragma once

#include <cstddef>
#include <vector>

#include "meshnas/search_space.hpp"

namespace meshnas {

// Per-variable frame size (poll radius) and mesh size (point spacing).
// Discrete and categorical variables always move in whole index steps; their
// sizes still follow the update rule so the stopping test is uniform.
struct MeshState {
  std::vector<double> frame;
  std::vector<double> mesh;
  std::vector<double> initial_frame;
  std::size_t iteration = 0;

  std::size_t size() const { return frame.size(); }
};

// frame = range/4 for continuous variables, 1 index step otherwise.
MeshState initial_mesh(const SearchSpace& space);

double mesh_size_for(double frame_size);

// success: frame <- min(2*frame, initial); failure: frame <- frame/2.
// mesh <- min(frame, frame^2) in both cases.
MeshState update_mesh(const MeshState& state, bool iteration_success);

bool frames_below(const MeshState& state, double min_frame_size);

}  // namespace meshnas
