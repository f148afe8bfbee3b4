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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace meshnas {

struct MeshState;

enum class VariableKind { continuous, discrete_set, categorical };

std::string_view to_string(VariableKind kind);
VariableKind variable_kind_from_string(std::string_view text);

// One decision variable. Discrete sets hold ordered numeric values;
// categorical variables hold labels and are represented in a Point by the
// 0-based label index.
struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::continuous;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> values;
  std::vector<std::string> labels;
  double initial = 0.0;

  static VariableSpec continuous(std::string name, double lower, double upper,
                                 double initial);
  static VariableSpec discrete_set(std::string name, std::vector<double> values,
                                   double initial);
  static VariableSpec categorical(std::string name,
                                  std::vector<std::string> labels,
                                  std::string_view initial);

  // Number of admissible values; 0 for continuous variables.
  std::size_t cardinality() const;
  bool is_continuous() const { return kind == VariableKind::continuous; }
};

// Coordinates in declaration order. Categorical coordinates hold the label
// index as a double.
using Point = std::vector<double>;

class SearchSpace {
 public:
  SearchSpace() = default;
  // Throws ConfigError when any variable breaks its invariants or names
  // repeat.
  explicit SearchSpace(std::vector<VariableSpec> variables);

  std::size_t size() const { return variables_.size(); }
  bool empty() const { return variables_.empty(); }
  const VariableSpec& operator[](std::size_t i) const { return variables_[i]; }
  const std::vector<VariableSpec>& variables() const { return variables_; }

  // Throws KindError (unknown name).
  std::size_t index_of(std::string_view name) const;
  Point initial_point() const;

 private:
  std::vector<VariableSpec> variables_;
};

// Position of `value` in a discrete_set/categorical variable, or -1 when it
// is not admissible. Continuous variables always return -1.
std::int64_t value_index(const VariableSpec& var, double value);

bool validate(const SearchSpace& space, const Point& p);

std::vector<std::int64_t> to_mesh_coords(const SearchSpace& space,
                                         const Point& p, const MeshState& mesh,
                                         const Point& center);

// Inverse of to_mesh_coords. Continuous coordinates are clamped to their
// bounds and discrete indices to the admissible range.
Point from_mesh_coords(const SearchSpace& space,
                       const std::vector<std::int64_t>& coords,
                       const MeshState& mesh, const Point& center);

// Every point obtained by switching categorical variable `var` to one of
// its other labels. Throws KindError if `var` is not categorical.
std::vector<Point> categorical_neighbors(const SearchSpace& space,
                                         const Point& p, std::string_view var);

// Same as categorical_neighbors but also accepts discrete_set variables;
// used by the engine's extended poll.
std::vector<Point> alternative_values(const SearchSpace& space, const Point& p,
                                      std::size_t var);

// Human-readable coordinate: the label for categorical variables, shortest
// round-trip decimal otherwise.
std::string format_coordinate(const VariableSpec& var, double value);

}  // namespace meshnas
