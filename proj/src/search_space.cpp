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

#include "meshnas/search_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "meshnas/errors.hpp"
#include "meshnas/mesh.hpp"

namespace meshnas {

namespace {

bool same_value(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

void check_variable(const VariableSpec& v) {
  if (v.name.empty()) throw ConfigError("variable with empty name");
  switch (v.kind) {
    case VariableKind::continuous:
      if (!std::isfinite(v.lower) || !std::isfinite(v.upper) || !(v.lower < v.upper))
        throw ConfigError(fmt::format("variable '{}': need lower < upper", v.name));
      if (!(v.lower <= v.initial && v.initial <= v.upper))
        throw ConfigError(fmt::format("variable '{}': initial {} outside [{}, {}]",
                                      v.name, v.initial, v.lower, v.upper));
      break;
    case VariableKind::discrete_set: {
      if (v.values.empty())
        throw ConfigError(fmt::format("variable '{}': empty value set", v.name));
      for (std::size_t i = 0; i < v.values.size(); ++i) {
        if (!std::isfinite(v.values[i]))
          throw ConfigError(fmt::format("variable '{}': non-finite value", v.name));
        for (std::size_t j = 0; j < i; ++j)
          if (same_value(v.values[i], v.values[j]))
            throw ConfigError(fmt::format("variable '{}': duplicate value {}", v.name,
                                          v.values[i]));
      }
      if (value_index(v, v.initial) < 0)
        throw ConfigError(fmt::format("variable '{}': initial {} not in set", v.name,
                                      v.initial));
      break;
    }
    case VariableKind::categorical: {
      if (v.labels.empty())
        throw ConfigError(fmt::format("variable '{}': empty label list", v.name));
      std::set<std::string> seen(v.labels.begin(), v.labels.end());
      if (seen.size() != v.labels.size())
        throw ConfigError(fmt::format("variable '{}': duplicate label", v.name));
      if (value_index(v, v.initial) < 0)
        throw ConfigError(fmt::format("variable '{}': bad initial index", v.name));
      break;
    }
  }
}

void check_dimension(const SearchSpace& space, std::size_t n, const char* what) {
  if (space.empty()) throw DimensionError("search space has no variables");
  if (n != space.size())
    throw DimensionError(fmt::format("{} has {} coordinates, space has {} variables",
                                     what, n, space.size()));
}

}  // namespace

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::continuous:
      return "continuous";
    case VariableKind::discrete_set:
      return "discrete_set";
    case VariableKind::categorical:
      return "categorical";
  }
  return "?";
}

VariableKind variable_kind_from_string(std::string_view text) {
  if (text == "continuous") return VariableKind::continuous;
  if (text == "discrete_set") return VariableKind::discrete_set;
  if (text == "categorical") return VariableKind::categorical;
  throw ConfigError(fmt::format("unknown variable kind '{}'", text));
}

VariableSpec VariableSpec::continuous(std::string name, double lower, double upper,
                                      double initial) {
  VariableSpec v;
  v.name = std::move(name);
  v.kind = VariableKind::continuous;
  v.lower = lower;
  v.upper = upper;
  v.initial = initial;
  return v;
}

VariableSpec VariableSpec::discrete_set(std::string name, std::vector<double> values,
                                        double initial) {
  VariableSpec v;
  v.name = std::move(name);
  v.kind = VariableKind::discrete_set;
  v.values = std::move(values);
  v.initial = initial;
  return v;
}

VariableSpec VariableSpec::categorical(std::string name, std::vector<std::string> labels,
                                       std::string_view initial) {
  VariableSpec v;
  v.name = std::move(name);
  v.kind = VariableKind::categorical;
  auto it = std::find(labels.begin(), labels.end(), initial);
  if (it == labels.end())
    throw ConfigError(fmt::format("variable '{}': initial label '{}' not declared",
                                  v.name, initial));
  v.initial = static_cast<double>(it - labels.begin());
  v.labels = std::move(labels);
  return v;
}

std::size_t VariableSpec::cardinality() const {
  switch (kind) {
    case VariableKind::continuous:
      return 0;
    case VariableKind::discrete_set:
      return values.size();
    case VariableKind::categorical:
      return labels.size();
  }
  return 0;
}

SearchSpace::SearchSpace(std::vector<VariableSpec> variables)
    : variables_(std::move(variables)) {
  std::set<std::string> names;
  for (const auto& v : variables_) {
    check_variable(v);
    if (!names.insert(v.name).second)
      throw ConfigError(fmt::format("duplicate variable name '{}'", v.name));
  }
}

std::size_t SearchSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return i;
  throw KindError(fmt::format("no variable named '{}'", name));
}

Point SearchSpace::initial_point() const {
  Point p;
  p.reserve(variables_.size());
  for (const auto& v : variables_) p.push_back(v.initial);
  return p;
}

std::int64_t value_index(const VariableSpec& var, double value) {
  switch (var.kind) {
    case VariableKind::continuous:
      return -1;
    case VariableKind::discrete_set:
      for (std::size_t i = 0; i < var.values.size(); ++i)
        if (same_value(var.values[i], value)) return static_cast<std::int64_t>(i);
      return -1;
    case VariableKind::categorical: {
      if (!std::isfinite(value) || value != std::floor(value)) return -1;
      if (value < 0 || value >= static_cast<double>(var.labels.size())) return -1;
      return static_cast<std::int64_t>(value);
    }
  }
  return -1;
}

bool validate(const SearchSpace& space, const Point& p) {
  check_dimension(space, p.size(), "point");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& v = space[i];
    if (v.is_continuous()) {
      if (!(v.lower <= p[i] && p[i] <= v.upper)) return false;
    } else if (value_index(v, p[i]) < 0) {
      return false;
    }
  }
  return true;
}

std::vector<std::int64_t> to_mesh_coords(const SearchSpace& space, const Point& p,
                                         const MeshState& mesh, const Point& center) {
  check_dimension(space, p.size(), "point");
  check_dimension(space, center.size(), "center");
  if (mesh.mesh.size() != space.size())
    throw DimensionError("mesh dimension does not match the search space");
  std::vector<std::int64_t> coords(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& v = space[i];
    if (!(mesh.mesh[i] > 0.0) || !std::isfinite(mesh.mesh[i]))
      throw MeshError(fmt::format("mesh size of '{}' is not positive", v.name));
    if (v.is_continuous()) {
      coords[i] = std::llround((p[i] - center[i]) / mesh.mesh[i]);
    } else {
      const auto a = value_index(v, p[i]);
      const auto b = value_index(v, center[i]);
      if (a < 0 || b < 0)
        throw BoundsError(fmt::format("'{}' is not an admissible value", v.name));
      coords[i] = a - b;
    }
  }
  return coords;
}

Point from_mesh_coords(const SearchSpace& space, const std::vector<std::int64_t>& coords,
                       const MeshState& mesh, const Point& center) {
  check_dimension(space, coords.size(), "mesh coordinate vector");
  check_dimension(space, center.size(), "center");
  if (mesh.mesh.size() != space.size())
    throw DimensionError("mesh dimension does not match the search space");
  Point p(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& v = space[i];
    if (!(mesh.mesh[i] > 0.0) || !std::isfinite(mesh.mesh[i]))
      throw MeshError(fmt::format("mesh size of '{}' is not positive", v.name));
    if (v.is_continuous()) {
      const double x = center[i] + static_cast<double>(coords[i]) * mesh.mesh[i];
      p[i] = std::clamp(x, v.lower, v.upper);
    } else {
      const auto base = value_index(v, center[i]);
      if (base < 0)
        throw BoundsError(fmt::format("'{}' center is not an admissible value", v.name));
      const auto last = static_cast<std::int64_t>(v.cardinality()) - 1;
      const auto idx = std::clamp<std::int64_t>(base + coords[i], 0, last);
      p[i] = v.kind == VariableKind::categorical ? static_cast<double>(idx)
                                                 : v.values[static_cast<std::size_t>(idx)];
    }
  }
  return p;
}

std::vector<Point> alternative_values(const SearchSpace& space, const Point& p,
                                      std::size_t var) {
  check_dimension(space, p.size(), "point");
  if (var >= space.size()) throw KindError("variable index out of range");
  const auto& v = space[var];
  if (v.is_continuous())
    throw KindError(fmt::format("'{}' is continuous and has no alternatives", v.name));
  const auto current = value_index(v, p[var]);
  std::vector<Point> out;
  for (std::size_t k = 0; k < v.cardinality(); ++k) {
    if (static_cast<std::int64_t>(k) == current) continue;
    Point q = p;
    q[var] = v.kind == VariableKind::categorical ? static_cast<double>(k) : v.values[k];
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Point> categorical_neighbors(const SearchSpace& space, const Point& p,
                                         std::string_view var) {
  const auto i = space.index_of(var);
  if (space[i].kind != VariableKind::categorical)
    throw KindError(fmt::format("'{}' is not categorical", var));
  return alternative_values(space, p, i);
}

std::string format_coordinate(const VariableSpec& var, double value) {
  if (var.kind == VariableKind::categorical) {
    const auto idx = value_index(var, value);
    if (idx >= 0) return var.labels[static_cast<std::size_t>(idx)];
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace meshnas
