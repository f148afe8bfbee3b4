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

// Mesh adaptive direct search with an extreme barrier.
//
// The engine minimizes internally; maximization problems are handled by
// negating the objective when comparing, while history keeps the values the
// evaluator produced. Every iteration runs a speculative search step along
// the last successful displacement, then a poll over 2n orthogonal integer
// directions built from a seeded Householder reflection, then (only if both
// fail) an extended poll over every alternative value of the non-continuous
// variables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string_view>
#include <vector>

#include "meshnas/eval_result.hpp"
#include "meshnas/mesh.hpp"
#include "meshnas/search_space.hpp"

namespace meshnas {

enum class Sense { minimize, maximize };

// Must be safe to call concurrently when EngineOptions::workers > 1.
using Evaluator = std::function<EvalResult(const Point&)>;

struct EngineOptions {
  std::size_t max_evaluations = 500;
  double min_frame_size = 1e-6;
  std::uint64_t seed = 0;
  bool opportunistic = true;
  std::size_t workers = 1;
};

struct OptimizationProblem {
  SearchSpace space;
  Sense sense = Sense::minimize;
  Evaluator evaluator;
  EngineOptions options;
  // Number of constraint columns in the history CSV.
  std::size_t constraint_count = 0;
  // Result for space.initial_point() obtained elsewhere; reused instead of
  // calling the evaluator again.
  std::optional<EvalResult> initial_result;
};

struct Incumbent {
  Point point;
  EvalResult result;
  std::size_t eval_id = 0;
};

struct EvaluationRecord {
  std::size_t eval_id = 0;
  std::size_t iteration = 0;
  Point point;
  EvalResult result;
};

class History {
 public:
  void append(EvaluationRecord record) { records_.push_back(std::move(record)); }
  const std::vector<EvaluationRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  // eval_id, variables in declaration order, objective, constraint_<i>...,
  // status, wall_time_s.
  void write_csv(std::ostream& out, const SearchSpace& space,
                 std::size_t constraint_count, bool with_wall_time = true) const;

 private:
  std::vector<EvaluationRecord> records_;
};

// Keyed on the exact bit patterns of the coordinates. Lookups may run
// concurrently; inserts are serialized.
class EvaluationCache {
 public:
  std::optional<EvalResult> lookup(const Point& p) const;
  void insert(const Point& p, EvalResult result);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::vector<std::uint64_t>, EvalResult> entries_;
};

// +inf for failed or infeasible results, otherwise the objective oriented so
// that smaller is better.
double barrier_value(const EvalResult& result, Sense sense);

EvalResult evaluate_with_barrier(const OptimizationProblem& problem, const Point& p,
                                 EvaluationCache& cache, bool* cache_hit = nullptr);

using Direction = std::vector<std::int64_t>;

// {h1, -h1, ..., hn, -hn} where the hi are the columns of an integer
// Householder matrix |q|^2 I - 2 q q^T, each scaled by the largest integer
// keeping its entries within max_step.
std::vector<Direction> poll_directions(std::size_t n, std::int64_t max_step,
                                       std::mt19937_64& rng);

struct PollCandidate {
  Point point;
  std::vector<std::int64_t> offset;  // mesh coordinates relative to the center
};

// Poll set around `center`: Householder directions over the continuous
// variables, +-1 index steps over discrete_set variables. Categorical
// variables are left to the extended poll. Offsets are clamped in mesh
// coordinates so candidates stay both in bounds and on the mesh; candidates
// equal to the center and duplicates are dropped.
std::vector<PollCandidate> poll_candidates(const SearchSpace& space,
                                           const MeshState& mesh, const Point& center,
                                           std::mt19937_64& rng);

// Clamp a mesh offset so that center + offset stays inside the bounds.
std::vector<std::int64_t> clamp_offset(const SearchSpace& space, const MeshState& mesh,
                                       const Point& center,
                                       std::vector<std::int64_t> offset);

enum class StopReason { budget, mesh };

std::string_view to_string(StopReason reason);

struct IterationTrace {
  std::size_t iteration = 0;
  std::vector<double> frame;  // before the update
  bool success = false;
  std::string_view step;      // "search", "poll", "extended" or "none"
  double incumbent_objective = 0.0;
  std::size_t evaluations = 0;  // cumulative
};

struct OptimizationResult {
  Incumbent incumbent;
  History history;
  std::vector<IterationTrace> trace;
  MeshState final_mesh;
  StopReason stop_reason = StopReason::budget;
  std::size_t cache_hits = 0;
};

// Throws InfeasibleStartError when the initial point fails or violates a
// constraint, BoundsError when it is not a valid point.
OptimizationResult optimize(const OptimizationProblem& problem);

}  // namespace meshnas
