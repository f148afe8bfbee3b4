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

// File-based blackbox evaluation.
//
// Contract for blackbox authors: the command template is expanded with the
// path of a point file for {input} and an integer seed for {seed}, then run
// through /bin/sh. The point file holds one line with the coordinates in
// declaration order (categorical values as 0-based indices). The blackbox
// prints the objective, optionally followed by constraint values, as the
// last non-empty stdout line and exits 0. A nonzero exit signals a failed
// evaluation.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "meshnas/eval_result.hpp"
#include "meshnas/search_space.hpp"

namespace meshnas {

struct BlackboxConfig {
  std::string command_template;
  double timeout = 900.0;  // seconds, per run
  std::vector<std::int64_t> seeds{0};
  std::filesystem::path working_dir = ".";
  std::size_t workers = 1;  // concurrent runs within one aggregate

  std::size_t repetitions() const { return seeds.size(); }
  // Throws ConfigError.
  void validate() const;
};

// Mean over the repetitions; status is ok only when every run succeeded.
struct AggregatedEval {
  EvalStatus status = EvalStatus::failed;
  double mean_objective = 0.0;
  std::vector<double> mean_constraints;
  std::vector<EvalResult> per_seed;
  double wall_time = 0.0;
  std::string message;

  bool ok() const { return status == EvalStatus::ok; }
};

using AggregateEvaluator = std::function<AggregatedEval(const Point&)>;

std::string format_point_line(const SearchSpace& space, const Point& p);

// Throws IoError when the file cannot be written, DimensionError on a size
// mismatch.
void write_point_file(const SearchSpace& space, const Point& p,
                      const std::filesystem::path& path);

// Reads a point file back; the inverse of write_point_file. Throws
// DimensionError or IoError.
std::vector<double> read_point_file(const std::filesystem::path& path);

EvalResult parse_output(std::string_view stdout_text, int exit_code, bool timed_out);

struct ProcessOutcome {
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = -1;  // 128 + signal when killed by a signal
  bool timed_out = false;
  double wall_time = 0.0;
};

// Runs `command` with /bin/sh -c in its own process group. On timeout the
// whole group is killed; leftover group members are also killed once the
// shell exits.
ProcessOutcome run_command(const std::string& command, double timeout_seconds,
                           const std::filesystem::path& working_dir = ".");

std::string expand_template(std::string_view command_template,
                            const std::filesystem::path& input, std::int64_t seed);

// One run: unique temp point file, command, parse, cleanup.
EvalResult evaluate_once(const BlackboxConfig& cfg, const SearchSpace& space, const Point& p,
                         std::int64_t seed);

AggregatedEval evaluate_aggregate(const BlackboxConfig& cfg, const SearchSpace& space,
                                  const Point& p);

// Averages already-computed per-seed results with the all-or-nothing rule.
AggregatedEval aggregate(std::vector<EvalResult> per_seed);

// Evaluator invoking the configured command for every aggregate.
AggregateEvaluator make_blackbox_evaluator(BlackboxConfig cfg, SearchSpace wire_space);

}  // namespace meshnas
