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

// Baseline selection: run every candidate once per seed, rank by mean
// accuracy, keep the top m.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "meshnas/blackbox.hpp"
#include "meshnas/eval_result.hpp"

namespace meshnas {

struct Candidate {
  std::string name;
  // One run for the given seed.
  std::function<EvalResult(std::int64_t seed)> run;
};

// Runs the blackbox on the identity multiplier point "1 1 1".
Candidate blackbox_candidate(std::string name, BlackboxConfig cfg);

struct RankEntry {
  std::string name;
  std::size_t declaration_index = 0;
  double mean_accuracy = 0.0;  // mean of successful runs; NaN if none
  std::vector<EvalResult> per_seed;
  std::size_t failures = 0;

  bool clean() const { return failures == 0; }
};

// Clean candidates by mean descending, then candidates with failures by
// mean of their successes; ties keep declaration order.
using Ranking = std::vector<RankEntry>;

// Throws ConfigError for an empty candidate list, empty seed list or
// duplicate names.
Ranking run_tournament(const std::vector<Candidate>& candidates,
                       const std::vector<std::int64_t>& seeds, std::size_t workers = 1);

// Throws ConfigError unless 1 <= m <= ranking.size().
std::vector<std::string> select_top(const Ranking& ranking, std::size_t m);

void write_ranking_table(std::ostream& out, const Ranking& ranking);
void write_ranking_csv(std::ostream& out, const Ranking& ranking,
                       const std::vector<std::int64_t>& seeds);

}  // namespace meshnas
