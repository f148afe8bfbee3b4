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

#include "meshnas/tournament.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "meshnas/errors.hpp"
#include "meshnas/parallel.hpp"

namespace meshnas {

Candidate blackbox_candidate(std::string name, BlackboxConfig cfg) {
  cfg.validate();
  static const SearchSpace identity_space({
      VariableSpec::continuous("depth", 0.25, 2.0, 1.0),
      VariableSpec::continuous("width", 0.25, 2.0, 1.0),
      VariableSpec::continuous("resolution", 0.25, 2.0, 1.0),
  });
  return {std::move(name), [cfg = std::move(cfg)](std::int64_t seed) {
            return evaluate_once(cfg, identity_space, Point{1.0, 1.0, 1.0}, seed);
          }};
}

Ranking run_tournament(const std::vector<Candidate>& candidates,
                       const std::vector<std::int64_t>& seeds, std::size_t workers) {
  if (candidates.empty()) throw ConfigError("tournament needs at least one candidate");
  if (seeds.empty()) throw ConfigError("tournament needs at least one seed");
  std::set<std::string> names;
  for (const auto& c : candidates)
    if (!names.insert(c.name).second)
      throw ConfigError(fmt::format("duplicate candidate name '{}'", c.name));

  const std::size_t k = seeds.size();
  std::vector<EvalResult> runs(candidates.size() * k);
  parallel_for(runs.size(), workers, [&](std::size_t i) {
    const auto& cand = candidates[i / k];
    try {
      runs[i] = cand.run(seeds[i % k]);
    } catch (const std::exception& e) {
      runs[i] = EvalResult::failure(e.what());
    }
  });

  Ranking ranking;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    RankEntry e;
    e.name = candidates[c].name;
    e.declaration_index = c;
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t s = 0; s < k; ++s) {
      auto& r = runs[c * k + s];
      if (r.ok()) {
        sum += r.objective;
        ++ok;
      } else {
        ++e.failures;
      }
      e.per_seed.push_back(std::move(r));
    }
    e.mean_accuracy = ok ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
    ranking.push_back(std::move(e));
  }

  std::stable_sort(ranking.begin(), ranking.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.clean() != b.clean()) return a.clean();
    const bool an = std::isnan(a.mean_accuracy), bn = std::isnan(b.mean_accuracy);
    if (an != bn) return bn;
    if (!an && a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
    return a.declaration_index < b.declaration_index;
  });
  return ranking;
}

std::vector<std::string> select_top(const Ranking& ranking, std::size_t m) {
  if (m < 1 || m > ranking.size())
    throw ConfigError(fmt::format("cannot select top {} of {} candidates", m, ranking.size()));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < m; ++i) names.push_back(ranking[i].name);
  return names;
}

void write_ranking_table(std::ostream& out, const Ranking& ranking) {
  std::size_t width = 9;
  for (const auto& e : ranking) width = std::max(width, e.name.size());
  fmt::print(out, "{:>4}  {:<{}}  {:>10}  {:>8}\n", "rank", "candidate", width, "accuracy",
             "failures");
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const auto& e = ranking[i];
    fmt::print(out, "{:>4}  {:<{}}  {:>10}  {:>8}{}\n", i + 1, e.name, width,
               std::isnan(e.mean_accuracy) ? std::string("-")
                                           : fmt::format("{:.2f}", e.mean_accuracy),
               e.failures, e.clean() ? "" : "  (flagged)");
  }
}

void write_ranking_csv(std::ostream& out, const Ranking& ranking,
                       const std::vector<std::int64_t>& seeds) {
  out << "rank,candidate,mean_accuracy,failures";
  for (auto s : seeds) out << ",seed_" << s;
  out << '\n';
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const auto& e = ranking[i];
    out << i + 1 << ',' << e.name << ',';
    if (!std::isnan(e.mean_accuracy)) out << fmt::format("{}", e.mean_accuracy);
    out << ',' << e.failures;
    for (const auto& r : e.per_seed) {
      out << ',';
      if (r.ok()) out << fmt::format("{}", r.objective);
      else out << to_string(r.status);
    }
    out << '\n';
  }
}

}  // namespace meshnas
