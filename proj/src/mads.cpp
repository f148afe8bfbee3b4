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

#include "meshnas/mads.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "meshnas/errors.hpp"

namespace meshnas {

namespace {

using Key = std::vector<std::uint64_t>;

Key key_of(const Point& p) {
  Key k(p.size());
  std::transform(p.begin(), p.end(), k.begin(),
                 [](double x) { return std::bit_cast<std::uint64_t>(x); });
  return k;
}

std::string number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Uniform in [-1, 1) from the top 53 bits; independent of the standard
// library's distribution implementations so traces match across toolchains.
double symmetric_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

EvalResult call_evaluator(const Evaluator& evaluator, const Point& p) {
  const auto start = std::chrono::steady_clock::now();
  EvalResult r;
  try {
    r = evaluator(p);
  } catch (const std::exception& e) {
    r = EvalResult::failure(fmt::format("evaluator threw: {}", e.what()));
  } catch (...) {
    r = EvalResult::failure("evaluator threw a non-standard exception");
  }
  if (r.ok() && !std::isfinite(r.objective)) {
    r = EvalResult::failure("non-finite objective");
  }
  if (r.wall_time <= 0.0) {
    r.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

std::int64_t continuous_poll_step(const SearchSpace& space, const MeshState& mesh) {
  constexpr double kCap = 0x1.0p40;
  double step = kCap;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!space[i].is_continuous()) continue;
    step = std::min(step, std::floor(mesh.frame[i] / mesh.mesh[i]));
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(step));
}

class Engine {
 public:
  explicit Engine(const OptimizationProblem& problem)
      : problem_(problem), space_(problem.space), rng_(problem.options.seed) {}

  OptimizationResult run();

 private:
  struct BatchOutcome {
    std::optional<std::size_t> best;
    bool exhausted = false;
  };

  BatchOutcome evaluate_batch(const std::vector<Point>& candidates);
  void commit(const Point& p, EvalResult r);
  void accept(const Point& p);
  Point speculative_point() const;
  std::vector<Point> extended_poll() const;
  bool budget_left(std::size_t pending) const {
    return result_.history.size() + pending < problem_.options.max_evaluations;
  }

  const OptimizationProblem& problem_;
  const SearchSpace& space_;
  std::mt19937_64 rng_;
  EvaluationCache cache_;
  std::map<Key, std::size_t> eval_ids_;
  MeshState mesh_;
  OptimizationResult result_;
  double incumbent_value_ = std::numeric_limits<double>::infinity();
  // Native displacement for continuous variables, index delta otherwise.
  std::optional<std::vector<double>> last_step_;
};

void Engine::commit(const Point& p, EvalResult r) {
  EvaluationRecord rec;
  rec.eval_id = result_.history.size();
  rec.iteration = mesh_.iteration;
  rec.point = p;
  rec.result = r;
  eval_ids_.emplace(key_of(p), rec.eval_id);
  cache_.insert(p, std::move(r));
  result_.history.append(std::move(rec));
}

void Engine::accept(const Point& p) {
  auto cached = cache_.lookup(p);
  result_.incumbent.point = p;
  result_.incumbent.result = *cached;
  result_.incumbent.eval_id = eval_ids_.at(key_of(p));
  incumbent_value_ = barrier_value(*cached, problem_.sense);
}

Engine::BatchOutcome Engine::evaluate_batch(const std::vector<Point>& candidates) {
  BatchOutcome out;
  double best_value = incumbent_value_;
  const bool opportunistic = problem_.options.opportunistic;
  const std::size_t workers = std::max<std::size_t>(1, problem_.options.workers);
  std::vector<std::size_t> pending;

  auto consider = [&](std::size_t idx, const EvalResult& r) {
    const double v = barrier_value(r, problem_.sense);
    if (v < best_value) {
      best_value = v;
      out.best = idx;
      return true;
    }
    return false;
  };

  // Runs the pending candidates (concurrently when workers > 1) and commits
  // them in candidate order. Returns true when the batch should stop.
  auto flush = [&]() {
    std::vector<EvalResult> results(pending.size());
    if (pending.size() == 1) {
      results[0] = call_evaluator(problem_.evaluator, candidates[pending[0]]);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(pending.size());
      for (std::size_t j = 0; j < pending.size(); ++j) {
        threads.emplace_back([&, j] {
          results[j] = call_evaluator(problem_.evaluator, candidates[pending[j]]);
        });
      }
      for (auto& t : threads) t.join();
    }
    bool improved = false;
    for (std::size_t j = 0; j < pending.size(); ++j) {
      improved |= consider(pending[j], results[j]);
      commit(candidates[pending[j]], std::move(results[j]));
    }
    pending.clear();
    return improved && opportunistic;
  };

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (auto hit = cache_.lookup(candidates[i])) {
      ++result_.cache_hits;
      if (consider(i, *hit) && opportunistic && pending.empty()) return out;
      continue;
    }
    if (!budget_left(pending.size())) {
      if (!pending.empty() && flush()) return out;
      out.exhausted = !out.best.has_value();
      return out;
    }
    pending.push_back(i);
    if (pending.size() >= workers && flush()) return out;
  }
  if (!pending.empty()) flush();
  return out;
}

Point Engine::speculative_point() const {
  const auto& step = *last_step_;
  const auto& center = result_.incumbent.point;
  std::vector<std::int64_t> offset(space_.size(), 0);
  for (std::size_t i = 0; i < space_.size(); ++i) {
    const auto& v = space_[i];
    if (v.is_continuous()) {
      offset[i] = std::llround(step[i] / mesh_.mesh[i]);
    } else if (v.kind == VariableKind::discrete_set) {
      offset[i] = static_cast<std::int64_t>(step[i]);
    }
  }
  offset = clamp_offset(space_, mesh_, center, std::move(offset));
  return from_mesh_coords(space_, offset, mesh_, center);
}

std::vector<Point> Engine::extended_poll() const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < space_.size(); ++i) {
    if (space_[i].is_continuous()) continue;
    for (auto& p : alternative_values(space_, result_.incumbent.point, i))
      out.push_back(std::move(p));
  }
  return out;
}

OptimizationResult Engine::run() {
  const auto& opts = problem_.options;
  if (opts.max_evaluations < 1) throw ConfigError("max_evaluations must be >= 1");
  if (!(opts.min_frame_size > 0.0)) throw ConfigError("min_frame_size must be > 0");
  if (!problem_.evaluator) throw ConfigError("optimization problem has no evaluator");

  const Point start = space_.initial_point();
  if (!validate(space_, start)) throw BoundsError("initial point is not valid");
  mesh_ = initial_mesh(space_);

  EvalResult first = problem_.initial_result
                         ? *problem_.initial_result
                         : call_evaluator(problem_.evaluator, start);
  commit(start, first);
  if (!first.feasible()) {
    throw InfeasibleStartError(
        first.ok() ? "initial point violates a constraint"
                   : fmt::format("initial evaluation failed: {}", first.message));
  }
  accept(start);

  while (true) {
    if (result_.history.size() >= opts.max_evaluations) {
      result_.stop_reason = StopReason::budget;
      break;
    }
    if (frames_below(mesh_, opts.min_frame_size)) {
      result_.stop_reason = StopReason::mesh;
      break;
    }

    IterationTrace trace;
    trace.iteration = mesh_.iteration;
    trace.frame = mesh_.frame;
    trace.step = "none";
    const Point previous = result_.incumbent.point;
    bool exhausted = false;

    auto attempt = [&](const std::vector<Point>& candidates, std::string_view step) {
      if (trace.success || exhausted || candidates.empty()) return;
      auto outcome = evaluate_batch(candidates);
      exhausted = outcome.exhausted;
      if (outcome.best) {
        accept(candidates[*outcome.best]);
        trace.success = true;
        trace.step = step;
      }
    };

    if (last_step_) {
      Point p = speculative_point();
      if (p != previous) attempt({p}, "search");
    }
    if (!trace.success && !exhausted) {
      std::vector<Point> poll;
      for (auto& c : poll_candidates(space_, mesh_, previous, rng_))
        poll.push_back(std::move(c.point));
      attempt(poll, "poll");
    }
    attempt(extended_poll(), "extended");

    if (trace.success) {
      std::vector<double> step(space_.size(), 0.0);
      const auto& now = result_.incumbent.point;
      for (std::size_t i = 0; i < space_.size(); ++i) {
        const auto& v = space_[i];
        if (v.is_continuous())
          step[i] = now[i] - previous[i];
        else if (v.kind == VariableKind::discrete_set)
          step[i] = static_cast<double>(value_index(v, now[i]) - value_index(v, previous[i]));
      }
      last_step_ = std::move(step);
    } else {
      last_step_.reset();
    }

    trace.incumbent_objective = result_.incumbent.result.objective;
    trace.evaluations = result_.history.size();
    result_.trace.push_back(std::move(trace));
    if (exhausted && !result_.trace.back().success) {
      result_.stop_reason = StopReason::budget;
      break;
    }
    mesh_ = update_mesh(mesh_, result_.trace.back().success);
  }
  result_.final_mesh = mesh_;
  return std::move(result_);
}

}  // namespace

std::string_view to_string(EvalStatus status) {
  switch (status) {
    case EvalStatus::ok:
      return "ok";
    case EvalStatus::failed:
      return "failed";
    case EvalStatus::timeout:
      return "timeout";
  }
  return "?";
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::budget ? "budget" : "mesh";
}

void History::write_csv(std::ostream& out, const SearchSpace& space,
                        std::size_t constraint_count, bool with_wall_time) const {
  out << "eval_id";
  for (const auto& v : space.variables()) out << ',' << v.name;
  out << ",objective";
  for (std::size_t j = 0; j < constraint_count; ++j) out << ",constraint_" << j;
  out << ",status";
  if (with_wall_time) out << ",wall_time_s";
  out << '\n';
  for (const auto& rec : records_) {
    out << rec.eval_id;
    for (std::size_t i = 0; i < space.size(); ++i)
      out << ',' << format_coordinate(space[i], rec.point[i]);
    out << ',';
    if (rec.result.ok()) out << number(rec.result.objective);
    for (std::size_t j = 0; j < constraint_count; ++j) {
      out << ',';
      if (rec.result.ok() && j < rec.result.constraints.size())
        out << number(rec.result.constraints[j]);
    }
    out << ',' << to_string(rec.result.status);
    if (with_wall_time) out << ',' << fmt::format("{:.6f}", rec.result.wall_time);
    out << '\n';
  }
}

std::optional<EvalResult> EvaluationCache::lookup(const Point& p) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key_of(p));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EvaluationCache::insert(const Point& p, EvalResult result) {
  std::unique_lock lock(mutex_);
  entries_.insert_or_assign(key_of(p), std::move(result));
}

std::size_t EvaluationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

double barrier_value(const EvalResult& result, Sense sense) {
  if (!result.feasible()) return std::numeric_limits<double>::infinity();
  return sense == Sense::minimize ? result.objective : -result.objective;
}

EvalResult evaluate_with_barrier(const OptimizationProblem& problem, const Point& p,
                                 EvaluationCache& cache, bool* cache_hit) {
  if (auto hit = cache.lookup(p)) {
    if (cache_hit) *cache_hit = true;
    return *hit;
  }
  if (cache_hit) *cache_hit = false;
  EvalResult r = call_evaluator(problem.evaluator, p);
  cache.insert(p, r);
  return r;
}

std::vector<Direction> poll_directions(std::size_t n, std::int64_t max_step,
                                       std::mt19937_64& rng) {
  if (n == 0) return {};
  max_step = std::max<std::int64_t>(1, max_step);

  std::vector<double> v(n);
  double norm = 0.0;
  for (auto& x : v) {
    x = symmetric_unit(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm < 1e-12) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    norm = 1.0;
  }
  for (auto& x : v) x /= norm;

  // Largest integer q (along v) with |q|^2 <= max_step.
  std::vector<std::int64_t> q(n, 0);
  std::int64_t q_norm = 0;
  for (double alpha = std::sqrt(static_cast<double>(max_step)); alpha >= 0.5; alpha *= 0.9) {
    q_norm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = std::llround(alpha * v[i]);
      q_norm += q[i] * q[i];
    }
    if (q_norm > 0 && q_norm <= max_step) break;
  }
  if (q_norm == 0 || q_norm > max_step) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[k])) k = i;
    std::fill(q.begin(), q.end(), 0);
    q[k] = v[k] < 0 ? -1 : 1;
    q_norm = 1;
  }

  std::vector<Direction> dirs;
  dirs.reserve(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    Direction h(n);
    std::int64_t largest = 0;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = (i == j ? q_norm : 0) - 2 * q[i] * q[j];
      largest = std::max(largest, std::abs(h[i]));
    }
    const std::int64_t factor = std::max<std::int64_t>(1, max_step / largest);
    for (auto& x : h) x *= factor;
    Direction neg(n);
    std::transform(h.begin(), h.end(), neg.begin(), [](std::int64_t x) { return -x; });
    dirs.push_back(std::move(h));
    dirs.push_back(std::move(neg));
  }
  return dirs;
}

std::vector<std::int64_t> clamp_offset(const SearchSpace& space, const MeshState& mesh,
                                       const Point& center,
                                       std::vector<std::int64_t> offset) {
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& v = space[i];
    if (v.is_continuous()) {
      const double step = mesh.mesh[i];
      auto at = [&](std::int64_t k) { return center[i] + static_cast<double>(k) * step; };
      if (at(offset[i]) > v.upper) {
        offset[i] = static_cast<std::int64_t>(std::floor((v.upper - center[i]) / step));
        while (offset[i] > 0 && at(offset[i]) > v.upper) --offset[i];
      } else if (at(offset[i]) < v.lower) {
        offset[i] = static_cast<std::int64_t>(std::ceil((v.lower - center[i]) / step));
        while (offset[i] < 0 && at(offset[i]) < v.lower) ++offset[i];
      }
    } else {
      const auto base = value_index(v, center[i]);
      const auto last = static_cast<std::int64_t>(v.cardinality()) - 1;
      offset[i] = std::clamp<std::int64_t>(base + offset[i], 0, last) - base;
    }
  }
  return offset;
}

std::vector<PollCandidate> poll_candidates(const SearchSpace& space, const MeshState& mesh,
                                           const Point& center, std::mt19937_64& rng) {
  std::vector<std::size_t> continuous, discrete;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space[i].is_continuous())
      continuous.push_back(i);
    else if (space[i].kind == VariableKind::discrete_set)
      discrete.push_back(i);
  }

  std::vector<std::vector<std::int64_t>> offsets;
  for (const auto& d :
       poll_directions(continuous.size(), continuous_poll_step(space, mesh), rng)) {
    std::vector<std::int64_t> off(space.size(), 0);
    for (std::size_t k = 0; k < continuous.size(); ++k) off[continuous[k]] = d[k];
    offsets.push_back(std::move(off));
  }
  for (std::size_t idx : discrete) {
    for (std::int64_t s : {1, -1}) {
      std::vector<std::int64_t> off(space.size(), 0);
      off[idx] = s;
      offsets.push_back(std::move(off));
    }
  }

  std::vector<PollCandidate> out;
  std::set<Key> seen{key_of(center)};
  for (auto& off : offsets) {
    off = clamp_offset(space, mesh, center, std::move(off));
    Point p = from_mesh_coords(space, off, mesh, center);
    if (!seen.insert(key_of(p)).second) continue;
    out.push_back({std::move(p), std::move(off)});
  }
  return out;
}

OptimizationResult optimize(const OptimizationProblem& problem) {
  return Engine(problem).run();
}

}  // namespace meshnas
