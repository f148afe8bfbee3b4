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

#include "meshnas/hpo.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "meshnas/errors.hpp"

namespace meshnas {

namespace {

constexpr const char* kNames[] = {"log10_lr", "weight_decay", "optimizer", "batch_size"};

void check_engine_space(const SearchSpace& s) {
  if (s.size() != 4 || s[0].name != kNames[0] || s[1].name != kNames[1] ||
      s[2].name != kNames[2] || s[3].name != kNames[3] || !s[0].is_continuous() ||
      s[1].kind != VariableKind::discrete_set || s[2].kind != VariableKind::categorical ||
      s[3].kind != VariableKind::discrete_set)
    throw ConfigError("not an HPO engine space");
}

}  // namespace

double reference_lr(std::string_view optimizer) {
  for (const auto& ref : kOptimizerTable)
    if (ref.name == optimizer) return ref.reference_lr;
  throw ConfigError(fmt::format("unknown optimizer '{}'", optimizer));
}

double effective_lr(std::string_view optimizer, double sampled_lr) {
  return sampled_lr * (reference_lr(optimizer) / reference_lr("SGD"));
}

SearchSpace hpo_space(const HpoSettings& s) {
  for (const auto& name : s.optimizers) reference_lr(name);
  if (!(s.lr_lower > 0.0))
    throw ConfigError("learning-rate bounds must be positive");
  return SearchSpace({
      VariableSpec::continuous(kNames[0], std::log10(s.lr_lower), std::log10(s.lr_upper),
                               std::log10(s.lr_initial)),
      VariableSpec::discrete_set(kNames[1], s.weight_decays, s.weight_decay_initial),
      VariableSpec::categorical(kNames[2], s.optimizers, s.optimizer_initial),
      VariableSpec::discrete_set(kNames[3], s.batch_sizes, s.batch_size_initial),
  });
}

SearchSpace hpo_space_from_declared(const SearchSpace& d) {
  if (d.size() != 4 || d[0].name != "lr" || d[1].name != "weight_decay" ||
      d[2].name != "optimizer" || d[3].name != "batch_size")
    throw ConfigError("HPO space must declare lr, weight_decay, optimizer, batch_size in order");
  if (!d[0].is_continuous() || d[1].kind != VariableKind::discrete_set ||
      d[2].kind != VariableKind::categorical || d[3].kind != VariableKind::discrete_set)
    throw ConfigError(
        "HPO space kinds must be continuous, discrete_set, categorical, discrete_set");
  HpoSettings s;
  s.lr_lower = d[0].lower;
  s.lr_upper = d[0].upper;
  s.lr_initial = d[0].initial;
  s.weight_decays = d[1].values;
  s.weight_decay_initial = d[1].initial;
  s.optimizers = d[2].labels;
  s.optimizer_initial = d[2].labels.at(static_cast<std::size_t>(d[2].initial));
  s.batch_sizes = d[3].values;
  s.batch_size_initial = d[3].initial;
  return hpo_space(s);
}

SearchSpace hpo_wire_space(const SearchSpace& engine_space) {
  check_engine_space(engine_space);
  double hi = 0.0;
  for (const auto& name : engine_space[2].labels)
    hi = std::max(hi, effective_lr(name, std::pow(10.0, engine_space[0].upper)));
  return SearchSpace({
      VariableSpec::continuous("lr", 0.0, 2.0 * hi, 0.0),
      engine_space[1],
      engine_space[2],
      engine_space[3],
  });
}

HpoChoice decode(const SearchSpace& space, const Point& p) {
  check_engine_space(space);
  if (!validate(space, p)) throw BoundsError("HPO point is not valid");
  HpoChoice c;
  c.sampled_lr = std::pow(10.0, p[0]);
  c.optimizer_index = static_cast<std::size_t>(p[2]);
  c.optimizer = space[2].labels[c.optimizer_index];
  c.effective_lr = effective_lr(c.optimizer, c.sampled_lr);
  c.weight_decay = p[1];
  c.batch_size = p[3];
  return c;
}

Point to_wire(const SearchSpace& space, const Point& p) {
  const auto c = decode(space, p);
  return {c.effective_lr, c.weight_decay, static_cast<double>(c.optimizer_index),
          c.batch_size};
}

HpoReport run_hpo(const SearchSpace& space, const AggregateEvaluator& accuracy,
                  const EngineOptions& options) {
  check_engine_space(space);
  if (!accuracy) throw ConfigError("HPO needs an accuracy blackbox");

  OptimizationProblem opt;
  opt.space = space;
  opt.sense = Sense::maximize;
  opt.options = options;
  opt.constraint_count = 0;
  opt.evaluator = [&](const Point& p) {
    const auto agg = accuracy(to_wire(space, p));
    EvalResult r = agg.ok() ? EvalResult::success(agg.mean_objective)
                            : EvalResult::failure(agg.message, agg.status);
    r.wall_time = agg.wall_time;
    return r;
  };

  HpoReport report;
  report.space = space;
  report.result = optimize(opt);
  const auto& records = report.result.history.records();
  report.initial = decode(space, records.front().point);
  report.initial_accuracy = records.front().result.objective;
  report.best = decode(space, report.result.incumbent.point);
  report.best_accuracy = report.result.incumbent.result.objective;
  report.improvement = report.best_accuracy - report.initial_accuracy;
  return report;
}

void write_hpo_report(std::ostream& out, const HpoReport& r) {
  const auto& res = r.result;
  auto choice = [&](std::string_view prefix, const HpoChoice& c) {
    fmt::print(out, "{}_sampled_lr = {}\n", prefix, c.sampled_lr);
    fmt::print(out, "{}_effective_lr = {}\n", prefix, c.effective_lr);
    fmt::print(out, "{}_weight_decay = {}\n", prefix, c.weight_decay);
    fmt::print(out, "{}_optimizer = {}\n", prefix, c.optimizer);
    fmt::print(out, "{}_optimizer_index = {}\n", prefix, c.optimizer_index);
    fmt::print(out, "{}_batch_size = {}\n", prefix, c.batch_size);
  };
  fmt::print(out, "[hpo]\n");
  choice("best", r.best);
  fmt::print(out, "best_accuracy = {}\n", r.best_accuracy);
  fmt::print(out, "best_eval_id = {}\n", res.incumbent.eval_id);
  choice("initial", r.initial);
  fmt::print(out, "initial_accuracy = {}\n", r.initial_accuracy);
  fmt::print(out, "improvement = {}\n", r.improvement);
  fmt::print(out, "evaluations = {}\n", res.history.size());
  fmt::print(out, "iterations = {}\n", res.trace.size());
  fmt::print(out, "stop_reason = {}\n", to_string(res.stop_reason));
}

}  // namespace meshnas
