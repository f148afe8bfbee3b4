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

#include "meshnas/nas.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "meshnas/errors.hpp"

namespace meshnas {

namespace {

MultiplierBounds envelope(const NasProblem& p) {
  return {std::min({p.depth_bounds.lower, p.width_bounds.lower, p.resolution_bounds.lower}),
          std::max({p.depth_bounds.upper, p.width_bounds.upper, p.resolution_bounds.upper})};
}

EvalResult combine(const NasProblem& problem, const Point& phi, const AggregatedEval& acc) {
  const auto arch = scale(baseline(problem.family), to_multipliers(phi), envelope(problem));
  if (!acc.ok()) {
    EvalResult r = EvalResult::failure(acc.message, acc.status);
    r.wall_time = acc.wall_time;
    return r;
  }
  const double f0 = problem.baseline_accuracy();
  EvalResult r = EvalResult::success(static_cast<double>(mac_count(arch)),
                                     {(f0 - problem.epsilon) - acc.mean_objective});
  r.wall_time = acc.wall_time;
  return r;
}

}  // namespace

double NasProblem::baseline_accuracy() const {
  if (!baseline || !baseline->ok()) throw BaselineError("baseline accuracy not measured");
  return baseline->mean_objective;
}

void NasProblem::validate() const {
  for (const auto* b : {&depth_bounds, &width_bounds, &resolution_bounds}) {
    if (!(b->lower > 0.0) || !(b->lower < b->upper) || !std::isfinite(b->upper))
      throw ConfigError("multiplier bounds need 0 < lower < upper");
    if (b->lower > 1.0 || b->upper < 1.0)
      throw ConfigError("multiplier bounds must contain 1");
  }
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (!accuracy) throw ConfigError("NAS problem has no accuracy blackbox");
}

SearchSpace nas_space(const NasProblem& p) {
  return SearchSpace({
      VariableSpec::continuous("depth", p.depth_bounds.lower, p.depth_bounds.upper, 1.0),
      VariableSpec::continuous("width", p.width_bounds.lower, p.width_bounds.upper, 1.0),
      VariableSpec::continuous("resolution", p.resolution_bounds.lower,
                               p.resolution_bounds.upper, 1.0),
  });
}

double measure_baseline(NasProblem& problem) {
  problem.validate();
  AggregatedEval agg = problem.accuracy(Point{1.0, 1.0, 1.0});
  if (!agg.ok())
    throw BaselineError(fmt::format("baseline evaluation failed: {}", agg.message));
  if (!(agg.mean_objective > 0.0 && agg.mean_objective <= 100.0))
    throw BaselineError(
        fmt::format("baseline accuracy {} outside (0, 100]", agg.mean_objective));
  problem.baseline = std::move(agg);
  return problem.baseline->mean_objective;
}

ScalingMultipliers to_multipliers(const Point& phi) {
  if (phi.size() != 3) throw DimensionError("NAS point needs (depth, width, resolution)");
  return {phi[0], phi[1], phi[2]};
}

EvalResult nas_objective_and_constraint(const NasProblem& problem, const Point& phi) {
  return combine(problem, phi, problem.accuracy(phi));
}

NasReport run_nas(NasProblem& problem, const EngineOptions& options) {
  problem.validate();
  if (!problem.baseline) measure_baseline(problem);

  OptimizationProblem opt;
  opt.space = nas_space(problem);
  opt.sense = Sense::minimize;
  opt.options = options;
  opt.constraint_count = 1;
  opt.evaluator = [&problem](const Point& phi) {
    return nas_objective_and_constraint(problem, phi);
  };
  opt.initial_result = combine(problem, opt.space.initial_point(), *problem.baseline);

  NasReport report;
  report.family = problem.family;
  report.baseline_accuracy = problem.baseline_accuracy();
  report.epsilon = problem.epsilon;
  report.space = opt.space;
  report.result = optimize(opt);

  const auto& inc = report.result.incumbent;
  report.best = to_multipliers(inc.point);
  report.descriptor = scale(baseline(problem.family), report.best, envelope(problem));
  const auto base = baseline(problem.family);
  report.baseline_macs = mac_count(base);
  report.baseline_params = param_count(base);
  report.best_macs = mac_count(report.descriptor);
  report.best_params = param_count(report.descriptor);
  report.ratios = ratios(base, report.descriptor);
  report.best_accuracy =
      (report.baseline_accuracy - problem.epsilon) - inc.result.constraints.at(0);
  return report;
}

void write_nas_report(std::ostream& out, const NasReport& r) {
  const auto& res = r.result;
  fmt::print(out, "[nas]\n");
  fmt::print(out, "family = {}\n", to_string(r.family));
  fmt::print(out, "baseline_accuracy = {}\n", r.baseline_accuracy);
  fmt::print(out, "epsilon = {}\n", r.epsilon);
  fmt::print(out, "best_depth = {}\n", r.best.depth);
  fmt::print(out, "best_width = {}\n", r.best.width);
  fmt::print(out, "best_resolution = {}\n", r.best.resolution);
  fmt::print(out, "best_accuracy = {}\n", r.best_accuracy);
  fmt::print(out, "best_constraint = {}\n", res.incumbent.result.constraints.at(0));
  fmt::print(out, "best_eval_id = {}\n", res.incumbent.eval_id);
  fmt::print(out, "baseline_macs = {}\n", r.baseline_macs);
  fmt::print(out, "baseline_params = {}\n", r.baseline_params);
  fmt::print(out, "best_macs = {}\n", r.best_macs);
  fmt::print(out, "best_params = {}\n", r.best_params);
  fmt::print(out, "mac_ratio = {:.6f}\n", r.ratios.mac_ratio);
  fmt::print(out, "param_ratio = {:.6f}\n", r.ratios.param_ratio);
  fmt::print(out, "evaluations = {}\n", res.history.size());
  fmt::print(out, "iterations = {}\n", res.trace.size());
  fmt::print(out, "stop_reason = {}\n", to_string(res.stop_reason));
  fmt::print(out, "\n[descriptor]\n");
  fmt::print(out, "input_resolution = {}\n", r.descriptor.input_resolution);
  fmt::print(out, "stem_channels = {}\n", r.descriptor.stem.out_channels);
  for (std::size_t s = 0; s < r.descriptor.stages.size(); ++s) {
    const auto& st = r.descriptor.stages[s];
    fmt::print(out, "stage{} = blocks:{} channels:{} stride:{}\n", s + 1, st.block_count,
               st.out_channels, st.first_stride);
  }
}

}  // namespace meshnas
