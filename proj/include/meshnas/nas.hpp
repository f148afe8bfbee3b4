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

// Architecture search: minimize the MAC count of the scaled network subject
// to mean blackbox accuracy >= baseline accuracy - epsilon.

#include <iosfwd>
#include <optional>

#include "meshnas/arch_model.hpp"
#include "meshnas/blackbox.hpp"
#include "meshnas/mads.hpp"

namespace meshnas {

struct NasProblem {
  Family family = Family::resnet18;
  MultiplierBounds depth_bounds;
  MultiplierBounds width_bounds;
  MultiplierBounds resolution_bounds;
  double epsilon = 0.0;  // accuracy slack, percent
  // Receives the point (depth, width, resolution).
  AggregateEvaluator accuracy;
  // Filled by measure_baseline.
  std::optional<AggregatedEval> baseline;

  double baseline_accuracy() const;  // throws BaselineError when unmeasured
  void validate() const;             // throws ConfigError
};

// depth, width, resolution as continuous variables starting at 1.
SearchSpace nas_space(const NasProblem& problem);

// Evaluates accuracy at (1,1,1) and stores it. Throws BaselineError when the
// aggregate fails or the accuracy is outside (0, 100].
double measure_baseline(NasProblem& problem);

ScalingMultipliers to_multipliers(const Point& phi);

// objective = MAC count of the scaled family, constraint = (f0 - eps) - f.
EvalResult nas_objective_and_constraint(const NasProblem& problem, const Point& phi);

struct NasReport {
  Family family = Family::resnet18;
  double baseline_accuracy = 0.0;
  double epsilon = 0.0;
  ScalingMultipliers best;
  ArchDescriptor descriptor;
  double best_accuracy = 0.0;
  std::uint64_t baseline_macs = 0;
  std::uint64_t baseline_params = 0;
  std::uint64_t best_macs = 0;
  std::uint64_t best_params = 0;
  CostRatios ratios;
  SearchSpace space;
  OptimizationResult result;
};

// Measures the baseline first when needed; the baseline result becomes the
// engine's initial evaluation, so the blackbox runs at (1,1,1) only once.
NasReport run_nas(NasProblem& problem, const EngineOptions& options);

void write_nas_report(std::ostream& out, const NasReport& report);

}  // namespace meshnas
