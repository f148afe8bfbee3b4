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

// Analytic blackboxes with known optima. The nas_accuracy and hpo_accuracy
// constants are constructed fixtures, not training results.

#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "meshnas/blackbox.hpp"
#include "meshnas/eval_result.hpp"
#include "meshnas/search_space.hpp"

namespace meshnas {

enum class SurrogateKind { quadratic, nas_accuracy, hpo_accuracy, constant, failing };

std::string_view to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(std::string_view text);

// a^T x - rhs <= 0, reported as the value a^T x - rhs.
struct LinearConstraint {
  std::vector<double> a;
  double rhs = 0.0;
};

// acc = peak * min(1, width_base + width_slope*w) * min(1, res_base + res_slope*r)
// over the point (depth, width, resolution).
struct NasAccuracyParams {
  double peak = 77.0;
  double width_base = 0.6;
  double width_slope = 0.5;
  double res_base = 0.8;
  double res_slope = 0.2;
};

// acc = peak - lr_curvature*(lr - lr_opt)^2 - wd_penalty*[wd != wd_opt]
//       - optimizer_penalty*[opt != optimizer_opt] - batch_penalty*[bs != batch_opt]
// over the wire point (effective lr, weight decay, optimizer index, batch size).
struct HpoAccuracyParams {
  double peak = 87.8;
  double lr_opt = 0.042;
  double lr_curvature = 40.0;
  double wd_opt = 0.005;
  double wd_penalty = 10.0;
  double optimizer_opt = 2.0;  // SGD in the default optimizer order
  double optimizer_penalty = 2.0;
  double batch_opt = 512.0;
  double batch_penalty = 1.0;
};

struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::constant;
  // quadratic: sum a_i (x_i - c_i)^2 + offset
  std::vector<double> coefficients;
  std::vector<double> center;
  std::vector<LinearConstraint> constraints;
  // constant value, and the value a failing surrogate prints when it does
  // not fail
  double offset = 0.0;
  NasAccuracyParams nas;
  HpoAccuracyParams hpo;
  double fail_probability = 1.0;
  double noise_sigma = 0.0;
  // When false the noise stream ignores the seed and depends only on the
  // point.
  bool seed_dependent = true;
};

// Throws DimensionError when the point does not fit the surrogate.
EvalResult eval_surrogate(const SurrogateSpec& spec, const std::vector<double>& p,
                          std::int64_t seed);

// Throws ConfigError on unknown keys or malformed values.
SurrogateSpec surrogate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SurrogateSpec& spec);

// Default spec for each kind (constant 77.0, the fixture constants above,
// a unit 3-D quadratic centred at 0, always-failing).
SurrogateSpec default_surrogate(SurrogateKind kind);

// In-process equivalent of running the surrogate through the protocol once
// per seed and aggregating.
AggregateEvaluator make_surrogate_evaluator(SurrogateSpec spec, std::vector<std::int64_t> seeds);

}  // namespace meshnas
