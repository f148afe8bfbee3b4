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

#include <algorithm>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace meshnas {

enum class EvalStatus { ok, failed, timeout };

std::string_view to_string(EvalStatus status);

// Outcome of one blackbox invocation. When status != ok the objective and
// constraints carry no meaning. A point is feasible iff every constraint is
// <= 0.
struct EvalResult {
  EvalStatus status = EvalStatus::failed;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> constraints;
  double wall_time = 0.0;
  std::string message;

  bool ok() const { return status == EvalStatus::ok; }
  bool feasible() const {
    return ok() && std::all_of(constraints.begin(), constraints.end(),
                               [](double c) { return c <= 0.0; });
  }

  static EvalResult success(double objective, std::vector<double> constraints = {}) {
    EvalResult r;
    r.status = EvalStatus::ok;
    r.objective = objective;
    r.constraints = std::move(constraints);
    return r;
  }
  static EvalResult failure(std::string message, EvalStatus status = EvalStatus::failed) {
    EvalResult r;
    r.status = status;
    r.message = std::move(message);
    return r;
  }
};

}  // namespace meshnas
