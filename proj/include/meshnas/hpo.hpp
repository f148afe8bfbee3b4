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

// Hyperparameter search: maximize mean blackbox accuracy over
// (learning rate, weight decay, optimizer, batch size).
//
// The engine sees the learning rate as log10(lr). The blackbox receives the
// effective learning rate lr * ref(optimizer) / ref(SGD), the weight decay
// value, the optimizer index and the batch size.

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>

#include "meshnas/blackbox.hpp"
#include "meshnas/mads.hpp"

namespace meshnas {

struct OptimizerRef {
  std::string_view name;
  double reference_lr;
};

// Declaration order of the optimizer variable. The ASGD rate of 0.01 is a
// chosen default.
inline constexpr std::array<OptimizerRef, 7> kOptimizerTable{{
    {"Adadelta", 1.0},
    {"Adagrad", 0.01},
    {"SGD", 0.1},
    {"Adam", 0.01},
    {"AdamW", 0.01},
    {"Adamax", 0.002},
    {"ASGD", 0.01},
}};

// Throws ConfigError for unknown optimizers.
double reference_lr(std::string_view optimizer);
double effective_lr(std::string_view optimizer, double sampled_lr);

struct HpoSettings {
  double lr_lower = 1e-3;
  double lr_upper = 0.6;
  double lr_initial = 0.1;
  std::vector<double> weight_decays{0.0, 5e-5, 5e-4, 5e-3, 5e-2, 0.5};
  double weight_decay_initial = 5e-4;
  std::vector<std::string> optimizers{"Adadelta", "Adagrad", "SGD", "Adam",
                                      "AdamW",    "Adamax",  "ASGD"};
  std::string optimizer_initial = "SGD";
  std::vector<double> batch_sizes{128, 256, 512};
  double batch_size_initial = 128;
};

// Engine space: log10_lr, weight_decay, optimizer, batch_size.
SearchSpace hpo_space(const HpoSettings& settings = {});

// Accepts a space declared with a native `lr` variable (as in the run
// configuration) and converts it to the engine space. Throws ConfigError
// unless the variables are exactly lr, weight_decay, optimizer, batch_size
// in that order with the expected kinds.
SearchSpace hpo_space_from_declared(const SearchSpace& declared);

// Space describing the wire point (effective lr, wd, optimizer index, batch).
SearchSpace hpo_wire_space(const SearchSpace& engine_space);

struct HpoChoice {
  double sampled_lr = 0.0;
  double effective_lr = 0.0;
  double weight_decay = 0.0;
  std::size_t optimizer_index = 0;
  std::string optimizer;
  double batch_size = 0.0;
};

HpoChoice decode(const SearchSpace& engine_space, const Point& p);
Point to_wire(const SearchSpace& engine_space, const Point& p);

struct HpoReport {
  HpoChoice best;
  HpoChoice initial;
  double best_accuracy = 0.0;
  double initial_accuracy = 0.0;
  double improvement = 0.0;
  SearchSpace space;
  OptimizationResult result;
};

// `accuracy` receives wire points. Throws InfeasibleStartError when the
// initial evaluation fails.
HpoReport run_hpo(const SearchSpace& engine_space, const AggregateEvaluator& accuracy,
                  const EngineOptions& options);

void write_hpo_report(std::ostream& out, const HpoReport& report);

}  // namespace meshnas
