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

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "meshnas/errors.hpp"
#include "meshnas/hpo.hpp"
#include "meshnas/surrogates.hpp"

using namespace meshnas;

namespace {

AggregateEvaluator fixture_accuracy() {
  return make_surrogate_evaluator(default_surrogate(SurrogateKind::hpo_accuracy), {0});
}

EngineOptions budget(std::size_t n) {
  EngineOptions o;
  o.max_evaluations = n;
  return o;
}

}  // namespace

TEST_CASE("effective learning rate") {
  CHECK(effective_lr("SGD", 0.042) == 0.042);
  CHECK(effective_lr("Adam", 0.1) == doctest::Approx(0.01));
  CHECK(effective_lr("Adadelta", 0.1) == doctest::Approx(1.0));
  CHECK(effective_lr("ASGD", 0.1) == doctest::Approx(0.01));
  CHECK(effective_lr("Adamax", 0.5) == doctest::Approx(0.01));
  CHECK_THROWS_AS(effective_lr("RMSprop", 0.1), ConfigError);
  CHECK_THROWS_AS(reference_lr("sgd"), ConfigError);

  for (int k = 0; k <= 1000; ++k) {
    const double lr = 1e-3 + (0.6 - 1e-3) * k / 1000.0;
    CHECK(effective_lr("SGD", lr) == lr);
  }
  for (const auto& ref : kOptimizerTable) {
    CHECK(ref.reference_lr > 0);
    const double a = effective_lr(ref.name, 0.001);
    const double b = effective_lr(ref.name, 0.3);
    const double c = effective_lr(ref.name, 0.6);
    CHECK(b == doctest::Approx(300 * a));
    CHECK(c == doctest::Approx(600 * a));
    CHECK(a == doctest::Approx(0.001 * ref.reference_lr / 0.1));
  }
}

TEST_CASE("engine space layout") {
  const auto s = hpo_space();
  REQUIRE(s.size() == 4);
  CHECK(s[0].name == "log10_lr");
  CHECK(s[0].lower == doctest::Approx(-3.0));
  CHECK(s[0].upper == doctest::Approx(std::log10(0.6)));
  CHECK(s[1].values == std::vector<double>{0, 5e-5, 5e-4, 5e-3, 5e-2, 0.5});
  CHECK(s[2].labels == std::vector<std::string>{"Adadelta", "Adagrad", "SGD", "Adam", "AdamW",
                                                "Adamax", "ASGD"});
  CHECK(s[3].values == std::vector<double>{128, 256, 512});

  const auto c = decode(s, s.initial_point());
  CHECK(c.sampled_lr == doctest::Approx(0.1));
  CHECK(c.weight_decay == 5e-4);
  CHECK(c.optimizer == "SGD");
  CHECK(c.optimizer_index == 2);
  CHECK(c.batch_size == 128);

  const auto wire = to_wire(s, {std::log10(0.1), 5e-4, 3, 256});
  CHECK(wire[0] == doctest::Approx(0.01));
  CHECK(wire[2] == 3);
  CHECK(validate(hpo_wire_space(s), wire));
}

TEST_CASE("declared spaces") {
  SearchSpace declared({VariableSpec::continuous("lr", 1e-3, 0.6, 0.1),
                        VariableSpec::discrete_set("weight_decay", {0, 5e-4}, 5e-4),
                        VariableSpec::categorical("optimizer", {"SGD", "Adam"}, "Adam"),
                        VariableSpec::discrete_set("batch_size", {64, 128}, 64)});
  const auto s = hpo_space_from_declared(declared);
  CHECK(s[2].labels == std::vector<std::string>{"SGD", "Adam"});
  CHECK(decode(s, s.initial_point()).optimizer == "Adam");

  SearchSpace wrong_order({declared[1], declared[0], declared[2], declared[3]});
  CHECK_THROWS_AS(hpo_space_from_declared(wrong_order), ConfigError);
  SearchSpace bad_opt({declared[0], declared[1],
                       VariableSpec::categorical("optimizer", {"SGD", "Lion"}, "SGD"),
                       declared[3]});
  CHECK_THROWS_AS(hpo_space_from_declared(bad_opt), ConfigError);
  CHECK_THROWS_AS(hpo_wire_space(declared), ConfigError);
}

TEST_CASE("run_hpo recovers the fixture optimum") {
  const auto space = hpo_space();
  const auto report = run_hpo(space, fixture_accuracy(), budget(400));
  CHECK(report.best.weight_decay == 0.005);
  CHECK(report.best.optimizer == "SGD");
  CHECK(report.best.batch_size == 512);
  CHECK(std::abs(report.best.effective_lr - 0.042) < 5e-3);
  CHECK(std::abs(report.best_accuracy - 87.8) < 0.1);
  CHECK(report.improvement == doctest::Approx(report.best_accuracy - report.initial_accuracy));

  // Brute force: every discrete combination times a fine lr line search.
  const auto spec = default_surrogate(SurrogateKind::hpo_accuracy);
  double best = -1e300;
  HpoChoice arg;
  for (double wd : space[1].values)
    for (std::size_t o = 0; o < space[2].labels.size(); ++o)
      for (double b : space[3].values)
        for (int k = 0; k <= 4000; ++k) {
          const double log_lr = std::min(
              space[0].upper, space[0].lower + (space[0].upper - space[0].lower) * k / 4000);
          const auto c = decode(space, {log_lr, wd, double(o), b});
          const double v =
              eval_surrogate(spec, {c.effective_lr, wd, double(o), b}, 0).objective;
          if (v > best) {
            best = v;
            arg = c;
          }
        }
  CHECK(report.best.weight_decay == arg.weight_decay);
  CHECK(report.best.optimizer_index == arg.optimizer_index);
  CHECK(report.best.batch_size == arg.batch_size);
  CHECK(report.best_accuracy >= best - 1e-4);
}

TEST_CASE("constant accuracy keeps the initial point") {
  const auto space = hpo_space();
  const auto report = run_hpo(
      space, make_surrogate_evaluator(default_surrogate(SurrogateKind::constant), {0}),
      budget(200));
  CHECK(report.result.incumbent.point == space.initial_point());
  CHECK(report.improvement == 0.0);
}

TEST_CASE("improvement field") {
  const auto space = hpo_space();
  AggregateEvaluator acc = [](const Point& wire) {
    return aggregate({EvalResult::success(wire[3] == 512 ? 87.8 : 86.7)});
  };
  const auto report = run_hpo(space, acc, budget(100));
  CHECK(report.initial_accuracy == 86.7);
  CHECK(report.best_accuracy == 87.8);
  CHECK(report.improvement == doctest::Approx(1.1));
}

TEST_CASE("report is consistent with history and every point is legal") {
  const auto space = hpo_space();
  const auto report = run_hpo(space, fixture_accuracy(), budget(250));
  const std::set<double> wds{0, 5e-5, 5e-4, 5e-3, 5e-2, 0.5};
  const std::set<double> batches{128, 256, 512};
  double best = -1e300;
  std::size_t best_id = 0;
  for (const auto& rec : report.result.history.records()) {
    const auto c = decode(space, rec.point);
    CHECK(wds.count(c.weight_decay) == 1);
    CHECK(c.optimizer_index <= 6);
    CHECK(batches.count(c.batch_size) == 1);
    CHECK(c.sampled_lr >= 1e-3 * (1 - 1e-12));
    CHECK(c.sampled_lr <= 0.6 * (1 + 1e-12));
    if (rec.result.ok() && rec.result.objective > best) {
      best = rec.result.objective;
      best_id = rec.eval_id;
    }
  }
  CHECK(report.best_accuracy == best);
  CHECK(report.result.incumbent.eval_id == best_id);
  std::ostringstream out;
  write_hpo_report(out, report);
  CHECK(out.str().find("best_optimizer = SGD") != std::string::npos);
}

TEST_CASE("failed initial evaluation") {
  AggregateEvaluator acc = [](const Point&) { return aggregate({EvalResult::failure("x")}); };
  CHECK_THROWS_AS(run_hpo(hpo_space(), acc, budget(10)), InfeasibleStartError);
  CHECK_THROWS_AS(run_hpo(hpo_space(), nullptr, budget(10)), ConfigError);
}
