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

#include <atomic>
#include <map>
#include <sstream>

#include "meshnas/errors.hpp"
#include "meshnas/nas.hpp"
#include "meshnas/surrogates.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace meshnas;

namespace {

NasProblem surrogate_problem(Family family = Family::resnet18) {
  NasProblem p;
  p.family = family;
  p.accuracy = make_surrogate_evaluator(default_surrogate(SurrogateKind::nas_accuracy), {0});
  return p;
}

AggregateEvaluator step_accuracy(std::function<bool(const Point&)> feasible) {
  return [feasible](const Point& phi) {
    return aggregate({EvalResult::success(feasible(phi) ? 77.0 : 70.0)});
  };
}

}  // namespace

TEST_CASE("problem validation") {
  auto p = surrogate_problem();
  CHECK_NOTHROW(p.validate());
  p.width_bounds = {1.1, 2.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = surrogate_problem();
  p.epsilon = -0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = surrogate_problem();
  p.accuracy = nullptr;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(surrogate_problem().baseline_accuracy(), BaselineError);
}

TEST_CASE("measure_baseline") {
  auto p = surrogate_problem();
  p.accuracy = make_surrogate_evaluator(default_surrogate(SurrogateKind::constant), {0});
  CHECK(measure_baseline(p) == 77.0);
  CHECK(p.baseline_accuracy() == 77.0);

  auto q = surrogate_problem();
  q.accuracy = make_surrogate_evaluator(default_surrogate(SurrogateKind::nas_accuracy), {4, 4, 4});
  CHECK(measure_baseline(q) == eval_surrogate(default_surrogate(SurrogateKind::nas_accuracy),
                                              {1, 1, 1}, 4)
                                   .objective);

  auto failing = surrogate_problem();
  BlackboxConfig cfg;
  cfg.command_template = "cat {input} >/dev/null; exit 1";
  cfg.timeout = 10;
  failing.accuracy = make_blackbox_evaluator(cfg, nas_space(failing));
  CHECK_THROWS_AS(measure_baseline(failing), BaselineError);

  auto out_of_range = surrogate_problem();
  out_of_range.accuracy = [](const Point&) { return aggregate({EvalResult::success(150.0)}); };
  CHECK_THROWS_AS(measure_baseline(out_of_range), BaselineError);
  out_of_range.accuracy = [](const Point&) { return aggregate({EvalResult::success(0.0)}); };
  CHECK_THROWS_AS(measure_baseline(out_of_range), BaselineError);
}

TEST_CASE("objective and constraint") {
  auto p = surrogate_problem();
  p.epsilon = 0.5;
  measure_baseline(p);
  const auto b_mac = static_cast<double>(mac_count(baseline(Family::resnet18)));

  auto r = nas_objective_and_constraint(p, {1, 1, 1});
  REQUIRE(r.ok());
  CHECK(r.objective == b_mac);
  CHECK(r.constraints == std::vector<double>{-0.5});
  CHECK(r.feasible());

  r = nas_objective_and_constraint(p, {1, 0.73, 1.18});
  CHECK(std::abs(r.objective / b_mac - 0.78) <= 0.03);

  auto q = surrogate_problem();
  q.accuracy = step_accuracy([](const Point& phi) { return phi == Point{1, 1, 1}; });
  measure_baseline(q);
  r = nas_objective_and_constraint(q, {1, 0.5, 1});
  CHECK(r.constraints == std::vector<double>{7.0});
  CHECK_FALSE(r.feasible());

  q.accuracy = [](const Point&) { return aggregate({EvalResult::failure("x")}); };
  CHECK(nas_objective_and_constraint(q, {1, 0.5, 1}).status == EvalStatus::failed);
}

TEST_CASE("run_nas on the nas_accuracy fixture matches the grid optimum") {
  for (auto family : {Family::resnet18, Family::senet18}) {
    auto p = surrogate_problem(family);
    EngineOptions opts;
    opts.max_evaluations = 400;
    const auto report = run_nas(p, opts);
    const auto grid = meshnas::testing::nas_grid_optimum(family);
    CAPTURE(to_string(family));
    CAPTURE(report.best.depth);
    CAPTURE(report.best.width);
    CAPTURE(report.best.resolution);

    const auto& inc = report.result.incumbent;
    REQUIRE(inc.result.feasible());
    CHECK(report.best.width < 1.0);
    CHECK(report.ratios.mac_ratio < 1.0);
    CHECK(report.best_macs <= report.baseline_macs);

    // One final mesh cell up along each axis bounds the MAC slack.
    const auto& mesh = report.result.final_mesh;
    Point up = inc.point;
    for (std::size_t i = 0; i < 3; ++i) up[i] = std::min(2.0, up[i] + mesh.mesh[i]);
    const auto base = baseline(family);
    const auto cell = mac_count(scale(base, {up[0], up[1], up[2]})) - report.best_macs;
    CHECK(report.best_macs <= grid.macs + cell);
    CHECK(std::abs(inc.result.constraints[0] - grid.constraint) <= 1e-9);
  }
}

TEST_CASE("a binding constraint keeps the baseline") {
  auto p = surrogate_problem();
  p.accuracy = step_accuracy([](const Point& phi) { return phi == Point{1, 1, 1}; });
  EngineOptions opts;
  opts.max_evaluations = 150;
  const auto report = run_nas(p, opts);
  CHECK(report.result.incumbent.point == Point{1, 1, 1});
  CHECK(report.ratios.mac_ratio == 1.0);
  CHECK(report.best_accuracy == 77.0);
}

TEST_CASE("a width-67% senet18 outcome is a valid report") {
  auto p = surrogate_problem(Family::senet18);
  p.accuracy = step_accuracy(
      [](const Point& phi) { return phi[0] >= 1.0 && phi[1] >= 0.67 && phi[2] >= 1.0; });
  EngineOptions opts;
  opts.max_evaluations = 500;
  const auto report = run_nas(p, opts);
  const auto target = scale(baseline(Family::senet18), {1, 0.67, 1});
  CHECK(report.best_macs == mac_count(target));
  CHECK(report.descriptor == target);
  CHECK(report.ratios.param_ratio >= 0.67 * 0.67);
  CHECK(report.ratios.param_ratio <= 0.67);
  std::ostringstream out;
  write_nas_report(out, report);
  CHECK(out.str().find("family = senet18") != std::string::npos);
  CHECK(out.str().find("stage4 = blocks:2 channels:343 stride:2") != std::string::npos);
}

TEST_CASE("history objectives equal independently recomputed MAC counts") {
  auto p = surrogate_problem();
  EngineOptions opts;
  opts.max_evaluations = 120;
  const auto report = run_nas(p, opts);
  for (const auto& rec : report.result.history.records()) {
    REQUIRE(rec.result.ok());
    const auto a = scale(baseline(Family::resnet18), to_multipliers(rec.point));
    CHECK(rec.result.objective == static_cast<double>(mac_count(a)));
  }
}

TEST_CASE("the baseline is evaluated exactly once") {
  std::atomic<int> at_start{0}, total{0};
  auto p = surrogate_problem();
  auto inner = p.accuracy;
  p.accuracy = [&](const Point& phi) {
    ++total;
    if (phi == Point{1, 1, 1}) ++at_start;
    return inner(phi);
  };
  EngineOptions opts;
  opts.max_evaluations = 60;
  const auto report = run_nas(p, opts);
  CHECK(at_start == 1);
  CHECK(static_cast<std::size_t>(total.load()) == report.result.history.size());
  CHECK(report.result.history.records().front().point == Point{1, 1, 1});
}

TEST_CASE("epsilon slack widens the feasible region") {
  auto strict = surrogate_problem();
  auto loose = surrogate_problem();
  loose.epsilon = 5.0;
  EngineOptions opts;
  opts.max_evaluations = 300;
  const auto a = run_nas(strict, opts);
  const auto b = run_nas(loose, opts);
  CHECK(b.best_macs < a.best_macs);
  CHECK(b.best_accuracy >= 77.0 - 5.0 - 1e-9);
}
