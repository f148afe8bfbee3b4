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

#include <charconv>
#include <cmath>

#include "meshnas/errors.hpp"
#include "meshnas/mads.hpp"
#include "meshnas/surrogates.hpp"
#include "support.hpp"

using namespace meshnas;
using nlohmann::json;

TEST_CASE("quadratic") {
  SurrogateSpec s;
  s.kind = SurrogateKind::quadratic;
  s.coefficients = {1, 1};
  s.center = {1, -2};
  CHECK(eval_surrogate(s, {1, -2}, 0).objective == 0.0);
  CHECK(eval_surrogate(s, {0, 0}, 0).objective == 5.0);
  s.offset = 2.5;
  s.constraints = {{{1, 0}, 0.5}};
  auto r = eval_surrogate(s, {1, -2}, 0);
  CHECK(r.objective == 2.5);
  CHECK(r.constraints == std::vector<double>{0.5});
  CHECK_FALSE(r.feasible());
  CHECK_THROWS_AS(eval_surrogate(s, {1}, 0), DimensionError);
}

TEST_CASE("constant and defaults") {
  auto c = default_surrogate(SurrogateKind::constant);
  CHECK(eval_surrogate(c, {0.3}, 4).objective == 77.0);
  CHECK(eval_surrogate(c, {1, 2, 3, 4, 5}, 9).objective == 77.0);
  auto q = default_surrogate(SurrogateKind::quadratic);
  CHECK(q.coefficients.size() == 3);
  CHECK(surrogate_kind_from_string("hpo_accuracy") == SurrogateKind::hpo_accuracy);
  CHECK_THROWS_AS(surrogate_kind_from_string("cubic"), ConfigError);
}

TEST_CASE("nas_accuracy fixture") {
  auto s = default_surrogate(SurrogateKind::nas_accuracy);
  CHECK(eval_surrogate(s, {1, 1, 1}, 0).objective == 77.0);
  CHECK(eval_surrogate(s, {0.3, 0.8, 1.0}, 0).objective == 77.0);
  CHECK(eval_surrogate(s, {1, 0.6, 1}, 0).objective == doctest::Approx(77.0 * 0.9));
  CHECK(eval_surrogate(s, {1, 1, 0.5}, 0).objective == doctest::Approx(77.0 * 0.9));
  CHECK(eval_surrogate(s, {2, 2, 2}, 0).objective == 77.0);
  CHECK_THROWS_AS(eval_surrogate(s, {1, 1}, 0), DimensionError);
}

TEST_CASE("hpo_accuracy fixture") {
  auto s = default_surrogate(SurrogateKind::hpo_accuracy);
  CHECK(eval_surrogate(s, {0.042, 0.005, 2, 512}, 0).objective == 87.8);
  CHECK(eval_surrogate(s, {0.042, 0.005, 3, 512}, 0).objective == doctest::Approx(85.8));
  CHECK(eval_surrogate(s, {0.042, 0.0005, 2, 512}, 0).objective == doctest::Approx(77.8));
  CHECK(eval_surrogate(s, {0.042, 0.005, 2, 256}, 0).objective == doctest::Approx(86.8));
  CHECK(eval_surrogate(s, {0.142, 0.005, 2, 512}, 0).objective == doctest::Approx(87.4));

  // Exhaustive grid: the embedded optimum is the unique argmax.
  const std::vector<double> wds{0, 5e-5, 5e-4, 5e-3, 5e-2, 0.5};
  const std::vector<double> batches{128, 256, 512};
  double best = -1e9;
  std::vector<double> arg;
  for (int k = 0; k <= 6000; ++k) {
    const double lr = 1e-3 + (0.6 - 1e-3) * k / 6000.0;
    for (double wd : wds)
      for (int o = 0; o < 7; ++o)
        for (double b : batches) {
          const double v = eval_surrogate(s, {lr, wd, double(o), b}, 0).objective;
          if (v > best) {
            best = v;
            arg = {lr, wd, double(o), b};
          }
        }
  }
  CHECK(best == doctest::Approx(87.8).epsilon(1e-6));
  CHECK(std::abs(arg[0] - 0.042) < 1e-3);
  CHECK(arg[1] == 0.005);
  CHECK(arg[2] == 2);
  CHECK(arg[3] == 512);
}

TEST_CASE("failing surrogate") {
  auto s = default_surrogate(SurrogateKind::failing);
  for (int seed = 0; seed < 20; ++seed) CHECK(eval_surrogate(s, {1}, seed).status == EvalStatus::failed);
  s.fail_probability = 0.0;
  s.offset = 3.0;
  for (int seed = 0; seed < 20; ++seed) CHECK(eval_surrogate(s, {1}, seed).objective == 3.0);
  s.fail_probability = 0.5;
  int failures = 0;
  for (int seed = 0; seed < 2000; ++seed) failures += !eval_surrogate(s, {1}, seed).ok();
  CHECK(failures > 850);
  CHECK(failures < 1150);
  // The failure pattern depends on the seed only.
  for (int seed = 0; seed < 50; ++seed)
    CHECK(eval_surrogate(s, {1}, seed).ok() == eval_surrogate(s, {7, 8}, seed).ok());
}

TEST_CASE("noise") {
  auto s = default_surrogate(SurrogateKind::constant);
  s.offset = 0.0;
  s.noise_sigma = 2.0;
  CHECK(eval_surrogate(s, {0.5}, 3).objective == eval_surrogate(s, {0.5}, 3).objective);
  CHECK(eval_surrogate(s, {0.5}, 3).objective != eval_surrogate(s, {0.5}, 4).objective);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = eval_surrogate(s, {0.5}, i).objective;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.1);
  CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(2.0).epsilon(0.05));

  s.seed_dependent = false;
  CHECK(eval_surrogate(s, {0.5}, 3).objective == eval_surrogate(s, {0.5}, 4).objective);
  CHECK(eval_surrogate(s, {0.5}, 3).objective != eval_surrogate(s, {0.6}, 3).objective);
}

TEST_CASE("json round trip and strictness") {
  for (auto k : {SurrogateKind::quadratic, SurrogateKind::nas_accuracy,
                 SurrogateKind::hpo_accuracy, SurrogateKind::constant, SurrogateKind::failing}) {
    auto s = default_surrogate(k);
    s.noise_sigma = 0.25;
    auto back = surrogate_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
  }
  CHECK_THROWS_AS(surrogate_from_json(json{{"kind", "constant"}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(surrogate_from_json(json{{"offset", 1}}), ConfigError);
  CHECK_THROWS_AS(surrogate_from_json(json{{"kind", "constant"}, {"offset", "x"}}), ConfigError);
  CHECK_THROWS_AS(surrogate_from_json(json{{"kind", "constant"}, {"noise_sigma", -1}}),
                  ConfigError);
  CHECK_THROWS_AS(surrogate_from_json(json{{"kind", "failing"}, {"fail_probability", 2}}),
                  ConfigError);
  CHECK_THROWS_AS(surrogate_from_json(json{{"kind", "hpo_accuracy"}, {"hpo", {{"x", 1}}}}),
                  ConfigError);
  CHECK_THROWS_AS(surrogate_from_json(json::array()), ConfigError);
  auto s = surrogate_from_json(json::parse(R"({"kind": "quadratic", "coefficients": [2],
      "center": [0.5], "constraints": [{"a": [1], "rhs": 0.25}]})"));
  CHECK(eval_surrogate(s, {0.5}, 0).objective == 0.0);
  CHECK(eval_surrogate(s, {0.5}, 0).constraints == std::vector<double>{0.25});
}

TEST_CASE("aggregate evaluator") {
  auto s = default_surrogate(SurrogateKind::constant);
  s.offset = 77.0;
  s.noise_sigma = 1.0;
  auto eval = make_surrogate_evaluator(s, {1, 2, 3});
  auto agg = eval({0.0});
  REQUIRE(agg.ok());
  double mean = 0;
  for (int seed : {1, 2, 3}) mean += eval_surrogate(s, {0.0}, seed).objective;
  CHECK(agg.mean_objective == doctest::Approx(mean / 3));
  auto failing = make_surrogate_evaluator(default_surrogate(SurrogateKind::failing), {1});
  CHECK_FALSE(failing({0.0}).ok());
  auto bad_dim = make_surrogate_evaluator(default_surrogate(SurrogateKind::quadratic), {1});
  CHECK_FALSE(bad_dim({0.0}).ok());
  CHECK_THROWS_AS(make_surrogate_evaluator(s, {}), ConfigError);
}

TEST_CASE("subprocess values are bit-identical to in-process values") {
  meshnas::testing::TempDir dir;
  auto spec = default_surrogate(SurrogateKind::hpo_accuracy);
  spec.noise_sigma = 0.3;
  meshnas::testing::write_file(dir / "spec.json", to_json(spec).dump());
  meshnas::testing::write_file(dir / "p.txt", "0.0731 0.05 4 256\n");
  for (int seed : {0, 1, 17}) {
    const auto cmd = "surrogate --kind hpo_accuracy --spec " + (dir / "spec.json").string() +
                     " " + (dir / "p.txt").string() + " " + std::to_string(seed);
    const auto a = meshnas::testing::run_cli(cmd);
    const auto b = meshnas::testing::run_cli(cmd);
    REQUIRE(a.exit_code == 0);
    CHECK(a.stdout_text == b.stdout_text);
    const auto r = parse_output(a.stdout_text, 0, false);
    REQUIRE(r.ok());
    CHECK(r.objective == eval_surrogate(spec, {0.0731, 0.05, 4, 256}, seed).objective);
  }
}

TEST_CASE("engine and grid agree on a constrained quadratic surrogate") {
  SurrogateSpec s;
  s.kind = SurrogateKind::quadratic;
  s.coefficients = {1.0, 3.0};
  s.center = {0.7, -0.4};
  s.constraints = {{{-1.0, 1.0}, -1.5}};  // y - x <= -1.5
  OptimizationProblem p;
  p.space = SearchSpace({VariableSpec::continuous("x", -2.0, 2.0, 1.0),
                         VariableSpec::continuous("y", -2.0, 2.0, -1.0)});
  p.constraint_count = 1;
  p.evaluator = [&](const Point& x) { return eval_surrogate(s, x, 0); };
  p.options.max_evaluations = 500;
  p.options.min_frame_size = 1e-7;
  auto r = optimize(p);

  double best = 1e300;
  Point arg;
  const int n = 800;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Point x{-2.0 + 4.0 * i / n, -2.0 + 4.0 * j / n};
      auto e = eval_surrogate(s, x, 0);
      if (e.feasible() && e.objective < best) {
        best = e.objective;
        arg = x;
      }
    }
  const double cell = 4.0 / n;
  CHECK(r.incumbent.result.feasible());
  CHECK(std::abs(r.incumbent.result.objective - best) < 1e-4);
  CHECK(std::abs(r.incumbent.point[0] - arg[0]) <= cell);
  CHECK(std::abs(r.incumbent.point[1] - arg[1]) <= cell);
}
