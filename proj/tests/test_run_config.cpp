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

#include <json.hpp>

#include "meshnas/errors.hpp"
#include "meshnas/hpo.hpp"
#include "meshnas/run_config.hpp"
#include "support.hpp"

using namespace meshnas;
using nlohmann::json;

namespace {

json nas_doc() {
  return json::parse(R"({
    "family": "senet18",
    "bounds": {"depth": [0.5, 1.5], "width": [0.25, 2.0], "resolution": [0.75, 1.25]},
    "epsilon": 0.01,
    "blackbox": {"command": "run {input} {seed}", "timeout": 30, "seeds": [3, 4]},
    "engine": {"max_evaluations": 40, "min_frame_size": 1e-3, "seed": 9, "workers": 2},
    "output_dir": "out/nas"
  })");
}

}  // namespace

TEST_CASE("nas config parses every field") {
  const auto c = NasRunConfig::from_json(nas_doc());
  CHECK(c.family == Family::senet18);
  CHECK(c.depth_bounds.lower == 0.5);
  CHECK(c.resolution_bounds.upper == 1.25);
  CHECK(c.width_bounds.lower == 0.25);
  CHECK(c.epsilon == 0.01);
  CHECK(c.blackbox.command_template == "run {input} {seed}");
  CHECK(c.blackbox.timeout == 30);
  CHECK(c.blackbox.seeds == std::vector<std::int64_t>{3, 4});
  CHECK(c.engine.max_evaluations == 40);
  CHECK(c.engine.min_frame_size == 1e-3);
  CHECK(c.engine.seed == 9);
  CHECK(c.engine.workers == 2);
  CHECK(c.engine.opportunistic);
  CHECK(c.output_dir == "out/nas");
}

TEST_CASE("nas config defaults") {
  const auto c = NasRunConfig::from_json(json{{"blackbox", {{"command", "x {input}"}}}});
  CHECK(c.family == Family::resnet18);
  CHECK(c.width_bounds.lower == 0.25);
  CHECK(c.width_bounds.upper == 2.0);
  CHECK(c.epsilon == 0.0);
  CHECK(c.blackbox.seeds == std::vector<std::int64_t>{0});
}

TEST_CASE("config round trips through json") {
  const auto nas = NasRunConfig::from_json(nas_doc());
  CHECK(NasRunConfig::from_json(nas.to_json()).to_json() == nas.to_json());

  const auto hpo = HpoRunConfig::from_json(json{{"blackbox", {{"command", "x {input}"}}}});
  const auto again = HpoRunConfig::from_json(hpo.to_json());
  CHECK(again.to_json() == hpo.to_json());
  CHECK(again.space.size() == 4);

  const json t = json::parse(R"({"candidates": [{"name": "a", "command": "echo 1 {input}"},
                                                {"name": "b", "command": "echo 2 {input}", "timeout": 5}],
                                 "seeds": [0, 1, 2], "timeout": 12, "top": 1})");
  const auto tc = TournamentRunConfig::from_json(t);
  REQUIRE(tc.candidates.size() == 2);
  CHECK(tc.candidates[0].second.timeout == 12);
  CHECK(tc.candidates[1].second.timeout == 5);
  CHECK(tc.candidates[1].second.seeds == std::vector<std::int64_t>{0, 1, 2});
  CHECK(tc.top == 1);
  CHECK(TournamentRunConfig::from_json(tc.to_json()).to_json() == tc.to_json());
}

TEST_CASE("space round trip keeps kinds and initial values") {
  const auto space = default_hpo_declared_space();
  const auto j = space_to_json(space);
  const auto back = parse_space(j);
  CHECK(space_to_json(back) == j);
  CHECK(j[2]["kind"] == "categorical");
  CHECK(j[2]["initial"] == "SGD");
}

TEST_CASE("unknown keys are rejected at every level") {
  auto top = nas_doc();
  top["epsilom"] = 0.1;
  CHECK_THROWS_AS(NasRunConfig::from_json(top), ConfigError);
  auto bounds = nas_doc();
  bounds["bounds"]["height"] = {1, 2};
  CHECK_THROWS_AS(NasRunConfig::from_json(bounds), ConfigError);
  auto bb = nas_doc();
  bb["blackbox"]["retries"] = 2;
  CHECK_THROWS_AS(NasRunConfig::from_json(bb), ConfigError);
  auto eng = nas_doc();
  eng["engine"]["poll"] = "gps";
  CHECK_THROWS_AS(NasRunConfig::from_json(eng), ConfigError);
  CHECK_THROWS_AS(parse_space(json::parse(R"([{"name": "x", "kind": "continuous", "lower": 0,
                                               "upper": 1, "initial": 0, "step": 1}])")),
                  ConfigError);
  CHECK_THROWS_AS(TournamentRunConfig::from_json(json::parse(
                      R"({"candidates": [{"name": "a", "command": "x {input}", "gpu": 1}], "seeds": [0]})")),
                  ConfigError);
}

TEST_CASE("bad values are rejected") {
  auto c = nas_doc();
  c["family"] = "vgg";
  CHECK_THROWS(NasRunConfig::from_json(c));
  c = nas_doc();
  c["epsilon"] = -1;
  CHECK_THROWS_AS(NasRunConfig::from_json(c), ConfigError);
  c = nas_doc();
  c["bounds"]["depth"] = {1.0};
  CHECK_THROWS_AS(NasRunConfig::from_json(c), ConfigError);
  c = nas_doc();
  c["engine"]["max_evaluations"] = 0;
  CHECK_THROWS_AS(NasRunConfig::from_json(c), ConfigError);
  c = nas_doc();
  c["engine"]["min_frame_size"] = 0;
  CHECK_THROWS_AS(NasRunConfig::from_json(c), ConfigError);
  c = nas_doc();
  c["blackbox"]["timeout"] = "soon";
  CHECK_THROWS_AS(NasRunConfig::from_json(c), ConfigError);
  c = nas_doc();
  c.erase("blackbox");
  CHECK_THROWS_AS(NasRunConfig::from_json(c), ConfigError);
  CHECK_THROWS_AS(NasRunConfig::from_json(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_space(json::array()), ConfigError);
  CHECK_THROWS_AS(TournamentRunConfig::from_json(json{{"candidates", json::array()}, {"seeds", {0}}}),
                  ConfigError);
  CHECK_THROWS_AS(TournamentRunConfig::from_json(
                      json{{"candidates", {{{"name", "a"}, {"command", "x {input}"}}}}, {"seeds", json::array()}}),
                  ConfigError);
}

TEST_CASE("hpo config rejects spaces without the required variables") {
  const json space = json::parse(R"([{"name": "lr", "kind": "continuous", "lower": 0.001,
                                      "upper": 0.1, "initial": 0.01}])");
  CHECK_THROWS(HpoRunConfig::from_json(json{{"space", space}, {"blackbox", {{"command", "x {input}"}}}}));
}

TEST_CASE("json files") {
  testing::TempDir dir;
  CHECK_THROWS_AS(load_json_file(dir.path() / "missing.json"), ConfigError);
  testing::write_file(dir.path() / "bad.json", "{\"family\": ");
  CHECK_THROWS_AS(load_json_file(dir.path() / "bad.json"), ConfigError);
  testing::write_file(dir.path() / "good.json", nas_doc().dump(2));
  CHECK(load_json_file(dir.path() / "good.json") == nas_doc());
}
