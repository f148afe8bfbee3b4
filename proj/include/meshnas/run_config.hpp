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

// JSON run configuration. Every section is parsed strictly: unknown keys
// raise ConfigError. Command-line flags are applied by patching the JSON
// document before it is parsed, so flags always win over the file.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "meshnas/arch_model.hpp"
#include "meshnas/blackbox.hpp"
#include "meshnas/mads.hpp"
#include "meshnas/search_space.hpp"

namespace meshnas {

// Missing file or malformed JSON -> ConfigError.
nlohmann::json load_json_file(const std::filesystem::path& path);

SearchSpace parse_space(const nlohmann::json& j);
nlohmann::json space_to_json(const SearchSpace& space);

BlackboxConfig parse_blackbox(const nlohmann::json& j);
nlohmann::json blackbox_to_json(const BlackboxConfig& cfg);

EngineOptions parse_engine(const nlohmann::json& j);
nlohmann::json engine_to_json(const EngineOptions& options);

struct NasRunConfig {
  Family family = Family::resnet18;
  MultiplierBounds depth_bounds;
  MultiplierBounds width_bounds;
  MultiplierBounds resolution_bounds;
  double epsilon = 0.0;
  BlackboxConfig blackbox;
  EngineOptions engine;
  std::filesystem::path output_dir = "nas_run";

  static NasRunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct HpoRunConfig {
  // Declared with a native `lr` variable.
  SearchSpace space;
  BlackboxConfig blackbox;
  EngineOptions engine;
  std::filesystem::path output_dir = "hpo_run";

  static HpoRunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct TournamentRunConfig {
  std::vector<std::pair<std::string, BlackboxConfig>> candidates;
  std::vector<std::int64_t> seeds;
  std::size_t workers = 1;
  std::size_t top = 2;
  std::filesystem::path output_dir = "tournament_run";

  static TournamentRunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// The HPO space used when the configuration declares none.
SearchSpace default_hpo_declared_space();

}  // namespace meshnas
