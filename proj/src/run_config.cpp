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

#include "meshnas/run_config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "meshnas/errors.hpp"
#include "meshnas/hpo.hpp"

namespace meshnas {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, std::string_view where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", where));
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(fmt::format("unknown key '{}' in {}", it.key(), where));
}

template <typename T>
T get(const json& j, const char* key, std::string_view where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: bad or missing '{}' ({})", where, key, e.what()));
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, std::string_view where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

MultiplierBounds parse_bounds(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto b = get<std::vector<double>>(j, key, "bounds");
  if (b.size() != 2) throw ConfigError(fmt::format("bounds.{} needs [lower, upper]", key));
  return {b[0], b[1]};
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config file {} is not valid JSON: {}", path.string(), e.what()));
  }
}

SearchSpace parse_space(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("space must be a non-empty list of variables");
  std::vector<VariableSpec> vars;
  for (const auto& block : j) {
    reject_unknown(block, {"name", "kind", "lower", "upper", "values", "initial"}, "variable");
    const auto name = get<std::string>(block, "name", "variable");
    const auto where = fmt::format("variable '{}'", name);
    const auto kind = variable_kind_from_string(get<std::string>(block, "kind", where));
    switch (kind) {
      case VariableKind::continuous:
        if (block.contains("values")) throw ConfigError(where + ": continuous takes no values");
        vars.push_back(VariableSpec::continuous(name, get<double>(block, "lower", where),
                                                get<double>(block, "upper", where),
                                                get<double>(block, "initial", where)));
        break;
      case VariableKind::discrete_set:
        if (block.contains("lower") || block.contains("upper"))
          throw ConfigError(where + ": discrete_set takes values, not bounds");
        vars.push_back(VariableSpec::discrete_set(name,
                                                  get<std::vector<double>>(block, "values", where),
                                                  get<double>(block, "initial", where)));
        break;
      case VariableKind::categorical:
        if (block.contains("lower") || block.contains("upper"))
          throw ConfigError(where + ": categorical takes values, not bounds");
        vars.push_back(VariableSpec::categorical(
            name, get<std::vector<std::string>>(block, "values", where),
            get<std::string>(block, "initial", where)));
        break;
    }
  }
  return SearchSpace(std::move(vars));
}

json space_to_json(const SearchSpace& space) {
  json out = json::array();
  for (const auto& v : space.variables()) {
    json b;
    b["name"] = v.name;
    b["kind"] = std::string(to_string(v.kind));
    switch (v.kind) {
      case VariableKind::continuous:
        b["lower"] = v.lower;
        b["upper"] = v.upper;
        b["initial"] = v.initial;
        break;
      case VariableKind::discrete_set:
        b["values"] = v.values;
        b["initial"] = v.initial;
        break;
      case VariableKind::categorical:
        b["values"] = v.labels;
        b["initial"] = v.labels.at(static_cast<std::size_t>(v.initial));
        break;
    }
    out.push_back(std::move(b));
  }
  return out;
}

BlackboxConfig parse_blackbox(const json& j) {
  reject_unknown(j, {"command", "timeout", "seeds", "working_dir", "workers"}, "blackbox");
  BlackboxConfig cfg;
  cfg.command_template = get<std::string>(j, "command", "blackbox");
  cfg.timeout = get_or<double>(j, "timeout", cfg.timeout, "blackbox");
  cfg.seeds = get_or<std::vector<std::int64_t>>(j, "seeds", cfg.seeds, "blackbox");
  cfg.working_dir = get_or<std::string>(j, "working_dir", cfg.working_dir.string(), "blackbox");
  cfg.workers = get_or<std::size_t>(j, "workers", cfg.workers, "blackbox");
  cfg.validate();
  return cfg;
}

json blackbox_to_json(const BlackboxConfig& cfg) {
  return {{"command", cfg.command_template},
          {"timeout", cfg.timeout},
          {"seeds", cfg.seeds},
          {"working_dir", cfg.working_dir.string()},
          {"workers", cfg.workers}};
}

EngineOptions parse_engine(const json& j) {
  reject_unknown(j, {"max_evaluations", "min_frame_size", "seed", "opportunistic", "workers"},
                 "engine");
  EngineOptions o;
  o.max_evaluations = get_or<std::size_t>(j, "max_evaluations", o.max_evaluations, "engine");
  o.min_frame_size = get_or<double>(j, "min_frame_size", o.min_frame_size, "engine");
  o.seed = get_or<std::uint64_t>(j, "seed", o.seed, "engine");
  o.opportunistic = get_or<bool>(j, "opportunistic", o.opportunistic, "engine");
  o.workers = get_or<std::size_t>(j, "workers", o.workers, "engine");
  if (o.max_evaluations < 1) throw ConfigError("engine.max_evaluations must be >= 1");
  if (!(o.min_frame_size > 0.0)) throw ConfigError("engine.min_frame_size must be > 0");
  if (o.workers < 1) throw ConfigError("engine.workers must be >= 1");
  return o;
}

json engine_to_json(const EngineOptions& o) {
  return {{"max_evaluations", o.max_evaluations},
          {"min_frame_size", o.min_frame_size},
          {"seed", o.seed},
          {"opportunistic", o.opportunistic},
          {"workers", o.workers}};
}

NasRunConfig NasRunConfig::from_json(const json& j) {
  reject_unknown(j, {"family", "bounds", "epsilon", "blackbox", "engine", "output_dir"}, "nas config");
  NasRunConfig c;
  c.family = family_from_string(get_or<std::string>(j, "family", "resnet18", "nas config"));
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    reject_unknown(b, {"depth", "width", "resolution"}, "bounds");
    c.depth_bounds = parse_bounds(b, "depth");
    c.width_bounds = parse_bounds(b, "width");
    c.resolution_bounds = parse_bounds(b, "resolution");
  }
  c.epsilon = get_or<double>(j, "epsilon", 0.0, "nas config");
  if (!(c.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (!j.contains("blackbox")) throw ConfigError("nas config needs a blackbox section");
  c.blackbox = parse_blackbox(j.at("blackbox"));
  c.engine = parse_engine(j.value("engine", json::object()));
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string(), "nas config");
  return c;
}

json NasRunConfig::to_json() const {
  return {{"family", std::string(meshnas::to_string(family))},
          {"bounds",
           {{"depth", {depth_bounds.lower, depth_bounds.upper}},
            {"width", {width_bounds.lower, width_bounds.upper}},
            {"resolution", {resolution_bounds.lower, resolution_bounds.upper}}}},
          {"epsilon", epsilon},
          {"blackbox", blackbox_to_json(blackbox)},
          {"engine", engine_to_json(engine)},
          {"output_dir", output_dir.string()}};
}

SearchSpace default_hpo_declared_space() {
  const HpoSettings s;
  return SearchSpace({
      VariableSpec::continuous("lr", s.lr_lower, s.lr_upper, s.lr_initial),
      VariableSpec::discrete_set("weight_decay", s.weight_decays, s.weight_decay_initial),
      VariableSpec::categorical("optimizer", s.optimizers, s.optimizer_initial),
      VariableSpec::discrete_set("batch_size", s.batch_sizes, s.batch_size_initial),
  });
}

HpoRunConfig HpoRunConfig::from_json(const json& j) {
  reject_unknown(j, {"space", "blackbox", "engine", "output_dir"}, "hpo config");
  HpoRunConfig c;
  c.space = j.contains("space") ? parse_space(j.at("space")) : default_hpo_declared_space();
  hpo_space_from_declared(c.space);
  if (!j.contains("blackbox")) throw ConfigError("hpo config needs a blackbox section");
  c.blackbox = parse_blackbox(j.at("blackbox"));
  c.engine = parse_engine(j.value("engine", json::object()));
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string(), "hpo config");
  return c;
}

json HpoRunConfig::to_json() const {
  return {{"space", space_to_json(space)},
          {"blackbox", blackbox_to_json(blackbox)},
          {"engine", engine_to_json(engine)},
          {"output_dir", output_dir.string()}};
}

TournamentRunConfig TournamentRunConfig::from_json(const json& j) {
  reject_unknown(j, {"candidates", "seeds", "timeout", "working_dir", "workers", "top", "output_dir"},
                 "tournament config");
  TournamentRunConfig c;
  const double timeout = get_or<double>(j, "timeout", BlackboxConfig{}.timeout, "tournament config");
  const std::string dir = get_or<std::string>(j, "working_dir", ".", "tournament config");
  if (!j.contains("candidates") || !j.at("candidates").is_array() || j.at("candidates").empty())
    throw ConfigError("tournament config needs a non-empty candidates list");
  c.seeds = get<std::vector<std::int64_t>>(j, "seeds", "tournament config");
  if (c.seeds.empty()) throw ConfigError("tournament needs at least one seed");
  for (const auto& cand : j.at("candidates")) {
    reject_unknown(cand, {"name", "command", "timeout"}, "candidate");
    BlackboxConfig cfg;
    cfg.command_template = get<std::string>(cand, "command", "candidate");
    cfg.timeout = get_or<double>(cand, "timeout", timeout, "candidate");
    cfg.working_dir = dir;
    cfg.seeds = c.seeds;
    cfg.validate();
    c.candidates.emplace_back(get<std::string>(cand, "name", "candidate"), std::move(cfg));
  }
  c.workers = get_or<std::size_t>(j, "workers", c.workers, "tournament config");
  c.top = get_or<std::size_t>(j, "top", c.top, "tournament config");
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string(), "tournament config");
  return c;
}

json TournamentRunConfig::to_json() const {
  json cands = json::array();
  for (const auto& [name, cfg] : candidates)
    cands.push_back({{"name", name}, {"command", cfg.command_template}, {"timeout", cfg.timeout}});
  return {{"candidates", cands},
          {"seeds", seeds},
          {"working_dir", candidates.empty() ? "." : candidates.front().second.working_dir.string()},
          {"workers", workers},
          {"top", top},
          {"output_dir", output_dir.string()}};
}

}  // namespace meshnas
