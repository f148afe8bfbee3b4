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

#include "meshnas/surrogates.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "meshnas/errors.hpp"

namespace meshnas {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_open(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t stream_seed(const std::vector<double>& p, std::int64_t seed, bool use_seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (double x : p) mix(std::bit_cast<std::uint64_t>(x));
  if (use_seed) mix(static_cast<std::uint64_t>(seed));
  return h;
}

double gaussian(std::uint64_t& state) {
  const double u1 = unit_open(state);
  const double u2 = unit_open(state);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void need_dimension(const std::vector<double>& p, std::size_t n, std::string_view kind) {
  if (p.size() != n)
    throw DimensionError(
        fmt::format("{} surrogate expects {} coordinates, got {}", kind, n, p.size()));
}

bool differs(double a, double b) {
  return std::abs(a - b) > 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(fmt::format("unknown key '{}' in {}", it.key(), where));
}

}  // namespace

std::string_view to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::quadratic:
      return "quadratic";
    case SurrogateKind::nas_accuracy:
      return "nas_accuracy";
    case SurrogateKind::hpo_accuracy:
      return "hpo_accuracy";
    case SurrogateKind::constant:
      return "constant";
    case SurrogateKind::failing:
      return "failing";
  }
  return "?";
}

SurrogateKind surrogate_kind_from_string(std::string_view text) {
  for (auto k : {SurrogateKind::quadratic, SurrogateKind::nas_accuracy,
                 SurrogateKind::hpo_accuracy, SurrogateKind::constant, SurrogateKind::failing})
    if (to_string(k) == text) return k;
  throw ConfigError(fmt::format("unknown surrogate kind '{}'", text));
}

SurrogateSpec default_surrogate(SurrogateKind kind) {
  SurrogateSpec s;
  s.kind = kind;
  switch (kind) {
    case SurrogateKind::quadratic:
      s.coefficients = {1.0, 1.0, 1.0};
      s.center = {0.0, 0.0, 0.0};
      break;
    case SurrogateKind::constant:
      s.offset = 77.0;
      break;
    case SurrogateKind::failing:
      s.offset = 0.0;
      s.fail_probability = 1.0;
      break;
    default:
      break;
  }
  return s;
}

EvalResult eval_surrogate(const SurrogateSpec& spec, const std::vector<double>& p,
                          std::int64_t seed) {
  double value = 0.0;
  std::vector<double> constraints;
  switch (spec.kind) {
    case SurrogateKind::quadratic: {
      need_dimension(p, spec.coefficients.size(), "quadratic");
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - (i < spec.center.size() ? spec.center[i] : 0.0);
        value += spec.coefficients[i] * d * d;
      }
      value += spec.offset;
      for (const auto& c : spec.constraints) {
        need_dimension(p, c.a.size(), "quadratic constraint");
        double g = -c.rhs;
        for (std::size_t i = 0; i < p.size(); ++i) g += c.a[i] * p[i];
        constraints.push_back(g);
      }
      break;
    }
    case SurrogateKind::nas_accuracy: {
      need_dimension(p, 3, "nas_accuracy");
      const auto& k = spec.nas;
      value = k.peak * std::min(1.0, k.width_base + k.width_slope * p[1]) *
              std::min(1.0, k.res_base + k.res_slope * p[2]);
      break;
    }
    case SurrogateKind::hpo_accuracy: {
      need_dimension(p, 4, "hpo_accuracy");
      const auto& k = spec.hpo;
      const double dlr = p[0] - k.lr_opt;
      value = k.peak - k.lr_curvature * dlr * dlr;
      if (differs(p[1], k.wd_opt)) value -= k.wd_penalty;
      if (differs(p[2], k.optimizer_opt)) value -= k.optimizer_penalty;
      if (differs(p[3], k.batch_opt)) value -= k.batch_penalty;
      break;
    }
    case SurrogateKind::constant:
      value = spec.offset;
      break;
    case SurrogateKind::failing: {
      std::uint64_t state = stream_seed({}, seed, true) ^ 0x5bd1e995ULL;
      if (unit_open(state) < spec.fail_probability)
        return EvalResult::failure("failing surrogate: configured failure");
      value = spec.offset;
      break;
    }
  }
  if (spec.noise_sigma > 0.0) {
    std::uint64_t state = stream_seed(p, seed, spec.seed_dependent);
    value += spec.noise_sigma * gaussian(state);
  }
  return EvalResult::success(value, std::move(constraints));
}

SurrogateSpec surrogate_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("surrogate spec must be a JSON object");
  reject_unknown(j,
                 {"kind", "coefficients", "center", "constraints", "offset", "nas", "hpo",
                  "fail_probability", "noise_sigma", "seed_dependent"},
                 "surrogate spec");
  try {
    SurrogateSpec s = default_surrogate(surrogate_kind_from_string(j.at("kind").get<std::string>()));
    read(j, "coefficients", s.coefficients);
    read(j, "center", s.center);
    read(j, "offset", s.offset);
    read(j, "fail_probability", s.fail_probability);
    read(j, "noise_sigma", s.noise_sigma);
    read(j, "seed_dependent", s.seed_dependent);
    if (j.contains("constraints")) {
      for (const auto& c : j.at("constraints")) {
        reject_unknown(c, {"a", "rhs"}, "surrogate constraint");
        s.constraints.push_back({c.at("a").get<std::vector<double>>(), c.value("rhs", 0.0)});
      }
    }
    if (j.contains("nas")) {
      const auto& n = j.at("nas");
      reject_unknown(n, {"peak", "width_base", "width_slope", "res_base", "res_slope"},
                     "nas surrogate parameters");
      read(n, "peak", s.nas.peak);
      read(n, "width_base", s.nas.width_base);
      read(n, "width_slope", s.nas.width_slope);
      read(n, "res_base", s.nas.res_base);
      read(n, "res_slope", s.nas.res_slope);
    }
    if (j.contains("hpo")) {
      const auto& h = j.at("hpo");
      reject_unknown(h,
                     {"peak", "lr_opt", "lr_curvature", "wd_opt", "wd_penalty", "optimizer_opt",
                      "optimizer_penalty", "batch_opt", "batch_penalty"},
                     "hpo surrogate parameters");
      read(h, "peak", s.hpo.peak);
      read(h, "lr_opt", s.hpo.lr_opt);
      read(h, "lr_curvature", s.hpo.lr_curvature);
      read(h, "wd_opt", s.hpo.wd_opt);
      read(h, "wd_penalty", s.hpo.wd_penalty);
      read(h, "optimizer_opt", s.hpo.optimizer_opt);
      read(h, "optimizer_penalty", s.hpo.optimizer_penalty);
      read(h, "batch_opt", s.hpo.batch_opt);
      read(h, "batch_penalty", s.hpo.batch_penalty);
    }
    if (s.kind == SurrogateKind::quadratic && s.center.size() > s.coefficients.size())
      throw ConfigError("quadratic surrogate: center longer than coefficients");
    if (s.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    if (!(s.fail_probability >= 0.0 && s.fail_probability <= 1.0))
      throw ConfigError("fail_probability must be in [0, 1]");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed surrogate spec: {}", e.what()));
  }
}

nlohmann::json to_json(const SurrogateSpec& s) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(s.kind));
  j["offset"] = s.offset;
  j["noise_sigma"] = s.noise_sigma;
  j["seed_dependent"] = s.seed_dependent;
  switch (s.kind) {
    case SurrogateKind::quadratic: {
      j["coefficients"] = s.coefficients;
      j["center"] = s.center;
      auto cs = nlohmann::json::array();
      for (const auto& c : s.constraints) cs.push_back({{"a", c.a}, {"rhs", c.rhs}});
      j["constraints"] = cs;
      break;
    }
    case SurrogateKind::nas_accuracy:
      j["nas"] = {{"peak", s.nas.peak},
                  {"width_base", s.nas.width_base},
                  {"width_slope", s.nas.width_slope},
                  {"res_base", s.nas.res_base},
                  {"res_slope", s.nas.res_slope}};
      break;
    case SurrogateKind::hpo_accuracy:
      j["hpo"] = {{"peak", s.hpo.peak},
                  {"lr_opt", s.hpo.lr_opt},
                  {"lr_curvature", s.hpo.lr_curvature},
                  {"wd_opt", s.hpo.wd_opt},
                  {"wd_penalty", s.hpo.wd_penalty},
                  {"optimizer_opt", s.hpo.optimizer_opt},
                  {"optimizer_penalty", s.hpo.optimizer_penalty},
                  {"batch_opt", s.hpo.batch_opt},
                  {"batch_penalty", s.hpo.batch_penalty}};
      break;
    case SurrogateKind::failing:
      j["fail_probability"] = s.fail_probability;
      break;
    case SurrogateKind::constant:
      break;
  }
  return j;
}

AggregateEvaluator make_surrogate_evaluator(SurrogateSpec spec, std::vector<std::int64_t> seeds) {
  if (seeds.empty()) throw ConfigError("surrogate evaluator needs at least one seed");
  return [spec = std::move(spec), seeds = std::move(seeds)](const Point& p) {
    std::vector<EvalResult> runs;
    runs.reserve(seeds.size());
    for (auto seed : seeds) {
      try {
        runs.push_back(eval_surrogate(spec, p, seed));
      } catch (const std::exception& e) {
        runs.push_back(EvalResult::failure(e.what()));
      }
    }
    return aggregate(std::move(runs));
  };
}

}  // namespace meshnas
