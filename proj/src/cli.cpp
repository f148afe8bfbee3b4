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

#include "meshnas/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "meshnas/arch_model.hpp"
#include "meshnas/blackbox.hpp"
#include "meshnas/errors.hpp"
#include "meshnas/hpo.hpp"
#include "meshnas/nas.hpp"
#include "meshnas/run_config.hpp"
#include "meshnas/surrogates.hpp"
#include "meshnas/tournament.hpp"

namespace meshnas::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory {}", dir.string()));
  return dir;
}

std::vector<std::int64_t> parse_seed_list(const std::string& text) {
  std::vector<std::int64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw ConfigError(fmt::format("bad seed '{}' in --seeds", item));
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("--seeds needs at least one integer");
  return seeds;
}

// Flags shared by nas and hpo, applied on top of the configuration file.
struct SearchFlags {
  std::string config;
  std::string command;
  std::string seeds;
  double timeout = 0.0;
  std::size_t max_evals = 0;
  double min_frame = 0.0;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out;
  CLI::Option* config_opt = nullptr;
  CLI::Option* command_opt = nullptr;
  CLI::Option* seeds_opt = nullptr;
  CLI::Option* timeout_opt = nullptr;
  CLI::Option* max_evals_opt = nullptr;
  CLI::Option* min_frame_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* complete_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  void attach(CLI::App* app) {
    config_opt = app->add_option("--config", config, "JSON run configuration file");
    command_opt = app->add_option("--command", command,
                                  "Blackbox command template with {input} and {seed}");
    seeds_opt = app->add_option("--seeds", seeds, "Comma-separated blackbox seeds, e.g. 1,2,3");
    timeout_opt = app->add_option("--timeout", timeout, "Per-run blackbox timeout in seconds");
    max_evals_opt = app->add_option("--max-evals", max_evals, "Engine evaluation budget");
    min_frame_opt = app->add_option("--min-frame", min_frame, "Stop when every frame size is below this");
    seed_opt = app->add_option("--seed", seed, "Engine seed for poll directions");
    workers_opt = app->add_option("--workers", workers, "Concurrent evaluations per poll step");
    complete_opt = app->add_flag("--complete-poll", "Evaluate the whole poll set (no opportunism)");
    out_opt = app->add_option("--out", out, "Output directory");
  }

  json document() const {
    json j = config_opt->count() ? load_json_file(config) : json::object();
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    auto& bb = j["blackbox"];
    if (bb.is_null()) bb = json::object();
    if (command_opt->count()) bb["command"] = command;
    if (seeds_opt->count()) bb["seeds"] = parse_seed_list(seeds);
    if (timeout_opt->count()) bb["timeout"] = timeout;
    auto& engine = j["engine"];
    if (engine.is_null()) engine = json::object();
    if (max_evals_opt->count()) engine["max_evaluations"] = max_evals;
    if (min_frame_opt->count()) engine["min_frame_size"] = min_frame;
    if (seed_opt->count()) engine["seed"] = seed;
    if (workers_opt->count()) engine["workers"] = workers;
    if (complete_opt->count()) engine["opportunistic"] = false;
    if (out_opt->count()) j["output_dir"] = out;
    return j;
  }
};

void write_history(const fs::path& dir, const OptimizationResult& result, const SearchSpace& space,
                   std::size_t constraints) {
  std::ostringstream csv;
  result.history.write_csv(csv, space, constraints);
  write_text(dir / "history.csv", csv.str());
}

// ---- macs ---------------------------------------------------------------

int run_macs(const std::string& family_text, const std::vector<double>& multipliers,
             const std::string& format) {
  const Family family = family_from_string(family_text);
  if (multipliers.size() != 3) throw ConfigError("--multipliers needs depth,width,resolution");
  if (format != "text" && format != "csv") throw ConfigError("--format must be text or csv");
  const auto base = baseline(family);
  const auto arch = scale(base, {multipliers[0], multipliers[1], multipliers[2]});
  const auto layers = enumerate_layers(arch);
  if (format == "csv")
    write_layer_csv(std::cout, layers);
  else
    write_layer_table(std::cout, layers);
  const auto r = ratios(base, arch);
  fmt::print("{}macs: {} ({},{},{}) input={} macs={} params={} baseline_macs={} baseline_params={} "
             "mac_ratio={:.6f} param_ratio={:.6f}\n",
             format == "csv" ? "# " : "", to_string(family), multipliers[0], multipliers[1],
             multipliers[2], arch.input_resolution, mac_count(arch), param_count(arch),
             mac_count(base), param_count(base), r.mac_ratio, r.param_ratio);
  return kExitOk;
}

// ---- nas ----------------------------------------------------------------

int run_nas_command(const SearchFlags& flags, const std::string& family, bool family_set,
                    double epsilon, bool epsilon_set) {
  json doc = flags.document();
  if (family_set) doc["family"] = family;
  if (epsilon_set) doc["epsilon"] = epsilon;
  const auto cfg = NasRunConfig::from_json(doc);

  NasProblem problem;
  problem.family = cfg.family;
  problem.depth_bounds = cfg.depth_bounds;
  problem.width_bounds = cfg.width_bounds;
  problem.resolution_bounds = cfg.resolution_bounds;
  problem.epsilon = cfg.epsilon;
  problem.accuracy = [](const Point&) { return AggregatedEval{}; };
  problem.validate();
  const auto wire = nas_space(problem);
  problem.accuracy = make_blackbox_evaluator(cfg.blackbox, wire);

  const auto dir = prepare_output_dir(cfg.output_dir);
  write_json(dir / "config.json", cfg.to_json());
  write_json(dir / "run.json", {{"subcommand", "nas"},
                                {"sense", "minimize"},
                                {"wire_format", "depth width resolution"},
                                {"objective", "mac_count"},
                                {"constraints", {"(baseline_accuracy - epsilon) - accuracy"}}});

  const auto report = run_nas(problem, cfg.engine);
  write_history(dir, report.result, report.space, 1);
  std::ostringstream text;
  write_nas_report(text, report);
  write_text(dir / "report.txt", text.str());

  fmt::print("nas: family={} best=({},{},{}) macs={} mac_ratio={:.4f} param_ratio={:.4f} "
             "accuracy={} baseline={} evaluations={} -> {}\n",
             to_string(report.family), report.best.depth, report.best.width,
             report.best.resolution, report.best_macs, report.ratios.mac_ratio,
             report.ratios.param_ratio, report.best_accuracy, report.baseline_accuracy,
             report.result.history.size(), dir.string());
  return kExitOk;
}

// ---- hpo ----------------------------------------------------------------

int run_hpo_command(const SearchFlags& flags) {
  const auto cfg = HpoRunConfig::from_json(flags.document());
  const auto space = hpo_space_from_declared(cfg.space);
  const auto wire = hpo_wire_space(space);
  const auto accuracy = make_blackbox_evaluator(cfg.blackbox, wire);

  const auto dir = prepare_output_dir(cfg.output_dir);
  json indices = json::object();
  for (std::size_t i = 0; i < space[2].labels.size(); ++i) indices[space[2].labels[i]] = i;
  write_json(dir / "config.json", cfg.to_json());
  write_json(dir / "run.json", {{"subcommand", "hpo"},
                                {"sense", "maximize"},
                                {"wire_format", "effective_lr weight_decay optimizer_index batch_size"},
                                {"optimizer_indices", indices},
                                {"engine_lr_variable", "log10_lr"}});

  const auto report = run_hpo(space, accuracy, cfg.engine);
  write_history(dir, report.result, report.space, 0);
  std::ostringstream text;
  write_hpo_report(text, report);
  write_text(dir / "report.txt", text.str());

  fmt::print("hpo: best lr={} (effective {}) weight_decay={} optimizer={} batch_size={} "
             "accuracy={} improvement={} evaluations={} -> {}\n",
             report.best.sampled_lr, report.best.effective_lr, report.best.weight_decay,
             report.best.optimizer, report.best.batch_size, report.best_accuracy,
             report.improvement, report.result.history.size(), dir.string());
  return kExitOk;
}

// ---- tournament ---------------------------------------------------------

struct TournamentFlags {
  std::string config;
  std::vector<std::string> candidates;
  std::string seeds;
  double timeout = 0.0;
  std::size_t top = 0;
  std::size_t workers = 0;
  std::string out;
  CLI::Option* config_opt = nullptr;
  CLI::Option* candidate_opt = nullptr;
  CLI::Option* seeds_opt = nullptr;
  CLI::Option* timeout_opt = nullptr;
  CLI::Option* top_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

int run_tournament_command(const TournamentFlags& f) {
  json j = f.config_opt->count() ? load_json_file(f.config) : json::object();
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  if (f.candidate_opt->count()) {
    json list = json::array();
    for (const auto& spec : f.candidates) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError(fmt::format("--candidate expects NAME=COMMAND, got '{}'", spec));
      list.push_back({{"name", spec.substr(0, eq)}, {"command", spec.substr(eq + 1)}});
    }
    j["candidates"] = list;
  }
  if (f.seeds_opt->count()) j["seeds"] = parse_seed_list(f.seeds);
  if (f.timeout_opt->count()) j["timeout"] = f.timeout;
  if (f.top_opt->count()) j["top"] = f.top;
  if (f.workers_opt->count()) j["workers"] = f.workers;
  if (f.out_opt->count()) j["output_dir"] = f.out;
  const auto cfg = TournamentRunConfig::from_json(j);
  if (cfg.top < 1 || cfg.top > cfg.candidates.size())
    throw ConfigError(fmt::format("top must be between 1 and {}", cfg.candidates.size()));

  std::vector<Candidate> candidates;
  for (const auto& [name, bb] : cfg.candidates) candidates.push_back(blackbox_candidate(name, bb));

  const auto dir = prepare_output_dir(cfg.output_dir);
  write_json(dir / "config.json", cfg.to_json());
  write_json(dir / "run.json", {{"subcommand", "tournament"}, {"wire_format", "1 1 1"}});

  const auto ranking = run_tournament(candidates, cfg.seeds, cfg.workers);
  const auto top = select_top(ranking, cfg.top);
  std::ostringstream table, csv;
  write_ranking_table(table, ranking);
  write_ranking_csv(csv, ranking, cfg.seeds);
  table << "\nselected = ";
  for (std::size_t i = 0; i < top.size(); ++i) table << (i ? ", " : "") << top[i];
  table << '\n';
  write_text(dir / "report.txt", table.str());
  write_text(dir / "ranking.csv", csv.str());

  std::cout << table.str();
  fmt::print("tournament: {} candidates x {} seeds, selected {} -> {}\n", ranking.size(),
             cfg.seeds.size(), fmt::join(top, ", "), dir.string());
  return kExitOk;
}

// ---- bb-test ------------------------------------------------------------

int run_bb_test(const std::string& command, const std::string& point, std::int64_t seed,
                double timeout, bool allow_failure) {
  if (command.find("{input}") == std::string::npos)
    throw ConfigError("--command must contain {input}");
  if (!(timeout > 0.0)) throw ConfigError("--timeout must be > 0");

  const auto input = fs::temp_directory_path() /
                     fmt::format("meshnas-bbtest-{}-{}", ::getpid(), seed);
  write_text(input, point + "\n");
  const auto expanded = expand_template(command, input, seed);
  const auto first = run_command(expanded, timeout);
  const auto second = run_command(expanded, timeout);
  std::error_code ec;
  fs::remove(input, ec);

  const auto result = parse_output(first.stdout_text, first.exit_code, first.timed_out);
  fmt::print("command: {}\n", expanded);
  fmt::print("exit_code: {}  timed_out: {}  wall_time_s: {:.3f}\n", first.exit_code,
             first.timed_out ? "yes" : "no", first.wall_time);
  fmt::print("status: {}\n", to_string(result.status));
  if (result.ok()) {
    fmt::print("objective: {}\n", shortest(result.objective));
    fmt::print("constraints: {}\n", result.constraints.size());
  }
  fmt::print("deterministic: {}\n",
             first.stdout_text == second.stdout_text && first.exit_code == second.exit_code
                 ? "yes"
                 : "no");
  if (result.ok()) {
    fmt::print("protocol OK\n");
    return kExitOk;
  }
  if (allow_failure && !first.timed_out && first.exit_code != 0) {
    fmt::print("protocol OK (declared failure)\n");
    return kExitOk;
  }
  fmt::print("protocol FAIL: {}\n", result.message);
  return kExitRuntime;
}

// ---- surrogate ----------------------------------------------------------

int run_surrogate(const std::string& kind_text, const std::string& spec_path,
                  const std::string& input, std::int64_t seed) {
  const auto kind = surrogate_kind_from_string(kind_text);
  SurrogateSpec spec = default_surrogate(kind);
  if (!spec_path.empty()) {
    spec = surrogate_from_json(load_json_file(spec_path));
    if (spec.kind != kind)
      throw ConfigError(fmt::format("--kind {} does not match spec kind {}", kind_text,
                                    to_string(spec.kind)));
  }
  const auto point = read_point_file(input);
  const auto r = eval_surrogate(spec, point, seed);
  if (!r.ok()) {
    std::cerr << "surrogate: " << r.message << '\n';
    return kExitRuntime;
  }
  std::string line = shortest(r.objective);
  for (double c : r.constraints) line += ' ' + shortest(c);
  std::cout << line << '\n';
  return kExitOk;
}

// ---- report -------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int run_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const auto run = load_json_file(dir / "run.json");
  const auto sub = run.value("subcommand", std::string());
  if (sub == "tournament") {
    std::ifstream in(dir / "report.txt");
    if (!in) throw IoError("missing report.txt");
    std::cout << in.rdbuf();
    return kExitOk;
  }
  if (sub != "nas" && sub != "hpo") throw ConfigError(fmt::format("unknown run kind '{}'", sub));
  const bool maximize = run.value("sense", std::string()) == "maximize";

  std::ifstream in(dir / "history.csv");
  if (!in) throw IoError(fmt::format("missing {}", (dir / "history.csv").string()));
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  const auto col = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError(fmt::format("history.csv lacks column {}", name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto objective_col = col("objective");
  const auto status_col = col("status");

  std::size_t rows = 0, feasible = 0;
  std::vector<std::string> best;
  double best_value = std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < header.size()) throw IoError("truncated history row");
    ++rows;
    if (cells[status_col] != "ok") continue;
    bool ok = true;
    for (std::size_t c = objective_col + 1; c < status_col; ++c)
      ok = ok && std::stod(cells[c]) <= 0.0;
    if (!ok) continue;
    ++feasible;
    const double v = std::stod(cells[objective_col]) * (maximize ? -1.0 : 1.0);
    if (v < best_value) {
      best_value = v;
      best = cells;
    }
  }
  fmt::print("run: {} ({})\n", sub, maximize ? "maximize" : "minimize");
  fmt::print("evaluations: {}  feasible: {}\n", rows, feasible);
  if (best.empty()) {
    fmt::print("no feasible evaluation\n");
    return kExitRuntime;
  }
  for (std::size_t c = 0; c < header.size(); ++c) fmt::print("best {} = {}\n", header[c], best[c]);

  std::ifstream report(dir / "report.txt");
  std::string rline;
  while (std::getline(report, rline)) {
    if (rline.rfind("best_eval_id = ", 0) == 0) {
      const bool same = rline.substr(15) == best[0];
      fmt::print("report consistent: {}\n", same ? "yes" : "no");
      if (!same) return kExitRuntime;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mesh adaptive direct search for architecture and hyperparameter search"};
  app.require_subcommand(1);

  // macs
  auto* macs = app.add_subcommand("macs", "Per-layer MAC/parameter table for a scaled network");
  std::string macs_family;
  std::vector<double> multipliers{1.0, 1.0, 1.0};
  std::string macs_format = "text";
  macs->add_option("--family", macs_family, "resnet18 or senet18")->required();
  macs->add_option("--multipliers", multipliers, "depth,width,resolution")
      ->delimiter(',')
      ->expected(3);
  macs->add_option("--format", macs_format, "text or csv");

  // nas
  auto* nas = app.add_subcommand("nas", "Minimize MACs subject to baseline accuracy");
  SearchFlags nas_flags;
  nas_flags.attach(nas);
  std::string nas_family;
  double nas_epsilon = 0.0;
  auto* nas_family_opt = nas->add_option("--family", nas_family, "resnet18 or senet18");
  auto* nas_epsilon_opt = nas->add_option("--epsilon", nas_epsilon, "Accuracy slack in percent");

  // hpo
  auto* hpo = app.add_subcommand("hpo", "Maximize accuracy over lr, weight decay, optimizer, batch");
  SearchFlags hpo_flags;
  hpo_flags.attach(hpo);

  // tournament
  auto* tour = app.add_subcommand("tournament", "Rank candidate blackboxes by mean accuracy");
  TournamentFlags tf;
  tf.config_opt = tour->add_option("--config", tf.config, "JSON tournament configuration");
  tf.candidate_opt = tour->add_option("--candidate", tf.candidates, "NAME=COMMAND (repeatable)");
  tf.seeds_opt = tour->add_option("--seeds", tf.seeds, "Comma-separated seeds");
  tf.timeout_opt = tour->add_option("--timeout", tf.timeout, "Per-run timeout in seconds");
  tf.top_opt = tour->add_option("--top", tf.top, "Number of candidates to select");
  tf.workers_opt = tour->add_option("--workers", tf.workers, "Concurrent runs");
  tf.out_opt = tour->add_option("--out", tf.out, "Output directory");

  // bb-test
  auto* bb = app.add_subcommand("bb-test", "Check a blackbox command against the protocol");
  std::string bb_command, bb_point = "1 1 1";
  std::int64_t bb_seed = 1;
  double bb_timeout = 60.0;
  bool bb_allow_failure = false;
  bb->add_option("--command", bb_command, "Command template with {input} and {seed}")->required();
  bb->add_option("--point", bb_point, "Canned point line written to {input}");
  bb->add_option("--seed", bb_seed, "Seed substituted for {seed}");
  bb->add_option("--timeout", bb_timeout, "Timeout in seconds");
  bb->add_flag("--allow-failure", bb_allow_failure, "Accept a clean nonzero exit as compliant");

  // surrogate
  auto* sur = app.add_subcommand("surrogate", "Analytic blackbox speaking the protocol");
  std::string sur_kind, sur_spec, sur_input;
  std::int64_t sur_seed = 0;
  sur->add_option("--kind", sur_kind,
                  "quadratic, nas_accuracy, hpo_accuracy, constant or failing")
      ->required();
  sur->add_option("--spec", sur_spec, "JSON surrogate parameters");
  sur->add_option("input", sur_input, "Point file")->required();
  sur->add_option("seed", sur_seed, "Integer seed");

  // report
  auto* rep = app.add_subcommand("report", "Summarize a run directory");
  std::string run_dir;
  rep->add_option("--run-dir", run_dir, "Directory written by nas, hpo or tournament")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*macs) return run_macs(macs_family, multipliers, macs_format);
    if (*nas)
      return run_nas_command(nas_flags, nas_family, nas_family_opt->count() > 0, nas_epsilon,
                             nas_epsilon_opt->count() > 0);
    if (*hpo) return run_hpo_command(hpo_flags);
    if (*tour) return run_tournament_command(tf);
    if (*bb) return run_bb_test(bb_command, bb_point, bb_seed, bb_timeout, bb_allow_failure);
    if (*sur) return run_surrogate(sur_kind, sur_spec, sur_input, sur_seed);
    if (*rep) return run_report(run_dir);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BoundsError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace meshnas::cli
