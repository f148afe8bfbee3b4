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

#include "meshnas/blackbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "meshnas/errors.hpp"
#include "meshnas/parallel.hpp"

namespace meshnas {

namespace {

// Shortest "%#.Ng" with N >= 12 that reads back to the same double.
std::string format_real(double x) {
  char buf[64];
  for (int precision = 12; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%#.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += '\'';
  return out;
}

bool parse_number(std::string_view token, double& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && std::isfinite(value);
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

// Appends whatever is available; returns false at EOF or on a hard error.
bool drain(int fd, std::string& sink) {
  char buf[4096];
  while (true) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
      sink.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) return false;
    if (errno == EINTR) continue;
    return errno == EAGAIN || errno == EWOULDBLOCK;
  }
}

class TempPointFile {
 public:
  explicit TempPointFile(const std::string& content) {
    auto pattern = (std::filesystem::temp_directory_path() / "meshnas-point-XXXXXX").string();
    std::vector<char> name(pattern.begin(), pattern.end());
    name.push_back('\0');
    const int fd = ::mkstemp(name.data());
    if (fd < 0) throw IoError(fmt::format("cannot create temp point file in {}", pattern));
    path_ = name.data();
    std::size_t written = 0;
    while (written < content.size()) {
      const ssize_t n = ::write(fd, content.data() + written, content.size() - written);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        ::close(fd);
        std::filesystem::remove(path_);
        throw IoError(fmt::format("cannot write temp point file {}", path_.string()));
      }
      written += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }
  ~TempPointFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempPointFile(const TempPointFile&) = delete;
  TempPointFile& operator=(const TempPointFile&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

void BlackboxConfig::validate() const {
  if (command_template.find("{input}") == std::string::npos)
    throw ConfigError("blackbox command must contain the {input} placeholder");
  if (!(timeout > 0.0)) throw ConfigError("blackbox timeout must be > 0");
  if (seeds.empty()) throw ConfigError("blackbox needs at least one seed");
}

std::string format_point_line(const SearchSpace& space, const Point& p) {
  if (space.empty()) throw DimensionError("search space has no variables");
  if (p.size() != space.size())
    throw DimensionError(fmt::format("point has {} coordinates, space has {} variables",
                                     p.size(), space.size()));
  std::string line;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) line += ' ';
    const auto& v = space[i];
    const double x = p[i];
    switch (v.kind) {
      case VariableKind::continuous:
        line += format_real(x);
        break;
      case VariableKind::discrete_set:
        if (x == std::floor(x) && std::abs(x) < 1e15)
          line += fmt::format("{}", static_cast<std::int64_t>(x));
        else
          line += format_real(x);
        break;
      case VariableKind::categorical:
        line += fmt::format("{}", static_cast<std::int64_t>(x));
        break;
    }
  }
  line += '\n';
  return line;
}

void write_point_file(const SearchSpace& space, const Point& p,
                      const std::filesystem::path& path) {
  const std::string line = format_point_line(space, p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << line;
  out.flush();
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
}

std::vector<double> read_point_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open point file {}", path.string()));
  std::string line;
  std::getline(in, line);
  std::istringstream tokens(line);
  std::vector<double> values;
  std::string token;
  while (tokens >> token) {
    double x = 0.0;
    if (!parse_number(token, x))
      throw DimensionError(fmt::format("malformed coordinate '{}' in {}", token, path.string()));
    values.push_back(x);
  }
  if (values.empty()) throw DimensionError(fmt::format("empty point file {}", path.string()));
  return values;
}

EvalResult parse_output(std::string_view text, int exit_code, bool timed_out) {
  if (timed_out) return EvalResult::failure("blackbox timed out", EvalStatus::timeout);
  if (exit_code != 0) return EvalResult::failure(fmt::format("blackbox exited with {}", exit_code));

  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
  };
  std::string_view last;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    for (char c : line) {
      if (!is_space(c)) {
        last = line;
        break;
      }
    }
    pos = end + 1;
  }
  if (last.empty()) return EvalResult::failure("blackbox printed no result line");

  std::vector<double> numbers;
  std::size_t i = 0;
  while (i < last.size()) {
    while (i < last.size() && is_space(last[i])) ++i;
    std::size_t j = i;
    while (j < last.size() && !is_space(last[j])) ++j;
    if (j > i) {
      double x = 0.0;
      if (!parse_number(last.substr(i, j - i), x))
        return EvalResult::failure(
            fmt::format("unparseable token '{}' in result line", last.substr(i, j - i)));
      numbers.push_back(x);
    }
    i = j;
  }
  return EvalResult::success(numbers.front(),
                             std::vector<double>(numbers.begin() + 1, numbers.end()));
}

ProcessOutcome run_command(const std::string& command, double timeout_seconds,
                           const std::filesystem::path& working_dir) {
  ProcessOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  const std::string dir = working_dir.string();

  int out_pipe[2], err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw IoError("pipe2 failed");
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    throw IoError("pipe2 failed");
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    throw IoError("fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    const int null_fd = ::open("/dev/null", O_RDONLY);
    if (null_fd >= 0) ::dup2(null_fd, STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    if (!dir.empty() && ::chdir(dir.c_str()) != 0) ::_exit(126);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  set_nonblocking(out_pipe[0]);
  set_nonblocking(err_pipe[0]);

  const auto deadline =
      start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(timeout_seconds));
  bool out_open = true, err_open = true, exited = false;
  int status = 0;

  while (!exited) {
    if (::waitpid(pid, &status, WNOHANG) == pid) {
      exited = true;
      break;
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      outcome.timed_out = true;
      ::killpg(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      exited = true;
      break;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd fds[2];
    nfds_t count = 0;
    if (out_open) fds[count++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[count++] = {err_pipe[0], POLLIN, 0};
    const int wait_ms = static_cast<int>(std::clamp<long long>(remaining, 1, 20));
    if (count == 0) {
      ::usleep(static_cast<useconds_t>(wait_ms) * 1000);
      continue;
    }
    if (::poll(fds, count, wait_ms) > 0) {
      if (out_open) out_open = drain(out_pipe[0], outcome.stdout_text);
      if (err_open) err_open = drain(err_pipe[0], outcome.stderr_text);
    }
  }
  // Reap anything the shell left behind in its group.
  ::killpg(pid, SIGKILL);
  if (out_open) drain(out_pipe[0], outcome.stdout_text);
  if (err_open) drain(err_pipe[0], outcome.stderr_text);
  ::close(out_pipe[0]);
  ::close(err_pipe[0]);

  if (WIFEXITED(status))
    outcome.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    outcome.exit_code = 128 + WTERMSIG(status);
  outcome.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

std::string expand_template(std::string_view command_template,
                            const std::filesystem::path& input, std::int64_t seed) {
  const std::string quoted = shell_quote(input.string());
  const std::string seed_text = std::to_string(seed);
  std::string out;
  std::size_t pos = 0;
  while (pos < command_template.size()) {
    if (command_template.compare(pos, 7, "{input}") == 0) {
      out += quoted;
      pos += 7;
    } else if (command_template.compare(pos, 6, "{seed}") == 0) {
      out += seed_text;
      pos += 6;
    } else {
      out += command_template[pos++];
    }
  }
  return out;
}

EvalResult evaluate_once(const BlackboxConfig& cfg, const SearchSpace& space, const Point& p,
                         std::int64_t seed) {
  TempPointFile input(format_point_line(space, p));
  const auto outcome =
      run_command(expand_template(cfg.command_template, input.path(), seed), cfg.timeout,
                  cfg.working_dir);
  EvalResult r = parse_output(outcome.stdout_text, outcome.exit_code, outcome.timed_out);
  r.wall_time = outcome.wall_time;
  if (!r.ok() && !outcome.stderr_text.empty()) {
    const auto tail = outcome.stderr_text.size() > 400
                          ? outcome.stderr_text.substr(outcome.stderr_text.size() - 400)
                          : outcome.stderr_text;
    r.message += fmt::format(" (stderr: {})", tail);
  }
  return r;
}

AggregatedEval aggregate(std::vector<EvalResult> per_seed) {
  AggregatedEval agg;
  agg.per_seed = std::move(per_seed);
  for (const auto& r : agg.per_seed) agg.wall_time = std::max(agg.wall_time, r.wall_time);
  if (agg.per_seed.empty()) {
    agg.message = "no runs";
    return agg;
  }
  for (const auto& r : agg.per_seed) {
    if (!r.ok()) {
      agg.status = r.status;
      agg.message = r.message;
      return agg;
    }
  }
  const std::size_t m = agg.per_seed.front().constraints.size();
  agg.mean_constraints.assign(m, 0.0);
  double sum = 0.0;
  for (const auto& r : agg.per_seed) {
    if (r.constraints.size() != m) {
      agg.status = EvalStatus::failed;
      agg.message = "runs disagree on the number of constraint values";
      return agg;
    }
    sum += r.objective;
    for (std::size_t j = 0; j < m; ++j) agg.mean_constraints[j] += r.constraints[j];
  }
  const double k = static_cast<double>(agg.per_seed.size());
  agg.mean_objective = sum / k;
  for (auto& c : agg.mean_constraints) c /= k;
  agg.status = EvalStatus::ok;
  return agg;
}

AggregatedEval evaluate_aggregate(const BlackboxConfig& cfg, const SearchSpace& space,
                                  const Point& p) {
  cfg.validate();
  std::vector<EvalResult> runs(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    try {
      runs[i] = evaluate_once(cfg, space, p, cfg.seeds[i]);
    } catch (const std::exception& e) {
      runs[i] = EvalResult::failure(e.what());
    }
  });
  return aggregate(std::move(runs));
}

AggregateEvaluator make_blackbox_evaluator(BlackboxConfig cfg, SearchSpace wire_space) {
  cfg.validate();
  return [cfg = std::move(cfg), space = std::move(wire_space)](const Point& p) {
    return evaluate_aggregate(cfg, space, p);
  };
}

}  // namespace meshnas
