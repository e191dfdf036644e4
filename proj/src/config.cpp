#include "mems/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>

namespace mems {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view text, int line, const std::string& key) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(value))
    throw ParseError(line, key, "malformed number '" + std::string(text) + "'");
  return value;
}

template <typename Int>
Int to_integer(std::string_view text, int line, const std::string& key) {
  Int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError(line, key, "malformed integer '" + std::string(text) + "'");
  return value;
}

void require(bool ok, int line, const std::string& key, const char* what) {
  if (!ok) throw ParseError(line, key, what);
}

using Setter = std::function<void(RunConfig&, std::string_view, int, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [](auto get, auto check, const char* what) -> Setter {
      return [=](RunConfig& c, std::string_view v, int line, const std::string& key) {
        const double x = to_double(v, line, key);
        require(check(x), line, key, what);
        get(c) = x;
      };
    };
    auto nonneg = [](double x) { return x >= 0; };
    auto pos = [](double x) { return x > 0; };

    t["model.epsilon"] = real([](RunConfig& c) -> double& { return c.model.epsilon; }, nonneg, "epsilon must be >= 0");
    t["model.lambda"] = real([](RunConfig& c) -> double& { return c.model.lambda; }, nonneg, "lambda must be >= 0");
    t["model.beta"] = real([](RunConfig& c) -> double& { return c.model.beta; }, pos, "beta must be > 0");
    t["model.tau"] = real([](RunConfig& c) -> double& { return c.model.tau; }, nonneg, "tau must be >= 0");
    t["model.a"] = real([](RunConfig& c) -> double& { return c.model.a; }, nonneg, "a must be >= 0");

    auto grid_size = [](Index RunConfig::*field) -> Setter {
      return [=](RunConfig& c, std::string_view v, int line, const std::string& key) {
        const auto n = to_integer<long>(v, line, key);
        require(n >= RadialGrid::min_nodes, line, key, "grid needs at least 9 nodes per direction");
        c.*field = static_cast<Index>(n);
      };
    };
    t["grid.n_r"] = grid_size(&RunConfig::n_r);
    t["grid.n_eta"] = grid_size(&RunConfig::n_eta);

    t["time.dt"] = real([](RunConfig& c) -> double& { return c.time.dt; }, pos, "dt must be > 0");
    t["time.t_end"] = real([](RunConfig& c) -> double& { return c.time.t_end; }, pos, "t_end must be > 0");
    t["time.touchdown_tol"] = real([](RunConfig& c) -> double& { return c.time.touchdown_tol; },
                                   [](double x) { return x > 0 && x < 1; }, "touchdown_tol must lie in (0, 1)");
    t["time.norm_cap"] = real([](RunConfig& c) -> double& { return c.time.norm_cap; }, pos, "norm_cap must be > 0");
    t["time.steady_tol"] = real([](RunConfig& c) -> double& { return c.time.steady_tol; }, pos,
                                "steady_tol must be > 0");

    t["run.mode"] = [](RunConfig& c, std::string_view v, int line, const std::string& key) {
      try {
        c.mode = parse_mode(v);
      } catch (const PreconditionError& e) {
        throw ParseError(line, key, e.what());
      }
    };
    t["run.output"] = [](RunConfig& c, std::string_view v, int, const std::string&) { c.output_path = std::string(v); };
    t["run.seed"] = [](RunConfig& c, std::string_view v, int line, const std::string& key) {
      c.seed = to_integer<std::uint64_t>(v, line, key);
    };
    t["run.init_amplitude"] = real([](RunConfig& c) -> double& { return c.init_amplitude; },
                                   nonneg, "init_amplitude must be >= 0");
    t["run.lambda_step"] = real([](RunConfig& c) -> double& { return c.lambda_step; }, pos, "lambda_step must be > 0");
    t["run.max_points"] = [](RunConfig& c, std::string_view v, int line, const std::string& key) {
      const int n = to_integer<int>(v, line, key);
      require(n >= 2, line, key, "max_points must be >= 2");
      c.max_points = n;
    };
    t["run.corpus_size"] = [](RunConfig& c, std::string_view v, int line, const std::string& key) {
      const int n = to_integer<int>(v, line, key);
      require(n >= 1, line, key, "corpus_size must be >= 1");
      c.corpus_size = n;
    };
    t["run.lambdas"] = [](RunConfig& c, std::string_view v, int line, const std::string& key) {
      std::vector<double> values;
      while (!v.empty()) {
        const auto comma = v.find(',');
        const std::string_view item = trim(v.substr(0, comma));
        const double x = to_double(item, line, key);
        require(x >= 0, line, key, "sweep lambdas must be >= 0");
        values.push_back(x);
        v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
      }
      c.lambdas = std::move(values);
    };
    return t;
  }();
  return table;
}

void assign(RunConfig& config, const std::string& key, std::string_view value, int line) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ParseError(line, key, "unknown key");
  it->second(config, trim(value), line, key);
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::potential: return "potential";
    case RunMode::simulate: return "simulate";
    case RunMode::branch: return "branch";
    case RunMode::eigen: return "eigen";
    case RunMode::verify: return "verify";
  }
  return "unknown";
}

RunMode parse_mode(std::string_view text) {
  for (RunMode m : {RunMode::potential, RunMode::simulate, RunMode::branch, RunMode::eigen, RunMode::verify})
    if (text == to_string(m)) return m;
  throw PreconditionError("unknown mode '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  auto check = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ParseError(0, key, what);
  };
  check(std::isfinite(model.epsilon) && model.epsilon >= 0, "model.epsilon", "epsilon must be >= 0");
  check(std::isfinite(model.lambda) && model.lambda >= 0, "model.lambda", "lambda must be >= 0");
  check(std::isfinite(model.beta) && model.beta > 0, "model.beta", "beta must be > 0");
  check(std::isfinite(model.tau) && model.tau >= 0, "model.tau", "tau must be >= 0");
  check(std::isfinite(model.a) && model.a >= 0, "model.a", "a must be >= 0");
  check(n_r >= RadialGrid::min_nodes, "grid.n_r", "grid needs at least 9 nodes per direction");
  check(n_eta >= RadialGrid::min_nodes, "grid.n_eta", "grid needs at least 9 nodes per direction");
  check(time.dt > 0, "time.dt", "dt must be > 0");
  check(time.t_end > 0, "time.t_end", "t_end must be > 0");
  check(time.touchdown_tol > 0 && time.touchdown_tol < 1, "time.touchdown_tol", "touchdown_tol must lie in (0, 1)");
  check(time.norm_cap > 0, "time.norm_cap", "norm_cap must be > 0");
  check(time.steady_tol > 0, "time.steady_tol", "steady_tol must be > 0");
  check(std::isfinite(init_amplitude) && init_amplitude >= 0, "run.init_amplitude", "init_amplitude must be >= 0");
  check(lambda_step > 0, "run.lambda_step", "lambda_step must be > 0");
  check(max_points >= 2, "run.max_points", "max_points must be >= 2");
  check(corpus_size >= 1, "run.corpus_size", "corpus_size must be >= 1");
  for (double l : lambdas) check(std::isfinite(l) && l >= 0, "run.lambdas", "sweep lambdas must be >= 0");
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "", "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "grid" && section != "time" && section != "run")
        throw ParseError(line_no, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, std::string(line), "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (section.empty()) throw ParseError(line_no, key, "key outside of any section");
    assign(config, section + "." + key, line.substr(eq + 1), line_no);
  }
  config.validate();
  return config;
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ParseError(0, std::string(assignment), "expected section.key=value");
  const std::string key(trim(assignment.substr(0, eq)));
  assign(config, key, assignment.substr(eq + 1), 0);
}

}  // namespace mems
