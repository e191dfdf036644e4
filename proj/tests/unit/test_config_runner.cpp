#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mems/config.hpp"
#include "mems/runner.hpp"

using namespace mems;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("memsplate_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

int parse_error_line(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

RunConfig small(RunMode mode) {
  RunConfig c;
  c.mode = mode;
  c.n_r = 33;
  c.n_eta = 33;
  return c;
}

}  // namespace

TEST_SUITE("cli_io") {
  TEST_CASE("empty text gives the defaults") {
    CHECK(parse_config("") == RunConfig{});
    CHECK(parse_config("# nothing\n\n; still nothing\n") == RunConfig{});
  }

  TEST_CASE("full configuration round trip") {
    const RunConfig c = parse_config(R"(
[model]
epsilon = 0.1   # aspect ratio
lambda = 2.5
beta = 2
tau = 1
a = 0.5
[grid]
n_r = 65
n_eta = 33
[time]
dt = 1e-3
t_end = 0.5
touchdown_tol = 0.02
norm_cap = 1e5
steady_tol = 1e-7
[run]
mode = branch
output = out/dir
seed = 42
init_amplitude = 0.2
lambda_step = 0.5
max_points = 30
lambdas = 1, 2.5 ,4
corpus_size = 20
)");
    CHECK(c.model.epsilon == 0.1);
    CHECK(c.model.lambda == 2.5);
    CHECK(c.model.beta == 2);
    CHECK(c.model.tau == 1);
    CHECK(c.model.a == 0.5);
    CHECK(c.n_r == 65);
    CHECK(c.n_eta == 33);
    CHECK(c.time.dt == 1e-3);
    CHECK(c.time.t_end == 0.5);
    CHECK(c.time.touchdown_tol == 0.02);
    CHECK(c.time.norm_cap == 1e5);
    CHECK(c.time.steady_tol == 1e-7);
    CHECK(c.mode == RunMode::branch);
    CHECK(c.output_path == "out/dir");
    CHECK(c.seed == 42);
    CHECK(c.init_amplitude == 0.2);
    CHECK(c.lambda_step == 0.5);
    CHECK(c.max_points == 30);
    CHECK(c.lambdas == std::vector<double>{1, 2.5, 4});
    CHECK(c.corpus_size == 20);
  }

  TEST_CASE("parse errors carry the line and key") {
    CHECK(parse_error_line("[model]\nbeta = 0\n") == 2);
    CHECK(parse_error_line("[model]\nepsilon = -1\n") == 2);
    CHECK(parse_error_line("[model]\n\nlambda = abc\n") == 3);
    CHECK(parse_error_line("[grid]\nn_r = 8\n") == 2);
    CHECK(parse_error_line("[grid]\nn_r = 12.5\n") == 2);
    CHECK(parse_error_line("[plate]\n") == 1);
    CHECK(parse_error_line("[model\n") == 1);
    CHECK(parse_error_line("lambda = 1\n") == 1);
    CHECK(parse_error_line("[model]\nvoltage = 3\n") == 2);
    CHECK(parse_error_line("[model]\nlambda 3\n") == 2);
    CHECK(parse_error_line("[time]\ntouchdown_tol = 1\n") == 2);
    CHECK(parse_error_line("[run]\nmode = sprint\n") == 2);
    CHECK(parse_error_line("[run]\nlambdas = 1,,2\n") == 2);
    try {
      parse_config("[model]\nbeta = -2\n");
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.key() == "model.beta");
      CHECK(e.kind() == ErrorKind::parse);
    }
  }

  TEST_CASE("overrides") {
    RunConfig c;
    apply_override(c, "model.lambda=3.5");
    apply_override(c, "grid.n_r = 17");
    apply_override(c, "run.mode=eigen");
    CHECK(c.model.lambda == 3.5);
    CHECK(c.n_r == 17);
    CHECK(c.mode == RunMode::eigen);
    CHECK_THROWS_AS(apply_override(c, "model.lambda"), ParseError);
    CHECK_THROWS_AS(apply_override(c, "lambda=3"), ParseError);
    CHECK_THROWS_AS(apply_override(c, "model.beta=0"), ParseError);
  }

  TEST_CASE("validate names the offending key") {
    RunConfig c;
    c.time.dt = 0;
    try {
      c.validate();
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.key() == "time.dt");
    }
  }

  TEST_CASE("mode names") {
    for (RunMode m : {RunMode::potential, RunMode::simulate, RunMode::branch, RunMode::eigen, RunMode::verify})
      CHECK(parse_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_mode("bogus"), PreconditionError);
  }

  TEST_CASE("eigen run writes the eigenfunction and a summary") {
    RunConfig c = small(RunMode::eigen);
    const fs::path dir = scratch("eigen");
    c.output_path = dir.string();
    const RunReport rep = run(c);
    const auto j = nlohmann::json::parse(rep.summary);
    CHECK(j["mode"] == "eigen");
    CHECK(j["status"] == "ok");
    CHECK(j["zeta_positive"] == true);
    CHECK(std::abs(j["rel_error"].get<double>()) < 5e-3);
    CHECK(fs::exists(dir / "eigen.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    const std::string csv = slurp(dir / "eigen.csv");
    CHECK(csv.rfind("r,zeta\n", 0) == 0);
    CHECK(csv.find("0.0000000000000000e+00,") != std::string::npos);
  }

  TEST_CASE("potential run") {
    RunConfig c = small(RunMode::potential);
    c.init_amplitude = 0.3;
    const auto j = nlohmann::json::parse(run(c).summary);
    CHECK(j["status"] == "ok");
    CHECK(j["solver_residual"].get<double>() <= 1e-10);
    CHECK(j["min_gap"].get<double>() == doctest::Approx(0.7));
    CHECK(j["g_min"].get<double>() > 0);

    c.init_amplitude = 1.2;
    CHECK_THROWS_AS(run(c), DomainError);
  }

  TEST_CASE("simulate run and sweep") {
    RunConfig c = small(RunMode::simulate);
    c.time.dt = 1e-3;
    c.time.t_end = 0.01;
    c.model.lambda = 1.0;
    const auto single = nlohmann::json::parse(run(c).summary);
    CHECK(single["status"] == "completed");
    CHECK(single["steps"] == 10);

    c.lambdas = {0.5, 40.0};
    c.time.t_end = 1.0;
    const fs::path dir = scratch("sweep");
    c.output_path = dir.string();
    const RunReport rep = run(c);
    CHECK(rep.touchdown);
    const auto j = nlohmann::json::parse(rep.summary);
    CHECK(j["status"] == "touchdown");
    REQUIRE(j["runs"].size() == 2);
    CHECK(j["runs"][0]["status"] == "converged_to_steady");
    CHECK(j["runs"][1]["status"] == "touchdown");
    CHECK(j["runs"][1].contains("touchdown_time"));
    CHECK(fs::exists(dir / "simulate_0.csv"));
    CHECK(fs::exists(dir / "simulate_1.csv"));
  }

  TEST_CASE("outputs are deterministic") {
    RunConfig c = small(RunMode::verify);
    c.corpus_size = 10;
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    c.output_path = a.string();
    const RunReport ra = run(c);
    c.output_path = b.string();
    const RunReport rb = run(c);
    CHECK(slurp(a / "verify.csv") == slurp(b / "verify.csv"));
    const auto ja = nlohmann::json::parse(ra.summary), jb = nlohmann::json::parse(rb.summary);
    CHECK(ja["checks"] == jb["checks"]);
    CHECK(ja["status"] == "pass");
  }

  TEST_CASE("branch run reports the fold") {
    RunConfig c = small(RunMode::branch);
    const auto j = nlohmann::json::parse(run(c).summary);
    CHECK(j["status"] == "fold");
    CHECK(j["lambda_star"].get<double>() == doctest::Approx(12.8552).epsilon(1e-4));
  }
}
