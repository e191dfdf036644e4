// Command-line front end: memsplate <mode> [--config FILE] [--set section.key=value ...]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mems/config.hpp"
#include "mems/runner.hpp"

namespace {

constexpr int exit_parse = 2;
constexpr int exit_numerical = 3;
constexpr int exit_touchdown = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mems::ParseError(0, "", "cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void report_error(const mems::Error& e) {
  std::cerr << "error [" << mems::to_string(e.kind()) << "]: " << e.what() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electrostatic plate model: potentials, dynamics, stationary branch, spectra"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool fail_on_touchdown = false;
  for (const char* mode : {"potential", "simulate", "branch", "eigen", "verify"}) {
    CLI::App* sub = app.add_subcommand(mode);
    sub->add_option("--config", config_path, "sectioned key=value file");
    sub->add_option("--set", overrides, "override, e.g. --set model.lambda=2")->take_all();
    if (std::string(mode) == "simulate")
      sub->add_flag("--fail-on-touchdown", fail_on_touchdown, "exit with status 4 when a run touches down");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_parse;
  }

  mems::RunConfig config;
  try {
    config = config_path.empty() ? mems::RunConfig{} : mems::parse_config(read_file(config_path));
    for (const std::string& item : overrides) mems::apply_override(config, item);
    config.mode = mems::parse_mode(app.get_subcommands().front()->get_name());
    config.validate();
  } catch (const mems::Error& e) {
    report_error(e);
    return exit_parse;
  }

  try {
    const mems::RunReport report = mems::run(config);
    std::cout << report.summary << '\n';
    if (fail_on_touchdown && report.touchdown) return exit_touchdown;
    return 0;
  } catch (const mems::Error& e) {
    report_error(e);
    return e.kind() == mems::ErrorKind::parse ? exit_parse : exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << '\n';
    return exit_numerical;
  }
}
