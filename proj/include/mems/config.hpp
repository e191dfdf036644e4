#ifndef MEMS_CONFIG_HPP
#define MEMS_CONFIG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mems/types.hpp"

namespace mems {

enum class RunMode { potential, simulate, branch, eigen, verify };

std::string to_string(RunMode mode);
RunMode parse_mode(std::string_view text);  // throws PreconditionError

struct TimeSettings {
  double dt = 1e-4;
  double t_end = 0.05;
  double touchdown_tol = 1e-2;
  double norm_cap = 1e6;
  double steady_tol = 1e-6;

  bool operator==(const TimeSettings&) const = default;
};

/// Experiment description. Text form (all keys optional):
///
///   [model]  epsilon lambda beta tau a
///   [grid]   n_r n_eta
///   [time]   dt t_end touchdown_tol norm_cap steady_tol
///   [run]    mode output seed init_amplitude lambda_step max_points
///            lambdas corpus_size
///
/// `lambdas` is a comma-separated list; when present, simulate mode sweeps
/// over it instead of using model.lambda. The initial deflection of
/// potential and simulate runs is -init_amplitude (1 - r^2)^2; amplitudes
/// >= 1 pass parsing and fail in the solvers as non-admissible.
struct RunConfig {
  ModelParams model{};
  Index n_r = 129;
  Index n_eta = 129;
  TimeSettings time{};
  RunMode mode = RunMode::simulate;
  std::string output_path;  // directory for CSV/JSON; empty writes nothing
  std::uint64_t seed = 20261015;
  double init_amplitude = 0.1;
  double lambda_step = 1.0;
  int max_points = 60;
  std::vector<double> lambdas;
  int corpus_size = 100;

  /// Re-checks every invariant; throws ParseError naming the key.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the sectioned key=value text. Unknown sections or keys, malformed
/// values and violated invariants raise ParseError with line and key.
RunConfig parse_config(std::string_view text);

/// Applies one "section.key=value" override (line number 0 in errors).
void apply_override(RunConfig& config, std::string_view assignment);

}  // namespace mems

#endif  // MEMS_CONFIG_HPP
