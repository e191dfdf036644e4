#ifndef MEMS_RUNNER_HPP
#define MEMS_RUNNER_HPP

#include <string>
#include <vector>

#include "mems/config.hpp"

namespace mems {

struct RunReport {
  std::string summary;             // JSON object, also written to <output>/summary.json
  std::vector<std::string> files;  // paths written, in order
  bool touchdown = false;          // simulate mode: some run ended in touchdown
};

/// Executes the configured mode. Module errors propagate as mems::Error.
///
/// CSV files (header row, '%.16e' numbers):
///   potential  potential.csv  r,eta,phi        load.csv  r,v,g
///   simulate   simulate.csv   t,min_u,l2_u,grad_sq,energy   (sweep: simulate_<k>.csv)
///   branch     branch.csv     lambda,min_u,l2_u,leading_eig,stable
///   eigen      eigen.csv      r,zeta
///   verify     verify.csv     check,value,threshold,pass
RunReport run(const RunConfig& config);

}  // namespace mems

#endif  // MEMS_RUNNER_HPP
