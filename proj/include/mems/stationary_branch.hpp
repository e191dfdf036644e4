#ifndef MEMS_STATIONARY_BRANCH_HPP
#define MEMS_STATIONARY_BRANCH_HPP

#include <optional>
#include <vector>

#include "mems/plate_dynamics.hpp"
#include "mems/types.hpp"

namespace mems {

/// One sample of the stationary branch.
struct BranchPoint {
  double lambda = 0;
  PlateProfile profile;
  double leading_eig = 0;  // largest real part of the linearization spectrum
  bool stable = false;     // leading_eig < 0
  double arclength = 0;

  explicit BranchPoint(const PlateProfile& u, double lam = 0) : lambda(lam), profile(u) {}
};

/// F(lambda, v) = v + lambda A^{-1} g_eps(v) - a ||grad v||^2 A^{-1} Delta v.
Eigen::VectorXd residual_F(double lambda, const PlateProfile& v, const ModelParams& params,
                           const ClampedOperator& op);

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;         // on ||F||_inf
  double jacobian_step = 1e-6;      // h_J = jacobian_step * (1 + ||v||_inf)
};

struct NewtonReport {
  PlateProfile root;
  int iterations = 0;
  std::vector<double> residual_history;  // ||F||_inf before each update, then at the root
};

/// Newton iteration on F(lambda, .) with a forward-difference Jacobian.
/// Throws NonConvergenceError after max_iterations and DomainError if an
/// iterate leaves the admissible set.
NewtonReport newton_iterate(PlateModel& model, double lambda, const PlateProfile& guess,
                            const NewtonOptions& options = {});

PlateProfile newton_solve(double lambda, const PlateProfile& guess, const ModelParams& params,
                          const NewtonOptions& options = {});

/// Forward-difference Jacobian of F(lambda, .) on the free nodes.
Eigen::MatrixXd residual_jacobian(PlateModel& model, double lambda, const PlateProfile& v, double step);

struct ContinuationOptions {
  NewtonOptions newton{};
  double min_step_fraction = 1.0 / 1024;  // step underflow relative to the initial step
  double switch_slope = 0.5;              // lambda-component of the unit tangent below which arclength takes over
  double fold_rel_width = 1e-4;           // bisection target for the fold bracket in lambda
  double fold_arclength_width = 1e-4;     // and for its width in (scaled) arclength
  double min_gap = 0.05;                  // stop once min(1 + U) drops below this
  int post_fold_points = 3;               // experimental upper-branch samples past the fold
  int spectrum_size = 4;
};

struct BranchResult {
  std::vector<BranchPoint> points;
  bool fold_found = false;
  double lambda_star = 0;        // sup of lambda over computed stable points
  std::optional<Index> fold_index;  // index into points of the refined fold sample
};

/// Branch of stationary solutions from (0, 0): natural-parameter steps with
/// halving on failure, pseudo-arclength near the fold, bisection of the fold
/// bracket on the sign of d lambda / ds.
BranchResult continue_branch(const ModelParams& params, const RadialGrid& grid, double lambda_step_init,
                             int max_points, const ContinuationOptions& options = {});

/// Eigenvalues of L = -A + Dh(U) ordered by decreasing real part; the first
/// k real parts are returned and the point's leading_eig / stable fields are
/// updated.
std::vector<double> linearized_spectrum(BranchPoint& point, const ModelParams& params, int k);
std::vector<double> linearized_spectrum(PlateModel& model, BranchPoint& point, int k);

/// Dense matrix of -A + Dh(U) on the free nodes (Dh by forward differences).
Eigen::MatrixXd linearization_matrix(PlateModel& model, const PlateProfile& u, double lambda);

}  // namespace mems

#endif  // MEMS_STATIONARY_BRANCH_HPP
