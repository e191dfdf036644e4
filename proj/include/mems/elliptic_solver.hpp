#ifndef MEMS_ELLIPTIC_SOLVER_HPP
#define MEMS_ELLIPTIC_SOLVER_HPP

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <memory>

#include "mems/geometry_transform.hpp"
#include "mems/types.hpp"

namespace mems {

enum class OperatorForm {
  non_divergence,  // 9-point stencil of L_v with centered mixed term
  divergence       // conservative flux form with face-averaged coefficients
};

/// Stencil weights of the divergence-form discretization at node (i, j),
/// same layout as operator_stencil.
Stencil9 divergence_stencil(const TransformedCoeffs& coeffs, Index i, Index j);

/// Direct solver for -L_v Phi = F with Phi = 0 on the cylinder boundary.
///
/// Unknowns are the nodes with r < 1 and 0 < eta < 1, eta varying fastest.
/// The sparsity pattern depends only on the grid, so the symbolic analysis
/// is done once and reused by every factorization. Not thread-safe; use one
/// instance per thread.
class PotentialSolver {
 public:
  explicit PotentialSolver(const RadialGrid& grid);

  const RadialGrid& grid() const { return grid_; }

  PotentialField solve_dirichlet(const TransformedCoeffs& coeffs, const ScalarField2D& rhs,
                                 OperatorForm form = OperatorForm::non_divergence);

  /// phi_v = Phi + eta with -L_v Phi = L_v eta.
  PotentialField solve_potential(const PlateProfile& v, const ModelParams& params);

  /// Plate load g_eps(v) per r-node.
  Eigen::VectorXd load(const PlateProfile& v, const ModelParams& params);

  /// Relative max-norm residual of the most recent linear solve.
  double last_residual() const { return last_residual_; }

 private:
  Index unknown(Index i, Index j) const { return i * (grid_.n_eta() - 2) + (j - 1); }
  Index unknowns() const { return (grid_.n_r() - 1) * (grid_.n_eta() - 2); }

  RadialGrid grid_;
  Eigen::SparseMatrix<double> matrix_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> lu_;
  bool analyzed_ = false;
  double last_residual_ = 0;
};

PotentialField solve_dirichlet(const TransformedCoeffs& coeffs, const ScalarField2D& rhs,
                               OperatorForm form = OperatorForm::non_divergence);

/// f_v = L_v eta = eps^2 eta [2 v'^2 / (1 + v)^2 - (v'' + v'/r) / (1 + v)].
ScalarField2D compute_f_v(const PlateProfile& v, const ModelParams& params);

PotentialField solve_potential(const PlateProfile& v, const ModelParams& params);

/// d_eta phi at eta = 1 per r-node (three-point one-sided stencil).
Eigen::VectorXd trace_eta_derivative(const PotentialField& phi);

/// (1 + eps^2 |v'|^2) / (1 + v)^2 * |d_eta phi_v(., 1)|^2 per r-node.
Eigen::VectorXd g_eps(const PlateProfile& v, const ModelParams& params);

}  // namespace mems

#endif  // MEMS_ELLIPTIC_SOLVER_HPP
