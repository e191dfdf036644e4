#ifndef MEMS_PLATE_DYNAMICS_HPP
#define MEMS_PLATE_DYNAMICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "mems/elliptic_solver.hpp"
#include "mems/types.hpp"

namespace mems {

/// Radial Delta_h on r_0..r_{n-2} with u(1) = 0 and the axis closure
/// 4 (u_1 - u_0) / h^2.
template <typename Scalar>
MatrixX<Scalar> dirichlet_laplacian(const RadialGridT<Scalar>& grid) {
  const Index m = grid.n_r() - 1;
  const Scalar h = grid.h_r(), h2 = h * h;
  MatrixX<Scalar> lap = MatrixX<Scalar>::Zero(m, m);
  lap(0, 0) = -4 / h2;
  lap(0, 1) = 4 / h2;
  for (Index i = 1; i < m; ++i) {
    const Scalar r = grid.r(i);
    lap(i, i - 1) = 1 / h2 - 1 / (2 * h * r);
    lap(i, i) = -2 / h2;
    if (i + 1 < m) lap(i, i + 1) = 1 / h2 + 1 / (2 * h * r);
  }
  return lap;
}

/// beta Delta_h^2 - tau Delta_h on the free nodes. The outer Laplacian reads
/// Delta_h u at r = 1 with the clamped ghost u(1 + h) = u(1 - h).
template <typename Scalar>
MatrixX<Scalar> clamped_matrix(const ModelParamsT<Scalar>& params, const RadialGridT<Scalar>& grid) {
  const Index n = grid.n_r(), m = n - 1;
  const Scalar h = grid.h_r(), h2 = h * h;
  MatrixX<Scalar> lap(n, m);  // Delta_h at r_0..r_{n-1}
  lap.topRows(m) = dirichlet_laplacian(grid);
  lap.row(n - 1).setZero();
  lap(n - 1, n - 2) = 2 / h2;
  MatrixX<Scalar> outer = MatrixX<Scalar>::Zero(m, n);  // Delta_h rows 0..n-2 on all nodes
  outer(0, 0) = -4 / h2;
  outer(0, 1) = 4 / h2;
  for (Index i = 1; i < m; ++i) {
    const Scalar r = grid.r(i);
    outer(i, i - 1) = 1 / h2 - 1 / (2 * h * r);
    outer(i, i) = -2 / h2;
    outer(i, i + 1) = 1 / h2 + 1 / (2 * h * r);
  }
  return params.beta * (outer * lap) - params.tau * lap.topRows(m);
}

/// Radial beta*Delta^2 - tau*Delta with clamped conditions u(1) = u'(1) = 0.
///
/// The matrix acts on the free nodes r_0..r_{n-2}; u(1) = 0 is implicit and
/// u'(1) = 0 enters through the ghost u(1 + h) = u(1 - h). Delta_h uses the
/// axis closure 4 (u_1 - u_0) / h^2. With the radial weights returned by
/// weights(), W * matrix() is symmetric positive definite.
///
/// Full-length vectors (n_r entries, boundary last) are accepted and returned
/// by apply() and solve().
class ClampedOperator {
 public:
  ClampedOperator(const ModelParams& params, const RadialGrid& grid);

  const RadialGrid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Index free_size() const { return matrix_.rows(); }

  /// Symmetrizing weights of Delta_h (h/8 on the axis, r_i elsewhere).
  Eigen::VectorXd weights() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  /// A^{-1} rhs; the boundary entry of rhs is ignored and returned as zero.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Discrete Laplacian on the free nodes with the clamped ghost (n-1 x n-1).
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }

 private:
  ModelParams params_;
  RadialGrid grid_;
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd laplacian_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

ClampedOperator assemble_A(const ModelParams& params, const RadialGrid& grid);

/// ||grad v||_2^2 = 2 pi int_0^1 v'(r)^2 r dr (trapezoid, centered v').
double grad_norm_sq(const PlateProfile& v);

/// Problem context shared by time stepping and continuation: operator,
/// cached potential solver and parameters.
class PlateModel {
 public:
  PlateModel(const ModelParams& params, const RadialGrid& grid);

  const ModelParams& params() const { return params_; }
  const RadialGrid& grid() const { return grid_; }
  const ClampedOperator& op() const { return op_; }
  PotentialSolver& potential_solver() { return solver_; }

  Eigen::VectorXd load(const PlateProfile& v) { return solver_.load(v, params_); }
  /// h(v) = -lambda g_eps(v) + a ||grad v||^2 Delta v with the current lambda.
  Eigen::VectorXd rhs(const PlateProfile& v) { return rhs(v, params_.lambda); }
  Eigen::VectorXd rhs(const PlateProfile& v, double lambda);

 private:
  ModelParams params_;
  RadialGrid grid_;
  ClampedOperator op_;
  PotentialSolver solver_;
};

Eigen::VectorXd rhs_h(const PlateProfile& v, const ModelParams& params);

struct StepResult {
  PlateProfile u;
  bool admissible;  // min(1 + u) > 0 after the step
};

/// First-order IMEX Euler: (I + dt A) u_new = u + dt h(u).
class ImexStepper {
 public:
  ImexStepper(PlateModel& model, double dt);
  double dt() const { return dt_; }
  StepResult step(const PlateProfile& u);

 private:
  PlateModel* model_;
  double dt_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

StepResult step(const PlateProfile& u, double dt, const ModelParams& params, const ClampedOperator& op);

enum class SimStatus { completed, touchdown, norm_blowup, converged_to_steady };
std::string to_string(SimStatus status);

struct SimTolerances {
  double touchdown = 1e-2;  // stop when min(1 + u) <= touchdown
  double norm_cap = 1e6;    // stop when the discrete W^2 norm exceeds it
  double steady = 1e-6;     // stop when ||u_new - u||_inf / dt <= steady

  void validate() const;
};

struct SimRecord {
  double t;
  double min_u;
  double l2_norm;
  double grad_sq;
  double energy_proxy;  // 1/2 <A u, u> + a/4 ||grad u||^4
};

struct SimTrace {
  explicit SimTrace(const RadialGrid& grid) : final_state(grid) {}

  std::vector<SimRecord> records;
  SimStatus status = SimStatus::completed;
  double t_final = 0;
  PlateProfile final_state;
};

using SimObserver = std::function<void(double t, const PlateProfile& u)>;

/// Integrates from u0 until t_end or a terminal event. The observer, if
/// set, sees every recorded state (including t = 0).
SimTrace simulate(const PlateProfile& u0, const ModelParams& params, double t_end, double dt,
                  const SimTolerances& tols = {}, const SimObserver& observer = {});

/// Same, reusing a prepared model.
SimTrace simulate(PlateModel& model, const PlateProfile& u0, double t_end, double dt,
                  const SimTolerances& tols = {}, const SimObserver& observer = {});

double energy_proxy(const ClampedOperator& op, const PlateProfile& u, double a);

}  // namespace mems

#endif  // MEMS_PLATE_DYNAMICS_HPP
