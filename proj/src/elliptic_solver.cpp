#include "mems/elliptic_solver.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "mems/stencils.hpp"

namespace mems {

Stencil9 divergence_stencil(const TransformedCoeffs& coeffs, Index i, Index j) {
  const RadialGrid& g = coeffs.grid;
  if (i < 0 || i > g.n_r() - 2 || j < 1 || j > g.n_eta() - 2)
    throw PreconditionError("divergence stencil requested on a boundary node");

  const double hr = g.h_r(), he = g.h_eta();
  const double e2 = coeffs.epsilon * coeffs.epsilon;
  const auto& a13 = coeffs.a13;
  const auto& a33 = coeffs.a33;
  Stencil9 w{};
  auto add = [&](int di, int dj, double value) {
    // fold the axis ghost w(-1, .) = w(1, .)
    if (i + di < 0) di = 1;
    w[di + 1][dj + 1] += value;
  };

  // radial flux F = eps^2 w_r + a13 w_eta at the faces i +- 1/2
  auto radial_flux = [&](int side, double scale) {
    const Index k = i + side;  // neighbour across the face
    const double a13_face = 0.5 * (a13(i, j) + a13(k, j));
    add(side, 0, scale * side * e2 / hr);
    add(0, 0, -scale * side * e2 / hr);
    const double c = scale * a13_face / (4 * he);
    add(0, 1, c);
    add(0, -1, -c);
    add(side, 1, c);
    add(side, -1, -c);
  };

  if (i == 0) {
    // (1/r) d_r (r F) -> 4 F_{1/2} / h on the axis control disc
    radial_flux(+1, 4.0 / hr);
  } else {
    const double r = g.r(i);
    radial_flux(+1, (r + 0.5 * hr) / (r * hr));
    radial_flux(-1, -(r - 0.5 * hr) / (r * hr));
  }

  // eta flux G = a31 w_r + a33 w_eta at the faces j +- 1/2
  for (int side : {+1, -1}) {
    const double scale = side / he;
    const double a33_face = 0.5 * (a33(i, j) + a33(i, j + side));
    add(0, side, a33_face / (he * he));
    add(0, 0, -a33_face / (he * he));
    if (i > 0) {
      const double a31_face = 0.5 * (a13(i, j) + a13(i, j + side));
      const double c = scale * a31_face / (4 * hr);
      add(1, 0, c);
      add(-1, 0, -c);
      add(1, side, c);
      add(-1, side, -c);
    }
  }

  // lower-order terms b1 w_r + b3 w_eta
  if (i > 0) {
    const double c = coeffs.b1(i, j) / (2 * hr);
    add(1, 0, c);
    add(-1, 0, -c);
  }
  const double c3 = coeffs.b3(i, j) / (2 * he);
  add(0, 1, c3);
  add(0, -1, -c3);
  return w;
}

PotentialSolver::PotentialSolver(const RadialGrid& grid)
    : grid_(grid), lu_(std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>()) {}

PotentialField PotentialSolver::solve_dirichlet(const TransformedCoeffs& coeffs, const ScalarField2D& rhs,
                                                OperatorForm form) {
  if (!(coeffs.grid == grid_) || !(rhs.grid() == grid_))
    throw PreconditionError("solver, coefficients and source must share one grid");
  if (!rhs.values().allFinite()) throw PreconditionError("source term is not finite");
  if (!(coeffs.min_gap > 0)) throw DomainError("coefficients come from a non-admissible deflection");

  const Index nr = grid_.n_r(), ne = grid_.n_eta();
  const Index n = unknowns();

  Eigen::VectorXd b(n);
  for (Index i = 0; i + 1 < nr; ++i)
    for (Index j = 1; j + 1 < ne; ++j) b[unknown(i, j)] = rhs(i, j);

  PotentialField out(grid_);
  const double bnorm = b.lpNorm<Eigen::Infinity>();
  if (bnorm == 0.0) {
    last_residual_ = 0;
    return out;
  }

  // -L_h in triplet form; every 9-point neighbour is stored (zeros included)
  // so the pattern is identical for every call.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(9 * n));
  for (Index i = 0; i + 1 < nr; ++i) {
    for (Index j = 1; j + 1 < ne; ++j) {
      const Stencil9 s =
          form == OperatorForm::non_divergence ? operator_stencil(coeffs, i, j) : divergence_stencil(coeffs, i, j);
      const Index row = unknown(i, j);
      for (int di = -1; di <= 1; ++di) {
        const Index ii = i + di;
        if (ii < 0 || ii > nr - 2) continue;
        for (int dj = -1; dj <= 1; ++dj) {
          const Index jj = j + dj;
          if (jj < 1 || jj > ne - 2) continue;
          triplets.emplace_back(static_cast<int>(row), static_cast<int>(unknown(ii, jj)), -s[di + 1][dj + 1]);
        }
      }
    }
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();

  if (!analyzed_) {
    lu_->analyzePattern(matrix_);
    analyzed_ = true;
  }
  lu_->factorize(matrix_);
  if (lu_->info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sparse LU breakdown on " << nr << " x " << ne << " grid (kappa = min(1 + v) = " << coeffs.min_gap
        << "): " << lu_->lastErrorMessage();
    throw SolverError(msg.str());
  }

  Eigen::VectorXd x = lu_->solve(b);
  Eigen::VectorXd res = b - matrix_ * x;
  last_residual_ = res.lpNorm<Eigen::Infinity>() / bnorm;
  if (last_residual_ > 1e-10) {
    x += lu_->solve(res);
    res = b - matrix_ * x;
    last_residual_ = res.lpNorm<Eigen::Infinity>() / bnorm;
  }
  if (!x.allFinite() || last_residual_ > 1e-10) {
    std::ostringstream msg;
    msg << "linear solve residual " << last_residual_ << " exceeds 1e-10 on " << nr << " x " << ne
        << " grid (kappa = " << coeffs.min_gap << ")";
    throw SolverError(msg.str());
  }

  for (Index i = 0; i + 1 < nr; ++i)
    for (Index j = 1; j + 1 < ne; ++j) out(i, j) = x[unknown(i, j)];
  return out;
}

PotentialField PotentialSolver::solve_potential(const PlateProfile& v, const ModelParams& params) {
  const TransformedCoeffs coeffs = assemble_coefficients(v, params);
  ScalarField2D f(grid_, coeffs.drift_eta);
  PotentialField phi = solve_dirichlet(coeffs, f);
  for (Index j = 0; j < grid_.n_eta(); ++j) phi.values().col(j).array() += grid_.eta(j);
  return phi;
}

Eigen::VectorXd PotentialSolver::load(const PlateProfile& v, const ModelParams& params) {
  const PotentialField phi = solve_potential(v, params);
  const Eigen::VectorXd trace = trace_eta_derivative(phi);
  const Eigen::VectorXd dv = stencil::radial_first(v.values(), grid_.h_r());
  const double e2 = params.epsilon * params.epsilon;
  Eigen::VectorXd g(grid_.n_r());
  for (Index i = 0; i < grid_.n_r(); ++i) {
    const double q = 1.0 + v[i];
    g[i] = (1.0 + e2 * dv[i] * dv[i]) / (q * q) * trace[i] * trace[i];
  }
  return g;
}

PotentialField solve_dirichlet(const TransformedCoeffs& coeffs, const ScalarField2D& rhs, OperatorForm form) {
  PotentialSolver solver(coeffs.grid);
  return solver.solve_dirichlet(coeffs, rhs, form);
}

ScalarField2D compute_f_v(const PlateProfile& v, const ModelParams& params) {
  const TransformedCoeffs coeffs = assemble_coefficients(v, params);
  return ScalarField2D(v.grid(), coeffs.drift_eta);
}

PotentialField solve_potential(const PlateProfile& v, const ModelParams& params) {
  PotentialSolver solver(v.grid());
  return solver.solve_potential(v, params);
}

Eigen::VectorXd trace_eta_derivative(const PotentialField& phi) {
  const Index ne = phi.grid().n_eta();
  const double he = phi.grid().h_eta();
  const auto& m = phi.values();
  return (3.0 * m.col(ne - 1) - 4.0 * m.col(ne - 2) + m.col(ne - 3)) / (2.0 * he);
}

Eigen::VectorXd g_eps(const PlateProfile& v, const ModelParams& params) {
  PotentialSolver solver(v.grid());
  return solver.load(v, params);
}

}  // namespace mems
