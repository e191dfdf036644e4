#ifndef MEMS_SPECTRAL_VERIFY_HPP
#define MEMS_SPECTRAL_VERIFY_HPP

#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mems/plate_dynamics.hpp"
#include "mems/stencils.hpp"
#include "mems/types.hpp"

namespace mems {

template <typename Scalar>
struct EigenPairT {
  Scalar mu;
  PlateProfileT<Scalar> zeta;  // ||zeta||_2 = 1 on the disc, zeta(0) > 0
  Scalar residual;             // ||A zeta - mu zeta||_2
  int iterations;
};

using EigenPair = EigenPairT<double>;

struct EigenOptions {
  int max_iterations = 500;
};

/// Smallest eigenpair of the discrete clamped operator by inverse iteration
/// with a weighted Rayleigh quotient. The attainable residual is bounded by
/// the rounding of zeta times ||A|| ~ h^-4, so fine grids need a wider Scalar
/// (long double) to reach 1e-8.
template <typename Scalar>
EigenPairT<Scalar> clamped_eigenpair(const ModelParamsT<Scalar>& params, const RadialGridT<Scalar>& grid,
                                     const EigenOptions& options = {}) {
  params.validate();
  using std::abs;
  using std::sqrt;
  const Index n = grid.n_r(), m = n - 1;
  const MatrixX<Scalar> a = clamped_matrix(params, grid);
  const Eigen::PartialPivLU<MatrixX<Scalar>> lu(a);

  // weights making the Rayleigh quotient symmetric: h/8 on the axis, r_i else
  VectorX<Scalar> w(m);
  w[0] = grid.h_r() / 8;
  for (Index i = 1; i < m; ++i) w[i] = grid.r(i);
  auto wdot = [&](const VectorX<Scalar>& x, const VectorX<Scalar>& y) { return (w.array() * x.array() * y.array()).sum(); };

  // Converged once the W-norm change of x stops shrinking (rounding floor)
  // or drops to a few ulps.
  const Scalar floor = Scalar(16) * std::numeric_limits<Scalar>::epsilon();
  VectorX<Scalar> x = VectorX<Scalar>::Ones(m);
  x /= sqrt(wdot(x, x));
  Scalar change = std::numeric_limits<Scalar>::infinity();
  int it = 0;
  for (;; ++it) {
    VectorX<Scalar> next = lu.solve(x);
    next /= sqrt(wdot(next, next));
    const VectorX<Scalar> diff = next - x;
    const Scalar step = sqrt(wdot(diff, diff));
    x = std::move(next);
    if (!x.allFinite()) throw NonConvergenceError("inverse iteration produced a non-finite iterate");
    if (step <= floor || (it > 2 && step > Scalar(0.9) * change)) break;
    change = step;
    if (it + 1 >= options.max_iterations)
      throw NonConvergenceError("inverse iteration stagnated before the eigenvector settled");
  }
  const Scalar mu = wdot(x, a * x);

  VectorX<Scalar> full = VectorX<Scalar>::Zero(n);
  full.head(m) = x;
  PlateProfileT<Scalar> zeta(grid, full);
  Scalar norm = stencil::l2_norm(zeta);
  if (full[0] < 0) norm = -norm;
  full /= norm;
  zeta = PlateProfileT<Scalar>(grid, full);

  VectorX<Scalar> res = VectorX<Scalar>::Zero(n);
  res.head(m) = a * full.head(m) - mu * full.head(m);
  const Scalar residual = stencil::l2_norm(PlateProfileT<Scalar>(grid, res));
  return {mu, std::move(zeta), residual, it + 1};
}

EigenPair clamped_eigenpair(const ModelParams& params, const RadialGrid& grid);

/// k-th positive root of J0(k) I1(k) + I0(k) J1(k) = 0 (clamped disc
/// frequencies; mu = k^4 for beta = 1, tau = 0).
double clamped_disc_root(int index = 1);

struct AuxiliaryU {
  PlateProfile U;      // -Delta U = u in D, U = 0 on the rim
  Eigen::VectorXd dU;  // U'
  Eigen::VectorXd d2U; // U''
};

AuxiliaryU auxiliary_U(const PlateProfile& u);

/// Checks |U'| <= r/2 + slack1 and |U''| <= 3/2 + slack2 at every node.
struct AuxiliaryBoundReport {
  bool holds = true;
  double max_excess_d1 = 0;  // max(|U'| - r/2)
  double max_excess_d2 = 0;  // max(|U''| - 3/2)
};
AuxiliaryBoundReport check_auxiliary_bounds(const AuxiliaryU& aux, double slack1, double slack2);

struct TraceReport {
  double lhs = 0;    // int_D |w(., 1)|^p
  double w12 = 0;    // ||w||_{W^1_2(Omega)}
  double l2 = 0;     // ||w||_{L_2(Omega)}
  double ratio = 0;  // lhs / (w12^{(3p-4)/2} l2^{(4-p)/2}); 0 for w = 0
};

TraceReport trace_inequality_check(const GridField& w, double p);

/// Seeded smooth test functions sum_{k,l} c_kl r^{2k} T_l(eta) with T_l from
/// {1, cos(l pi eta), sin(l pi eta)}.
std::vector<GridField> trace_corpus(const RadialGrid& grid, int count, std::uint64_t seed);

struct TraceFamilyReport {
  int count = 0;
  double max_ratio = 0;
  double min_ratio = 0;
  bool bounded = false;  // all ratios finite and below the cap
};

TraceFamilyReport trace_inequality_family(const std::vector<GridField>& corpus, double p, double cap);

struct MixedIdentityReport {
  double lhs = 0;     // int (Phi_rr + Phi_r / r) Phi_etaeta
  double rhs = 0;     // int Phi_reta^2
  double relerr = 0;
};

/// Requires Phi = 0 on the whole cylinder boundary (r = 1, eta = 0, eta = 1).
MixedIdentityReport mixed_derivative_identity_check(const PotentialField& phi);

}  // namespace mems

#endif  // MEMS_SPECTRAL_VERIFY_HPP
