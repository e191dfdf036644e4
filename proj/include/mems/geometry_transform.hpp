#ifndef MEMS_GEOMETRY_TRANSFORM_HPP
#define MEMS_GEOMETRY_TRANSFORM_HPP

#include <array>

#include "mems/types.hpp"

namespace mems {

/// Coefficients of the transformed Laplace operator L_v on the fixed
/// cylinder, restricted to axisymmetric deflections.
///
/// The divergence-form fields a11..b3 are evaluated on the ray y = 0, so
/// d_x v = v'(r) and d_y v = 0 (a23 = b2 = 0). `drift_eta` is the coefficient
/// of d_eta in the non-divergence form,
///
///   L_v w = eps^2 (w_rr + w_r / r) + 2 a13 w_{r eta} + a33 w_{eta eta} + drift_eta w_eta,
///
/// and also equals L_v eta.
struct TransformedCoeffs {
  RadialGrid grid;
  double epsilon = 0;

  // per r-node
  Eigen::VectorXd v, dv, d2v, lap_v;

  // per (r, eta)-node
  Eigen::MatrixXd a11, a22, a33, a13, a23, b1, b2, b3;
  Eigen::MatrixXd drift_eta;

  double min_gap = 1;

  explicit TransformedCoeffs(const RadialGrid& g) : grid(g) {}
};

TransformedCoeffs assemble_coefficients(const PlateProfile& v, const ModelParams& params);

struct EllipticitySpectrum {
  double eig1;       // eps^2, eigenvector (0, 1, 0)
  double eig_minus;  // smaller root of the (x, eta) block
  double eig_plus;
};

/// Eigenvalues of the symmetric principal-part matrix at node (i, j).
EllipticitySpectrum ellipticity_spectrum(const TransformedCoeffs& coeffs, Index i, Index j);

/// Physical potential psi(r, z) = phi(r, (1 + z) / (1 + v(r))), bilinear in (r, eta).
double map_to_physical(const PotentialField& phi, const PlateProfile& v, double r, double z);

/// Nine-point weights of the discrete L_v at node (i, j); weights[di + 1][dj + 1]
/// multiplies w(i + di, j + dj). At the axis the ghost w(-1, j) = w(1, j) is
/// already folded into the di = +1 column.
using Stencil9 = std::array<std::array<double, 3>, 3>;
Stencil9 operator_stencil(const TransformedCoeffs& coeffs, Index i, Index j);

/// Discrete L_v w at nodes with i < n_r - 1 and 0 < j < n_eta - 1; zero on
/// the Dirichlet boundary (r = 1, eta = 0, eta = 1).
ScalarField2D apply_transformed_operator(const TransformedCoeffs& coeffs, const GridField& w);

}  // namespace mems

#endif  // MEMS_GEOMETRY_TRANSFORM_HPP
