#ifndef MEMS_STENCILS_HPP
#define MEMS_STENCILS_HPP

// Second-order finite-difference stencils and trapezoidal quadrature on the
// uniform (r, eta) grid. Radial operators assume even symmetry about r = 0;
// eta operators switch to one-sided stencils at both ends.

#include <numbers>

#include "mems/types.hpp"

namespace mems::stencil {

template <typename Derived>
VectorX<typename Derived::Scalar> radial_first(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  VectorX<Scalar> out(n);
  out[0] = Scalar(0);
  for (Index i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (2 * h);
  out[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h);
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> radial_second(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  const Scalar h2 = h * h;
  VectorX<Scalar> out(n);
  out[0] = 2 * (v[1] - v[0]) / h2;
  for (Index i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - 2 * v[i] + v[i - 1]) / h2;
  out[n - 1] = (2 * v[n - 1] - 5 * v[n - 2] + 4 * v[n - 3] - v[n - 4]) / h2;
  return out;
}

/// v'' + v'/r, with the axis limit 2 v''(0).
template <typename Derived>
VectorX<typename Derived::Scalar> radial_laplacian(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  VectorX<Scalar> d1 = radial_first(v, h);
  VectorX<Scalar> d2 = radial_second(v, h);
  VectorX<Scalar> out(n);
  out[0] = 2 * d2[0];
  for (Index i = 1; i < n; ++i) out[i] = d2[i] + d1[i] / (Scalar(i) * h);
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> eta_first(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  VectorX<Scalar> out(n);
  out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
  for (Index j = 1; j + 1 < n; ++j) out[j] = (v[j + 1] - v[j - 1]) / (2 * h);
  out[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h);
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> eta_second(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  const Scalar h2 = h * h;
  VectorX<Scalar> out(n);
  out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h2;
  for (Index j = 1; j + 1 < n; ++j) out[j] = (v[j + 1] - 2 * v[j] + v[j - 1]) / h2;
  out[n - 1] = (2 * v[n - 1] - 5 * v[n - 2] + 4 * v[n - 3] - v[n - 4]) / h2;
  return out;
}

// Column-/row-wise application to (r, eta) node matrices.

template <typename Derived>
MatrixX<typename Derived::Scalar> d_r(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar h) {
  MatrixX<typename Derived::Scalar> out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) out.col(j) = radial_first(m.col(j), h);
  return out;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> d_rr(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar h) {
  MatrixX<typename Derived::Scalar> out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) out.col(j) = radial_second(m.col(j), h);
  return out;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> laplacian_r(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar h) {
  MatrixX<typename Derived::Scalar> out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) out.col(j) = radial_laplacian(m.col(j), h);
  return out;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> d_eta(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar h) {
  MatrixX<typename Derived::Scalar> out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = eta_first(m.row(i).transpose(), h).transpose();
  return out;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> d_etaeta(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar h) {
  MatrixX<typename Derived::Scalar> out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = eta_second(m.row(i).transpose(), h).transpose();
  return out;
}

// Quadrature. Weights include the 2*pi*r Jacobian of the disc.

template <typename Scalar>
VectorX<Scalar> disc_weights(const RadialGridT<Scalar>& grid) {
  const Index n = grid.n_r();
  VectorX<Scalar> w(n);
  for (Index i = 0; i < n; ++i) w[i] = 2 * std::numbers::pi_v<Scalar> * grid.r(i) * grid.h_r();
  w[n - 1] *= Scalar(0.5);
  return w;
}

template <typename Scalar>
VectorX<Scalar> eta_weights(const RadialGridT<Scalar>& grid) {
  VectorX<Scalar> w = VectorX<Scalar>::Constant(grid.n_eta(), grid.h_eta());
  w[0] *= Scalar(0.5);
  w[grid.n_eta() - 1] *= Scalar(0.5);
  return w;
}

/// Integral over the unit disc of a radial nodal function.
template <typename Scalar, typename Derived>
Scalar integrate_disc(const RadialGridT<Scalar>& grid, const Eigen::MatrixBase<Derived>& f) {
  return disc_weights(grid).dot(f.template cast<Scalar>());
}

/// Integral over the cylinder D x (0, 1) of a nodal (r, eta) field.
template <typename Scalar, typename Derived>
Scalar integrate_cylinder(const RadialGridT<Scalar>& grid, const Eigen::MatrixBase<Derived>& f) {
  return disc_weights(grid).transpose() * f * eta_weights(grid);
}

template <typename Scalar>
Scalar l2_norm(const PlateProfileT<Scalar>& u) {
  using std::sqrt;
  return sqrt(integrate_disc(u.grid(), u.values().cwiseAbs2()));
}

/// Discrete W^2-type norm: max|u| + max|u'| + max|u''|.
template <typename Scalar>
Scalar w2_norm(const PlateProfileT<Scalar>& u) {
  const Scalar h = u.grid().h_r();
  return u.values().cwiseAbs().maxCoeff() + radial_first(u.values(), h).cwiseAbs().maxCoeff() +
         radial_second(u.values(), h).cwiseAbs().maxCoeff();
}

}  // namespace mems::stencil

#endif  // MEMS_STENCILS_HPP
