#ifndef MEMS_TYPES_HPP
#define MEMS_TYPES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mems/error.hpp"

namespace mems {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Physical and tuning constants of the plate/potential model.
///
/// `epsilon` is the aspect ratio, `lambda` the squared-voltage coupling,
/// `beta` bending, `tau` external stretching and `a` self-stretching.
/// epsilon = 0 is accepted and selects the small-gap limit.
template <typename Scalar>
struct ModelParamsT {
  Scalar epsilon = Scalar(0.3);
  Scalar lambda = Scalar(0);
  Scalar beta = Scalar(1);
  Scalar tau = Scalar(0);
  Scalar a = Scalar(0);

  void validate() const {
    using std::isfinite;
    if (!(isfinite(epsilon) && isfinite(lambda) && isfinite(beta) && isfinite(tau) && isfinite(a)))
      throw PreconditionError("model parameters must be finite");
    if (epsilon < 0) throw PreconditionError("epsilon must be >= 0");
    if (!(beta > 0)) throw PreconditionError("beta must be > 0 (fourth-order plate)");
    if (lambda < 0) throw PreconditionError("lambda must be >= 0");
    if (tau < 0) throw PreconditionError("tau must be >= 0");
    if (a < 0) throw PreconditionError("a must be >= 0");
  }

  ModelParamsT with_lambda(Scalar value) const {
    ModelParamsT copy = *this;
    copy.lambda = value;
    return copy;
  }

  friend bool operator==(const ModelParamsT&, const ModelParamsT&) = default;
};

/// Uniform nodes r_i = i h_r on [0, 1] and eta_j = j h_eta on [0, 1].
template <typename Scalar>
class RadialGridT {
 public:
  static constexpr Index min_nodes = 9;

  RadialGridT(Index n_r, Index n_eta) : n_r_(n_r), n_eta_(n_eta) {
    if (n_r < min_nodes || n_eta < min_nodes)
      throw PreconditionError("grid needs at least " + std::to_string(min_nodes) + " nodes per direction (got " +
                              std::to_string(n_r) + " x " + std::to_string(n_eta) + ")");
  }

  Index n_r() const { return n_r_; }
  Index n_eta() const { return n_eta_; }
  Scalar h_r() const { return Scalar(1) / Scalar(n_r_ - 1); }
  Scalar h_eta() const { return Scalar(1) / Scalar(n_eta_ - 1); }

  Scalar r(Index i) const { return i == n_r_ - 1 ? Scalar(1) : Scalar(i) * h_r(); }
  Scalar eta(Index j) const { return j == n_eta_ - 1 ? Scalar(1) : Scalar(j) * h_eta(); }

  VectorX<Scalar> r_nodes() const {
    VectorX<Scalar> out(n_r_);
    for (Index i = 0; i < n_r_; ++i) out[i] = r(i);
    return out;
  }
  VectorX<Scalar> eta_nodes() const {
    VectorX<Scalar> out(n_eta_);
    for (Index j = 0; j < n_eta_; ++j) out[j] = eta(j);
    return out;
  }

  friend bool operator==(const RadialGridT&, const RadialGridT&) = default;

 private:
  Index n_r_;
  Index n_eta_;
};

/// Radial deflection u(r) sampled on the r-nodes of a grid.
template <typename Scalar>
class PlateProfileT {
 public:
  explicit PlateProfileT(const RadialGridT<Scalar>& grid) : grid_(grid), values_(VectorX<Scalar>::Zero(grid.n_r())) {}

  template <typename Derived>
  PlateProfileT(const RadialGridT<Scalar>& grid, const Eigen::MatrixBase<Derived>& values)
      : grid_(grid), values_(values) {
    if (values_.size() != grid.n_r()) throw PreconditionError("profile size does not match the radial grid");
  }

  static PlateProfileT from_function(const RadialGridT<Scalar>& grid, const std::function<Scalar(Scalar)>& f) {
    VectorX<Scalar> v(grid.n_r());
    for (Index i = 0; i < grid.n_r(); ++i) v[i] = f(grid.r(i));
    return PlateProfileT(grid, v);
  }

  const RadialGridT<Scalar>& grid() const { return grid_; }
  const VectorX<Scalar>& values() const { return values_; }
  VectorX<Scalar>& values() { return values_; }
  Index size() const { return values_.size(); }
  Scalar operator[](Index i) const { return values_[i]; }
  Scalar& operator[](Index i) { return values_[i]; }

  /// min(1 + u) over the nodes.
  Scalar min_gap() const { return Scalar(1) + values_.minCoeff(); }
  bool admissible(Scalar kappa) const { return kappa > 0 && min_gap() >= kappa; }

  /// Piecewise-linear interpolation in r.
  Scalar at(Scalar r) const {
    const Scalar h = grid_.h_r();
    Index i = std::clamp<Index>(static_cast<Index>(std::floor(r / h)), 0, grid_.n_r() - 2);
    const Scalar s = (r - grid_.r(i)) / h;
    return (1 - s) * values_[i] + s * values_[i + 1];
  }

 private:
  RadialGridT<Scalar> grid_;
  VectorX<Scalar> values_;
};

/// Nodal field on the (r, eta) grid; rows index r, columns index eta.
template <typename Scalar>
class GridFieldT {
 public:
  explicit GridFieldT(const RadialGridT<Scalar>& grid)
      : grid_(grid), values_(MatrixX<Scalar>::Zero(grid.n_r(), grid.n_eta())) {}

  template <typename Derived>
  GridFieldT(const RadialGridT<Scalar>& grid, const Eigen::MatrixBase<Derived>& values) : grid_(grid), values_(values) {
    if (values_.rows() != grid.n_r() || values_.cols() != grid.n_eta())
      throw PreconditionError("field shape does not match the grid");
  }

  static GridFieldT from_function(const RadialGridT<Scalar>& grid, const std::function<Scalar(Scalar, Scalar)>& f) {
    MatrixX<Scalar> m(grid.n_r(), grid.n_eta());
    for (Index j = 0; j < grid.n_eta(); ++j)
      for (Index i = 0; i < grid.n_r(); ++i) m(i, j) = f(grid.r(i), grid.eta(j));
    return GridFieldT(grid, m);
  }

  const RadialGridT<Scalar>& grid() const { return grid_; }
  const MatrixX<Scalar>& values() const { return values_; }
  MatrixX<Scalar>& values() { return values_; }
  Scalar operator()(Index i, Index j) const { return values_(i, j); }
  Scalar& operator()(Index i, Index j) { return values_(i, j); }

  /// Bilinear interpolation at (r, eta).
  Scalar at(Scalar r, Scalar eta) const {
    const Scalar hr = grid_.h_r(), he = grid_.h_eta();
    Index i = std::clamp<Index>(static_cast<Index>(std::floor(r / hr)), 0, grid_.n_r() - 2);
    Index j = std::clamp<Index>(static_cast<Index>(std::floor(eta / he)), 0, grid_.n_eta() - 2);
    const Scalar s = (r - grid_.r(i)) / hr;
    const Scalar t = (eta - grid_.eta(j)) / he;
    return (1 - s) * (1 - t) * values_(i, j) + s * (1 - t) * values_(i + 1, j) + (1 - s) * t * values_(i, j + 1) +
           s * t * values_(i + 1, j + 1);
  }

 private:
  RadialGridT<Scalar> grid_;
  MatrixX<Scalar> values_;
};

using ModelParams = ModelParamsT<double>;
using RadialGrid = RadialGridT<double>;
using PlateProfile = PlateProfileT<double>;
using GridField = GridFieldT<double>;
/// Transformed potential on the fixed cylinder.
using PotentialField = GridField;
/// Generic source / residual container on the cylinder grid.
using ScalarField2D = GridField;

}  // namespace mems

#endif  // MEMS_TYPES_HPP
