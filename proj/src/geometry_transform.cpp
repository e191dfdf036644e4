#include "mems/geometry_transform.hpp"

#include <cmath>
#include <sstream>

#include "mems/stencils.hpp"

namespace mems {

TransformedCoeffs assemble_coefficients(const PlateProfile& v, const ModelParams& params) {
  params.validate();
  const RadialGrid& grid = v.grid();
  const double gap = v.min_gap();
  if (!(gap > 0)) {
    std::ostringstream msg;
    msg << "deflection is not admissible: min(1 + v) = " << gap;
    throw DomainError(msg.str());
  }

  const Index nr = grid.n_r(), ne = grid.n_eta();
  const double h = grid.h_r();
  const double e2 = params.epsilon * params.epsilon;

  TransformedCoeffs c(grid);
  c.epsilon = params.epsilon;
  c.min_gap = gap;
  c.v = v.values();
  c.dv = stencil::radial_first(v.values(), h);
  c.d2v = stencil::radial_second(v.values(), h);
  c.lap_v = stencil::radial_laplacian(v.values(), h);

  c.a11 = Eigen::MatrixXd::Constant(nr, ne, e2);
  c.a22 = Eigen::MatrixXd::Constant(nr, ne, e2);
  c.a23 = Eigen::MatrixXd::Zero(nr, ne);
  c.b2 = Eigen::MatrixXd::Zero(nr, ne);
  c.a33.resize(nr, ne);
  c.a13.resize(nr, ne);
  c.b1.resize(nr, ne);
  c.b3.resize(nr, ne);
  c.drift_eta.resize(nr, ne);

  for (Index i = 0; i < nr; ++i) {
    const double q = 1.0 + c.v[i];
    const double slope = c.dv[i] / q;
    const double grad2 = c.dv[i] * c.dv[i] / (q * q);
    const double curv = c.lap_v[i] / q;
    for (Index j = 0; j < ne; ++j) {
      const double eta = grid.eta(j);
      c.a13(i, j) = -e2 * eta * slope;
      c.a33(i, j) = (1.0 + e2 * eta * eta * c.dv[i] * c.dv[i]) / (q * q);
      c.b1(i, j) = e2 * slope;
      c.b3(i, j) = -e2 * eta * grad2;
      c.drift_eta(i, j) = e2 * eta * (2.0 * grad2 - curv);
    }
  }
  return c;
}

EllipticitySpectrum ellipticity_spectrum(const TransformedCoeffs& coeffs, Index i, Index j) {
  if (i < 0 || i >= coeffs.grid.n_r() || j < 0 || j >= coeffs.grid.n_eta())
    throw PreconditionError("node outside the grid");

  const double e2 = coeffs.epsilon * coeffs.epsilon;
  const double q = 1.0 + coeffs.v[i];
  const double t = e2 + coeffs.a33(i, j);
  const double d = e2 / (q * q);
  const double disc = t * t - 4.0 * d;
  if (disc < -1e-12 * t * t) throw InternalError("ellipticity discriminant is negative");

  const double root = std::sqrt(std::max(disc, 0.0));
  const double mu_plus = 0.5 * (t + root);
  // d / mu_plus avoids cancellation in (t - root) / 2
  const double mu_minus = d / mu_plus;

  if (std::abs(mu_plus * mu_minus - d) > 1e-10 * std::max(d, 1e-300) && d > 0)
    throw InternalError("mu_plus * mu_minus != d");
  if (mu_minus < (d / t) * (1.0 - 1e-12)) throw InternalError("mu_minus < d / t");
  return {e2, mu_minus, mu_plus};
}

double map_to_physical(const PotentialField& phi, const PlateProfile& v, double r, double z) {
  if (!(phi.grid() == v.grid())) throw PreconditionError("potential and profile live on different grids");
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("sample radius outside [0, 1]");
  const double top = v.at(r);
  const double gap = 1.0 + top;
  if (!(gap > 0)) throw DomainError("deflection touches the ground plate at the sample radius");
  const double tol = 1e-12;
  if (z < -1.0 - tol || z > top + tol) {
    std::ostringstream msg;
    msg << "sample z = " << z << " outside [-1, v(r) = " << top << "]";
    throw DomainError(msg.str());
  }
  const double eta = std::clamp((1.0 + z) / gap, 0.0, 1.0);
  return phi.at(r, eta);
}

Stencil9 operator_stencil(const TransformedCoeffs& coeffs, Index i, Index j) {
  const RadialGrid& g = coeffs.grid;
  if (i < 0 || i > g.n_r() - 2 || j < 1 || j > g.n_eta() - 2)
    throw PreconditionError("operator stencil requested on a boundary node");

  const double hr = g.h_r(), he = g.h_eta();
  const double e2 = coeffs.epsilon * coeffs.epsilon;
  Stencil9 w{};

  const double cee = coeffs.a33(i, j);
  const double drift = coeffs.drift_eta(i, j);
  w[1][0] += cee / (he * he) - drift / (2 * he);
  w[1][2] += cee / (he * he) + drift / (2 * he);
  w[1][1] += -2 * cee / (he * he);

  if (i == 0) {
    // w_rr + w_r / r -> 2 w_rr with the even ghost w(-1) = w(1)
    w[1][1] += -4 * e2 / (hr * hr);
    w[2][1] += 4 * e2 / (hr * hr);
    return w;
  }

  const double r = g.r(i);
  w[0][1] += e2 / (hr * hr) - e2 / (2 * hr * r);
  w[2][1] += e2 / (hr * hr) + e2 / (2 * hr * r);
  w[1][1] += -2 * e2 / (hr * hr);

  const double cross = 2 * coeffs.a13(i, j) / (4 * hr * he);
  w[2][2] += cross;
  w[2][0] -= cross;
  w[0][2] -= cross;
  w[0][0] += cross;
  return w;
}

ScalarField2D apply_transformed_operator(const TransformedCoeffs& coeffs, const GridField& w) {
  const RadialGrid& g = coeffs.grid;
  if (!(w.grid() == g)) throw PreconditionError("field and coefficients live on different grids");
  ScalarField2D out(g);
  for (Index i = 0; i + 1 < g.n_r(); ++i) {
    for (Index j = 1; j + 1 < g.n_eta(); ++j) {
      const Stencil9 s = operator_stencil(coeffs, i, j);
      double acc = 0;
      for (int di = -1; di <= 1; ++di) {
        if (i + di < 0) continue;
        for (int dj = -1; dj <= 1; ++dj) acc += s[di + 1][dj + 1] * w(i + di, j + dj);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace mems
