#include <doctest.h>

#include <random>

#include "mems/geometry_transform.hpp"
#include "mems/stencils.hpp"
#include "oracles/oracles.hpp"

using namespace mems;

namespace {

PlateProfile bump(const RadialGrid& g, double delta) {
  return PlateProfile::from_function(g, [delta](double r) { return delta * (1 - r * r) * (1 - r * r); });
}

ModelParams with_eps(double eps) {
  ModelParams p;
  p.epsilon = eps;
  return p;
}

// Random admissible clamped profile: sum of c_k (1 - r^2)^2 r^{2k}, scaled to
// a prescribed minimum.
PlateProfile random_profile(const RadialGrid& g, std::mt19937_64& rng, double depth) {
  std::uniform_real_distribution<double> c(-1, 1);
  const double c0 = c(rng), c1 = c(rng), c2 = c(rng);
  PlateProfile v = PlateProfile::from_function(g, [&](double r) {
    const double s = r * r;
    return (1 - s) * (1 - s) * (c0 + c1 * s + c2 * s * s);
  });
  const double peak = v.values().cwiseAbs().maxCoeff();
  v.values() *= depth / std::max(peak, 1e-12);
  return v;
}

}  // namespace

TEST_SUITE("geometry_transform") {
  TEST_CASE("zero deflection gives the scaled Laplacian") {
    const RadialGrid g(17, 17);
    const auto c = assemble_coefficients(PlateProfile(g), with_eps(0.4));
    CHECK(c.a11.isConstant(0.16));
    CHECK(c.a22.isConstant(0.16));
    CHECK(c.a33.isConstant(1.0));
    CHECK(c.a13.isZero(0));
    CHECK(c.a23.isZero(0));
    CHECK(c.b1.isZero(0));
    CHECK(c.b2.isZero(0));
    CHECK(c.b3.isZero(0));
  }

  TEST_CASE("constant deflection only rescales eta") {
    const RadialGrid g(17, 13);
    for (double cst : {-0.5, 0.3}) {
      const auto c = assemble_coefficients(PlateProfile(g, Eigen::VectorXd::Constant(17, cst)), with_eps(0.7));
      CHECK(c.a33.isConstant(1 / ((1 + cst) * (1 + cst)), 1e-14));
      CHECK(c.a13.isZero(1e-12));
      CHECK(c.b1.isZero(1e-12));
      CHECK(c.b3.isZero(1e-12));
      CHECK(c.drift_eta.isZero(1e-12));
    }
  }

  TEST_CASE("bump coefficients match the symbolic values at (0.5, 0.5)") {
    // quartic v: centered differences carry an O(h^2) error, so compare on
    // two grids and require both closeness and the expected error decay
    double err_prev = 0;
    for (Index n : {65, 129}) {
      const RadialGrid g(n, n);
      const auto c = assemble_coefficients(bump(g, 0.1), with_eps(0.3));
      const Index i = (n - 1) / 2, j = (n - 1) / 2;
      namespace o = oracle::coeffs_bump;
      CHECK(c.a11(i, j) == doctest::Approx(o::a11).epsilon(1e-15));
      const double err = std::max({std::abs(c.a13(i, j) - o::a13), std::abs(c.a33(i, j) - o::a33),
                                   std::abs(c.b1(i, j) - o::b1), std::abs(c.b3(i, j) - o::b3),
                                   std::abs(c.drift_eta(i, j) - o::f_v)});
      CHECK(err < 2e-5);
      if (err_prev > 0) CHECK(err_prev / err == doctest::Approx(4).epsilon(0.05));
      err_prev = err;
    }
  }

  TEST_CASE("radial operator reproduces the Cartesian operator on a ray") {
    double err_prev = 0;
    for (Index n : {33, 65, 129}) {
      const RadialGrid g(n, n);
      const auto c = assemble_coefficients(bump(g, 0.1), with_eps(0.3));
      const auto w = GridField::from_function(g, [](double r, double e) { return (1 - r * r) * e * (1 - e); });
      const ScalarField2D lw = apply_transformed_operator(c, w);
      const double err = std::abs(lw((n - 1) / 2, (n - 1) / 2) - oracle::coeffs_bump::L_w);
      CHECK(err < 1e-3);
      if (err_prev > 0) CHECK(err_prev / err == doctest::Approx(4).epsilon(0.1));
      err_prev = err;
    }
  }

  TEST_CASE("coefficients are exact for a quadratic deflection") {
    const RadialGrid g(21, 11);
    const double eps = 0.5, e2 = eps * eps;
    const auto v = PlateProfile::from_function(g, [](double r) { return -0.2 * (1 - r * r); });
    const auto c = assemble_coefficients(v, with_eps(eps));
    for (Index i = 0; i < g.n_r(); ++i) {
      const double r = g.r(i), q = 1 - 0.2 * (1 - r * r), dv = 0.4 * r, lap = 0.8;
      for (Index j = 0; j < g.n_eta(); ++j) {
        const double e = g.eta(j);
        CHECK(c.a13(i, j) == doctest::Approx(-e2 * e * dv / q).epsilon(1e-12));
        CHECK(c.a33(i, j) == doctest::Approx((1 + e2 * e * e * dv * dv) / (q * q)).epsilon(1e-12));
        CHECK(c.drift_eta(i, j) == doctest::Approx(e2 * e * (2 * dv * dv / (q * q) - lap / q)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("non-admissible deflection is a domain error") {
    const RadialGrid g(9, 9);
    const PlateProfile touching(g, Eigen::VectorXd::Constant(9, -1.0));
    CHECK_THROWS_AS(assemble_coefficients(touching, with_eps(0.3)), DomainError);
    CHECK_THROWS_AS(assemble_coefficients(bump(g, -1.2), with_eps(0.3)), DomainError);
  }

  TEST_CASE("grids below nine nodes are rejected") {
    CHECK_THROWS_AS(RadialGrid(8, 9), PreconditionError);
    CHECK_THROWS_AS(RadialGrid(9, 5), PreconditionError);
  }

  TEST_CASE("ellipticity spectrum of the flat state") {
    const RadialGrid g(9, 9);
    auto c = assemble_coefficients(PlateProfile(g), with_eps(0.5));
    const auto s = ellipticity_spectrum(c, 4, 4);
    CHECK(s.eig1 == doctest::Approx(0.25));
    CHECK(s.eig_plus == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.eig_minus == doctest::Approx(0.25).epsilon(1e-14));
    for (double eps : {0.05, 0.3, 0.9}) {
      c = assemble_coefficients(PlateProfile(g), with_eps(eps));
      const auto t = ellipticity_spectrum(c, 2, 7);
      CHECK(t.eig_plus == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(t.eig_minus == doctest::Approx(eps * eps).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ellipticity_spectrum(c, 9, 0), PreconditionError);
  }

  TEST_CASE("ellipticity identities hold at every node") {
    std::mt19937_64 rng(7);
    for (int sample = 0; sample < 10; ++sample) {
      const RadialGrid g(17, 17);
      const PlateProfile v = random_profile(g, rng, 0.8);
      const double eps = 0.1 + 0.2 * sample;
      const auto c = assemble_coefficients(v, with_eps(eps));
      for (Index i = 0; i < g.n_r(); ++i)
        for (Index j = 0; j < g.n_eta(); ++j) {
          const auto s = ellipticity_spectrum(c, i, j);
          const double d = eps * eps / ((1 + v[i]) * (1 + v[i]));
          CHECK(s.eig_minus > 0);
          CHECK(s.eig_plus * s.eig_minus == doctest::Approx(d).epsilon(1e-10));
          CHECK(c.a33(i, j) > 0);
        }
    }
    const RadialGrid g(33, 33);
    const auto c = assemble_coefficients(bump(g, 0.1), with_eps(0.3));
    const auto s = ellipticity_spectrum(c, 16, 16);
    CHECK(std::abs(s.eig_plus * s.eig_minus - 0.09 / std::pow(1 + c.v[16], 2)) < 1e-12);
  }

  TEST_CASE("pull-back to the physical gap") {
    const RadialGrid g(11, 11);
    const auto eta = GridField::from_function(g, [](double, double e) { return e; });
    CHECK(map_to_physical(eta, PlateProfile(g), 0.3, -0.5) == doctest::Approx(0.5).epsilon(1e-14));
    const PlateProfile half(g, Eigen::VectorXd::Constant(11, -0.5));
    CHECK(map_to_physical(eta, half, 0.2, -0.75) == doctest::Approx(0.5).epsilon(1e-14));
    const PlateProfile v = bump(g, -0.3);
    for (double r : {0.0, 0.35, 0.8, 1.0}) CHECK(map_to_physical(eta, v, r, v.at(r)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(map_to_physical(eta, v, 0.5, v.at(0.5) + 0.01), DomainError);
    CHECK_THROWS_AS(map_to_physical(eta, v, 0.5, -1.01), DomainError);
    CHECK_THROWS_AS(map_to_physical(eta, v, 1.2, 0.0), DomainError);
  }

  TEST_CASE("coefficients depend Lipschitz-continuously on v") {
    // Fit C on a calibration sample, then require a fresh sample to stay
    // below 2 C. kappa = 0.3 for every profile.
    const RadialGrid g(33, 9);
    std::mt19937_64 rng(11);
    auto ratio = [&](std::mt19937_64& gen) {
      const PlateProfile v1 = random_profile(g, gen, 0.7);
      const PlateProfile v2 = random_profile(g, gen, 0.7);
      const auto c1 = assemble_coefficients(v1, with_eps(0.3));
      const auto c2 = assemble_coefficients(v2, with_eps(0.3));
      const double diff = std::max({(c1.a13 - c2.a13).cwiseAbs().maxCoeff(), (c1.a33 - c2.a33).cwiseAbs().maxCoeff(),
                                    (c1.b1 - c2.b1).cwiseAbs().maxCoeff(), (c1.b3 - c2.b3).cwiseAbs().maxCoeff()});
      const PlateProfile d(g, v1.values() - v2.values());
      return diff / stencil::w2_norm(d);
    };
    double fitted = 0;
    for (int k = 0; k < 20; ++k) fitted = std::max(fitted, ratio(rng));
    CHECK(fitted < 10);
    for (int k = 0; k < 40; ++k) CHECK(ratio(rng) <= 2 * fitted);
  }
}
