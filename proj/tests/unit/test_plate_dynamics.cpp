#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mems/plate_dynamics.hpp"
#include "mems/spectral_verify.hpp"
#include "mems/stationary_branch.hpp"
#include "mems/stencils.hpp"
#include "oracles/oracles.hpp"

using namespace mems;

namespace {

constexpr double lambda_star_eps03_n33 = 12.855176;  // fold of the 33-node branch, eps = 0.3

ModelParams params(double eps, double lambda, double tau = 0, double a = 0, double beta = 1) {
  ModelParams p;
  p.epsilon = eps;
  p.lambda = lambda;
  p.beta = beta;
  p.tau = tau;
  p.a = a;
  return p;
}

PlateProfile quartic(const RadialGrid& g, double amp) {
  return PlateProfile::from_function(g, [amp](double r) { return amp * (1 - r * r) * (1 - r * r); });
}

// Delta_h applied to nodal values u_0..u_{n-1}, with u'(1) = 0 imposed by
// the mirrored ghost value u_n = u_{n-2}.
Eigen::VectorXd ghost_laplacian(const Eigen::VectorXd& u, double h) {
  const Index n = u.size();
  Eigen::VectorXd out(n);
  out[0] = 4 * (u[1] - u[0]) / (h * h);
  for (Index i = 1; i < n; ++i) {
    const double r = static_cast<double>(i) * h;
    const double right = i + 1 < n ? u[i + 1] : u[n - 2];
    out[i] = (right - 2 * u[i] + u[i - 1]) / (h * h) + (right - u[i - 1]) / (2 * h * r);
  }
  return out;
}

// Independent small-gap IMEX integrator: the operator is built column by
// column from the ghost Laplacian and the load is 1 / (1 + u)^2.
Eigen::VectorXd small_gap_run(Index n, double lambda, double dt, int steps) {
  const double h = 1.0 / static_cast<double>(n - 1);
  const Index m = n - 1;
  Eigen::MatrixXd a(m, m);
  for (Index k = 0; k < m; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[k] = 1;
    const Eigen::VectorXd lap = ghost_laplacian(e, h);  // u(1) = 0 since e[n - 1] = 0
    Eigen::VectorXd outer(m);
    outer[0] = 4 * (lap[1] - lap[0]) / (h * h);
    for (Index i = 1; i < m; ++i) {
      const double r = static_cast<double>(i) * h;
      outer[i] = (lap[i + 1] - 2 * lap[i] + lap[i - 1]) / (h * h) + (lap[i + 1] - lap[i - 1]) / (2 * h * r);
    }
    a.col(k) = outer;
  }
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m) + dt * a;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd load = (1 + u.array()).square().inverse();
    const Eigen::VectorXd next = lu.solve(u - dt * lambda * load);
    u = next;
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
  full.head(m) = u;
  return full;
}

}  // namespace

TEST_SUITE("plate_dynamics") {
  TEST_CASE("operator on (1 - r^2)^2 away from the closure rows") {
    // Delta_h^2 is exact on quartics at nodes whose stencil avoids the axis
    // and ghost closures; Delta_h picks up exactly 6 h^2.
    for (Index n : {17, 33, 65}) {
      const RadialGrid g(n, n);
      const double h = g.h_r();
      const PlateProfile w = quartic(g, 1.0);
      const Eigen::VectorXd aw = ClampedOperator(params(0.3, 0), g).apply(w.values());
      for (Index i = 2; i <= n - 3; ++i) CHECK(aw[i] == doctest::Approx(64).epsilon(1e-9));
      const Eigen::VectorXd aw5 = ClampedOperator(params(0.3, 0, 5.0), g).apply(w.values());
      for (Index i = 2; i <= n - 3; ++i) {
        const double r = g.r(i);
        CHECK(aw5[i] == doctest::Approx(64 - 5 * (-8 + 16 * r * r + 6 * h * h)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("A^-1 64 converges to (1 - r^2)^2 at second order") {
    double prev = 0;
    for (Index n : {17, 33, 65, 129}) {
      const RadialGrid g(n, n);
      const Eigen::VectorXd u = ClampedOperator(params(0.3, 0), g).solve(Eigen::VectorXd::Constant(n, 64));
      const double err = (u - quartic(g, 1.0).values()).cwiseAbs().maxCoeff();
      if (prev > 0) CHECK(prev / err == doctest::Approx(4).epsilon(0.1));
      prev = err;
    }
    CHECK(prev < 1e-3);
  }

  TEST_CASE("weighted operator is symmetric positive definite") {
    for (double tau : {0.0, 1.0, 10.0}) {
      const RadialGrid g(33, 9);
      const ClampedOperator op(params(0.3, 0, tau, 0, 2.0), g);
      const Eigen::MatrixXd wa = op.weights().asDiagonal() * op.matrix();
      CHECK((wa - wa.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * wa.cwiseAbs().maxCoeff());
      const Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (wa + wa.transpose()));
      CHECK(llt.info() == Eigen::Success);
    }
  }

  TEST_CASE("membrane limit and invalid parameters are rejected") {
    const RadialGrid g(17, 9);
    CHECK_THROWS_AS(ClampedOperator(params(0.3, 0, 1.0, 0, 0.0), g), PreconditionError);
    CHECK_THROWS_AS(ClampedOperator(params(-0.1, 0), g), PreconditionError);
    CHECK_THROWS_AS(ClampedOperator(params(0.3, -1), g), PreconditionError);
    CHECK_THROWS_AS(ClampedOperator(params(0.3, 0), g).apply(Eigen::VectorXd::Zero(5)), PreconditionError);
  }

  TEST_CASE("gradient norm quadrature") {
    const RadialGrid g(129, 9);
    CHECK(grad_norm_sq(PlateProfile(g)) == 0.0);
    CHECK(grad_norm_sq(quartic(g, 1.0)) == doctest::Approx(oracle::grad_sq_quartic).epsilon(1e-3));
    const auto quad = PlateProfile::from_function(g, [](double r) { return 1 - r * r; });
    CHECK(grad_norm_sq(quad) == doctest::Approx(oracle::grad_sq_quadratic).epsilon(1e-3));
  }

  TEST_CASE("nonlinearity examples") {
    const RadialGrid g(33, 33);
    const PlateProfile v = quartic(g, -0.4);
    CHECK(rhs_h(v, params(0.3, 0)).isZero(0));
    CHECK((rhs_h(PlateProfile(g), params(0.3, 2.5)).array() + 2.5).abs().maxCoeff() < 1e-12);
    const Eigen::VectorXd small_gap = -3.0 * (1 + v.values().array()).square().inverse();
    CHECK((rhs_h(v, params(0.0, 3.0)) - small_gap).cwiseAbs().maxCoeff() < 1e-10);

    // pure self-stretching: a ||grad v||^2 Delta v on the free nodes
    const RadialGrid fine(129, 9);
    const PlateProfile w = quartic(fine, 1.0);
    const Eigen::VectorXd hs = rhs_h(w, params(0.3, 0, 0, 1.0));
    for (Index i = 0; i + 1 < fine.n_r(); i += 16) {
      const double r = fine.r(i);
      CHECK(hs[i] == doctest::Approx(oracle::grad_sq_quartic * (-8 + 16 * r * r)).epsilon(1e-2));
    }
  }

  TEST_CASE("single step: equilibrium, eigenmode decay, consistency") {
    const RadialGrid g(33, 33);
    const ModelParams p0 = params(0.3, 0);
    const ClampedOperator op(p0, g);
    CHECK(step(PlateProfile(g), 1e-3, p0, op).u.values().isZero(0));

    const EigenPair e = clamped_eigenpair(p0, g);
    const double dt = 1e-4;
    const PlateProfile u0(g, 0.01 * e.zeta.values());
    const PlateProfile u1 = step(u0, dt, p0, op).u;
    const double ratio = stencil::l2_norm(u1) / stencil::l2_norm(u0);
    CHECK(ratio == doctest::Approx(1 / (1 + dt * e.mu)).epsilon(1e-10));
    CHECK(std::abs(ratio - std::exp(-e.mu * dt)) <= std::pow(e.mu * dt, 2));

    // one step against the explicit increment u + dt (-A u + h(u)); the
    // O(dt^2) regime needs dt ||A|| << 1
    const RadialGrid coarse(17, 17);
    const ModelParams p = params(0.3, 4.0);
    const ClampedOperator opl(p, coarse);
    const PlateProfile v = quartic(coarse, -0.2);
    const Eigen::VectorXd drift = -opl.apply(v.values()) + rhs_h(v, p);
    double prev = 0;
    for (double tau : {1e-8, 5e-9, 2.5e-9}) {
      const Eigen::VectorXd explicit_step = v.values() + tau * drift;
      const Eigen::VectorXd diff = step(v, tau, p, opl).u.values() - explicit_step;
      const double err = diff.head(16).cwiseAbs().maxCoeff();
      if (prev > 0) CHECK(prev / err == doctest::Approx(4).epsilon(0.1));
      prev = err;
    }
  }

  TEST_CASE("stationary point is preserved by a step") {
    const RadialGrid g(33, 33);
    const ModelParams p = params(0.3, 5.0);
    const PlateProfile root = newton_solve(5.0, PlateProfile(g), p);
    const StepResult s = step(root, 1e-3, p, ClampedOperator(p, g));
    CHECK(s.admissible);
    CHECK((s.u.values() - root.values()).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("free decay converges to rest at the first eigenvalue") {
    const RadialGrid g(33, 33);
    SimTolerances tols;
    const SimTrace tr = simulate(quartic(g, 0.05), params(0.3, 0), 1.0, 1e-3, tols);
    CHECK(tr.status == SimStatus::converged_to_steady);
    CHECK(tr.final_state.values().cwiseAbs().maxCoeff() < 1e-7);
    // rate from the l2 norm between t = 0.05 and t = 0.1
    const auto& rec = tr.records;
    const double rate = std::log(rec[50].l2_norm / rec[100].l2_norm) / (rec[100].t - rec[50].t);
    CHECK(rate == doctest::Approx(oracle::mu1).epsilon(0.2));
  }

  TEST_CASE("small load converges to the stationary solution") {
    const RadialGrid g(33, 33);
    const double lambda = 0.1 * lambda_star_eps03_n33;
    const ModelParams p = params(0.3, lambda);
    const SimTrace tr = simulate(PlateProfile(g), p, 2.0, 1e-3);
    CHECK(tr.status == SimStatus::converged_to_steady);
    const PlateProfile root = newton_solve(lambda, PlateProfile(g), p);
    CHECK((tr.final_state.values() - root.values()).cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("load above the fold touches down") {
    const RadialGrid g(33, 33);
    const SimTrace tr = simulate(PlateProfile(g), params(0.3, 2 * lambda_star_eps03_n33), 2.0, 1e-3);
    CHECK(tr.status == SimStatus::touchdown);
    CHECK(tr.t_final < 2.0);
    CHECK(tr.records.back().min_u < -0.5);
  }

  TEST_CASE("first-order temporal self-convergence") {
    const RadialGrid g(33, 33);
    const ModelParams p = params(0.3, 5.0);
    PlateModel model(p, g);
    std::vector<Eigen::VectorXd> finals;
    for (double dt : {2e-3, 1e-3, 5e-4, 2.5e-4}) finals.push_back(simulate(model, PlateProfile(g), 0.02, dt).final_state.values());
    const double d1 = (finals[0] - finals[1]).cwiseAbs().maxCoeff();
    const double d2 = (finals[1] - finals[2]).cwiseAbs().maxCoeff();
    const double d3 = (finals[2] - finals[3]).cwiseAbs().maxCoeff();
    CHECK(d1 / d2 == doctest::Approx(2).epsilon(0.2));
    CHECK(d2 / d3 == doctest::Approx(2).epsilon(0.2));
  }

  TEST_CASE("small-gap trajectory matches an independent integrator") {
    const Index n = 33;
    const RadialGrid g(n, n);
    const double lambda = 5.0, dt = 1e-3;
    const SimTrace tr = simulate(PlateProfile(g), params(0.0, lambda), 0.05, dt);
    const Eigen::VectorXd ref = small_gap_run(n, lambda, dt, 50);
    REQUIRE(tr.records.size() == 51);
    CHECK((tr.final_state.values() - ref).cwiseAbs().maxCoeff() <= 1e-8);
  }

  TEST_CASE("trace bookkeeping and energy decay") {
    const RadialGrid g(33, 9);
    std::vector<double> seen;
    const SimTrace tr = simulate(quartic(g, -0.1), params(0.3, 0), 0.02, 1e-3, {},
                                 [&](double t, const PlateProfile&) { seen.push_back(t); });
    CHECK(tr.status == SimStatus::completed);
    REQUIRE(tr.records.size() == 21);
    CHECK(seen.size() == 21);
    CHECK(tr.t_final == doctest::Approx(0.02));
    for (std::size_t k = 1; k < tr.records.size(); ++k) {
      CHECK(tr.records[k].t == doctest::Approx(1e-3 * static_cast<double>(k)));
      CHECK(tr.records[k].energy_proxy < tr.records[k - 1].energy_proxy);
      CHECK(tr.records[k].min_u > -1);
    }
  }

  TEST_CASE("terminal events and argument checks") {
    const RadialGrid g(33, 9);
    SimTolerances tight;
    tight.norm_cap = 1e-3;
    CHECK(simulate(quartic(g, -0.1), params(0.3, 0), 0.01, 1e-3, tight).status == SimStatus::norm_blowup);

    SimTolerances bad;
    bad.touchdown = 1.5;
    CHECK_THROWS_AS(simulate(PlateProfile(g), params(0.3, 0), 0.01, 1e-3, bad), PreconditionError);
    CHECK_THROWS_AS(simulate(PlateProfile(g), params(0.3, 0), 0.01, -1e-3), PreconditionError);
    CHECK_THROWS_AS(simulate(PlateProfile(g), params(0.3, 0), 0.0, 1e-3), PreconditionError);
    const auto unclamped = PlateProfile::from_function(g, [](double r) { return -0.1 * r; });
    CHECK_THROWS_AS(simulate(unclamped, params(0.3, 0), 0.01, 1e-3), PreconditionError);
    CHECK_THROWS_AS(simulate(quartic(g, -1.2), params(0.3, 0), 0.01, 1e-3), DomainError);
  }
}
