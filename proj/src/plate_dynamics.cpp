#include "mems/plate_dynamics.hpp"

#include <cmath>
#include <numbers>

#include "mems/stencils.hpp"

namespace mems {

namespace {

void check_size(const RadialGrid& grid, const Eigen::VectorXd& u) {
  if (u.size() != grid.n_r()) throw PreconditionError("vector length does not match the radial grid");
}

Eigen::VectorXd load_term(PotentialSolver& solver, const PlateProfile& v, const ModelParams& params,
                          const ClampedOperator& op, double lambda) {
  const Index n = v.size();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  if (lambda != 0.0) h = -lambda * solver.load(v, params);
  if (params.a != 0.0) {
    const double stretch = params.a * grad_norm_sq(v);
    h.head(n - 1) += stretch * (op.laplacian() * v.values().head(n - 1));
  }
  return h;
}

}  // namespace

ClampedOperator::ClampedOperator(const ModelParams& params, const RadialGrid& grid) : params_(params), grid_(grid) {
  params.validate();
  laplacian_ = dirichlet_laplacian(grid);
  matrix_ = clamped_matrix(params, grid);
  lu_.compute(matrix_);
}

Eigen::VectorXd ClampedOperator::weights() const {
  const Index m = free_size();
  Eigen::VectorXd w(m);
  w[0] = grid_.h_r() / 8;
  for (Index i = 1; i < m; ++i) w[i] = grid_.r(i);
  return w;
}

Eigen::VectorXd ClampedOperator::apply(const Eigen::VectorXd& u) const {
  check_size(grid_, u);
  const Index m = free_size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  out.head(m) = matrix_ * u.head(m);
  return out;
}

Eigen::VectorXd ClampedOperator::solve(const Eigen::VectorXd& rhs) const {
  check_size(grid_, rhs);
  const Index m = free_size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rhs.size());
  out.head(m) = lu_.solve(rhs.head(m));
  return out;
}

ClampedOperator assemble_A(const ModelParams& params, const RadialGrid& grid) { return ClampedOperator(params, grid); }

double grad_norm_sq(const PlateProfile& v) {
  const Eigen::VectorXd dv = stencil::radial_first(v.values(), v.grid().h_r());
  return stencil::integrate_disc(v.grid(), dv.cwiseAbs2());
}

PlateModel::PlateModel(const ModelParams& params, const RadialGrid& grid)
    : params_(params), grid_(grid), op_(params, grid), solver_(grid) {}

Eigen::VectorXd PlateModel::rhs(const PlateProfile& v, double lambda) {
  return load_term(solver_, v, params_, op_, lambda);
}

Eigen::VectorXd rhs_h(const PlateProfile& v, const ModelParams& params) {
  PlateModel model(params, v.grid());
  return model.rhs(v);
}

ImexStepper::ImexStepper(PlateModel& model, double dt) : model_(&model), dt_(dt) {
  if (!(dt > 0)) throw PreconditionError("time step must be positive");
  const Index m = model.op().free_size();
  lu_.compute(Eigen::MatrixXd::Identity(m, m) + dt * model.op().matrix());
}

StepResult ImexStepper::step(const PlateProfile& u) {
  const Index m = model_->op().free_size();
  const Eigen::VectorXd h = model_->rhs(u);
  Eigen::VectorXd next = Eigen::VectorXd::Zero(u.size());
  next.head(m) = lu_.solve(u.values().head(m) + dt_ * h.head(m));
  PlateProfile out(u.grid(), next);
  const bool ok = out.values().allFinite() && out.min_gap() > 0;
  return {std::move(out), ok};
}

StepResult step(const PlateProfile& u, double dt, const ModelParams& params, const ClampedOperator& op) {
  if (!(dt > 0)) throw PreconditionError("time step must be positive");
  if (!(op.grid() == u.grid())) throw PreconditionError("operator and profile live on different grids");
  PotentialSolver solver(u.grid());
  const Eigen::VectorXd h = load_term(solver, u, params, op, params.lambda);
  const Index m = op.free_size();
  Eigen::VectorXd next = Eigen::VectorXd::Zero(u.size());
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m) + dt * op.matrix();
  next.head(m) = lhs.partialPivLu().solve(u.values().head(m) + dt * h.head(m));
  PlateProfile out(u.grid(), next);
  const bool ok = out.values().allFinite() && out.min_gap() > 0;
  return {std::move(out), ok};
}

std::string to_string(SimStatus status) {
  switch (status) {
    case SimStatus::completed: return "completed";
    case SimStatus::touchdown: return "touchdown";
    case SimStatus::norm_blowup: return "norm_blowup";
    case SimStatus::converged_to_steady: return "converged_to_steady";
  }
  return "unknown";
}

void SimTolerances::validate() const {
  if (!(touchdown > 0 && touchdown < 1)) throw PreconditionError("touchdown tolerance must lie in (0, 1)");
  if (!(norm_cap > 0)) throw PreconditionError("norm cap must be positive");
  if (!(steady > 0)) throw PreconditionError("steady tolerance must be positive");
}

double energy_proxy(const ClampedOperator& op, const PlateProfile& u, double a) {
  const Index m = op.free_size();
  const Eigen::VectorXd x = u.values().head(m);
  const double h = op.grid().h_r();
  const double bilinear = 2 * std::numbers::pi * h * (op.weights().array() * x.array() * (op.matrix() * x).array()).sum();
  const double g = grad_norm_sq(u);
  return 0.5 * bilinear + 0.25 * a * g * g;
}

SimTrace simulate(PlateModel& model, const PlateProfile& u0, double t_end, double dt, const SimTolerances& tols,
                  const SimObserver& observer) {
  tols.validate();
  if (!(t_end > 0)) throw PreconditionError("t_end must be positive");
  if (!(dt > 0)) throw PreconditionError("time step must be positive");
  if (!(u0.grid() == model.grid())) throw PreconditionError("initial profile and model use different grids");
  if (!(u0.min_gap() > 0)) throw DomainError("initial deflection is not admissible");
  if (std::abs(u0[u0.size() - 1]) > 1e-12) throw PreconditionError("initial deflection is not clamped (u(1) != 0)");

  const double a = model.params().a;
  SimTrace trace(model.grid());
  auto record = [&](double t, const PlateProfile& u) {
    trace.records.push_back(
        {t, u.values().minCoeff(), stencil::l2_norm(u), grad_norm_sq(u), energy_proxy(model.op(), u, a)});
    if (observer) observer(t, u);
  };

  PlateProfile u = u0;
  double t = 0;
  record(t, u);
  trace.final_state = u;
  if (u.min_gap() <= tols.touchdown) {
    trace.status = SimStatus::touchdown;
    return trace;
  }

  ImexStepper stepper(model, dt);
  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  trace.status = SimStatus::completed;
  for (long k = 1; k <= steps; ++k) {
    StepResult next = stepper.step(u);
    const double t_next = static_cast<double>(k) * dt;
    if (!next.admissible || next.u.min_gap() <= tols.touchdown) {
      trace.status = SimStatus::touchdown;
      t = t_next;
      if (next.admissible) {
        u = std::move(next.u);
        record(t, u);
      }
      break;
    }
    const double norm = stencil::w2_norm(next.u);
    if (!std::isfinite(norm) || norm > tols.norm_cap) {
      trace.status = SimStatus::norm_blowup;
      t = t_next;
      break;
    }
    const double change = (next.u.values() - u.values()).lpNorm<Eigen::Infinity>() / dt;
    u = std::move(next.u);
    t = t_next;
    record(t, u);
    if (change <= tols.steady) {
      trace.status = SimStatus::converged_to_steady;
      break;
    }
  }
  trace.t_final = t;
  trace.final_state = u;
  return trace;
}

SimTrace simulate(const PlateProfile& u0, const ModelParams& params, double t_end, double dt,
                  const SimTolerances& tols, const SimObserver& observer) {
  PlateModel model(params, u0.grid());
  return simulate(model, u0, t_end, dt, tols, observer);
}

}  // namespace mems
