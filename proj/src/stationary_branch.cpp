#include "mems/stationary_branch.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "mems/stencils.hpp"
#include "parallel.hpp"

namespace mems {

namespace {

// Evaluates F(lambda, v) = v - A^{-1} h(v) and h itself on the free nodes
// r_0..r_{n-2}. Owns a potential solver, so one instance per thread.
class Evaluator {
 public:
  Evaluator(const ClampedOperator& op, const ModelParams& params)
      : op_(&op), params_(params), solver_(op.grid()) {}

  Index size() const { return op_->free_size(); }

  PlateProfile profile(const Eigen::VectorXd& free) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(free.size() + 1);
    full.head(free.size()) = free;
    return PlateProfile(op_->grid(), full);
  }

  // h(v) = -lambda g(v) + a ||grad v||^2 Delta v; g is returned through `load`
  // when requested (it is needed for dF/dlambda).
  Eigen::VectorXd h(const Eigen::VectorXd& free, double lambda, Eigen::VectorXd* load = nullptr) {
    if (!free.allFinite()) throw DomainError("deflection is not finite");
    const PlateProfile v = profile(free);
    if (!(v.min_gap() > 0)) {
      std::ostringstream msg;
      msg << "deflection left the admissible set (min(1 + v) = " << v.min_gap() << ")";
      throw DomainError(msg.str());
    }
    const Index m = size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    if (lambda != 0.0 || load) {
      const Eigen::VectorXd g = solver_.load(v, params_).head(m);
      out -= lambda * g;
      if (load) *load = g;
    }
    if (params_.a != 0.0) out += params_.a * grad_norm_sq(v) * (op_->laplacian() * free);
    return out;
  }

  Eigen::VectorXd solve_A(const Eigen::VectorXd& free) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(free.size() + 1);
    full.head(free.size()) = free;
    return op_->solve(full).head(free.size());
  }

  Eigen::VectorXd F(const Eigen::VectorXd& free, double lambda, Eigen::VectorXd* f_lambda = nullptr) {
    Eigen::VectorXd g;
    const Eigen::VectorXd hv = h(free, lambda, f_lambda ? &g : nullptr);
    if (f_lambda) *f_lambda = solve_A(g);
    return free - solve_A(hv);
  }

  const ClampedOperator& op() const { return *op_; }
  const ModelParams& params() const { return params_; }

 private:
  const ClampedOperator* op_;
  ModelParams params_;
  PotentialSolver solver_;
};

double jacobian_step(const Eigen::VectorXd& v, double rel) { return rel * (1.0 + v.lpNorm<Eigen::Infinity>()); }

// Forward-difference Jacobian of `fn` (F or h) around v, column by column.
template <class Fn>
Eigen::MatrixXd fd_jacobian(const ClampedOperator& op, const ModelParams& params, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& f0, double step, Fn fn) {
  const Index m = v.size();
  Eigen::MatrixXd jac(f0.size(), m);
  const int workers = std::min<int>(detail::worker_count(), static_cast<int>(m));
  std::vector<std::unique_ptr<Evaluator>> evals;
  for (int w = 0; w < workers; ++w) evals.push_back(std::make_unique<Evaluator>(op, params));
  detail::parallel_for(
      m,
      [&](int w, long k) {
        Eigen::VectorXd vp = v;
        vp[k] += step;
        jac.col(k) = (fn(*evals[static_cast<std::size_t>(w)], vp) - f0) / step;
      },
      workers);
  return jac;
}

Eigen::MatrixXd jacobian_F(Evaluator& ev, const Eigen::VectorXd& v, double lambda, const Eigen::VectorXd& f0,
                           double rel) {
  return fd_jacobian(ev.op(), ev.params(), v, f0, jacobian_step(v, rel),
                     [lambda](Evaluator& e, const Eigen::VectorXd& x) { return e.F(x, lambda); });
}

double inf_norm(const Eigen::VectorXd& x) { return x.lpNorm<Eigen::Infinity>(); }

struct NewtonOutcome {
  Eigen::VectorXd v;
  int iterations = 0;
  std::vector<double> history;
};

NewtonOutcome natural_newton(Evaluator& ev, double lambda, Eigen::VectorXd v, const NewtonOptions& opt) {
  NewtonOutcome out;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd f = ev.F(v, lambda);
    const double norm = inf_norm(f);
    out.history.push_back(norm);
    if (norm <= opt.tolerance) {
      out.v = std::move(v);
      out.iterations = it;
      return out;
    }
    if (it == opt.max_iterations || !std::isfinite(norm)) {
      std::ostringstream msg;
      msg << "Newton did not converge at lambda = " << lambda << " (residual " << norm << " after " << it
          << " iterations)";
      throw NonConvergenceError(msg.str());
    }
    const Eigen::MatrixXd jac = jacobian_F(ev, v, lambda, f, opt.jacobian_step);
    v -= jac.partialPivLu().solve(f);
  }
}

// Points on the branch as x = (v on the free nodes, lambda). Distances use
// the RMS norm of v and lambda / lambda_ref with lambda_ref = 1 / max A^{-1} 1.
struct Metric {
  double v_weight;
  double l_weight;

  double dot(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const Index m = x.size() - 1;
    return v_weight * x.head(m).dot(y.head(m)) + l_weight * x[m] * y[m];
  }
  double norm(const Eigen::VectorXd& x) const { return std::sqrt(dot(x, x)); }
  // Row of the bordered system for the constraint <t, dx>.
  Eigen::RowVectorXd row(const Eigen::VectorXd& t) const {
    const Index m = t.size() - 1;
    Eigen::RowVectorXd r(t.size());
    r.head(m) = v_weight * t.head(m).transpose();
    r[m] = l_weight * t[m];
    return r;
  }
};

struct Node {
  Eigen::VectorXd x;
  Eigen::VectorXd t;  // unit tangent in the metric, oriented along increasing s
  double s = 0;
  int iterations = 0;

  double lambda() const { return x[x.size() - 1]; }
  double t_lambda(const Metric& g) const { return std::sqrt(g.l_weight) * t[t.size() - 1]; }
};

class Continuation {
 public:
  Continuation(const ModelParams& params, const RadialGrid& grid, const ContinuationOptions& opt)
      : op_(params.with_lambda(0), grid), ev_(op_, params), opt_(opt) {
    m_ = op_.free_size();
    const double peak = inf_norm(ev_.solve_A(Eigen::VectorXd::Ones(m_)));
    lambda_ref_ = 1.0 / peak;
    metric_ = {1.0 / static_cast<double>(m_), 1.0 / (lambda_ref_ * lambda_ref_)};
  }

  const ClampedOperator& op() const { return op_; }
  double lambda_ref() const { return lambda_ref_; }
  const Metric& metric() const { return metric_; }

  Eigen::MatrixXd bordered(const Eigen::VectorXd& x, const Eigen::VectorXd& f, const Eigen::VectorXd& f_lambda,
                           const Eigen::VectorXd& t) {
    Eigen::MatrixXd b(m_ + 1, m_ + 1);
    b.topLeftCorner(m_, m_) = jacobian_F(ev_, x.head(m_), x[m_], f, opt_.newton.jacobian_step);
    b.topRightCorner(m_, 1) = f_lambda;
    b.bottomRows(1) = metric_.row(t);
    return b;
  }

  // Unit tangent at a solution x, oriented so that <t, prev> > 0.
  Eigen::VectorXd tangent(const Eigen::VectorXd& x, const Eigen::VectorXd& prev) {
    Eigen::VectorXd f_lambda;
    const Eigen::VectorXd f = ev_.F(x.head(m_), x[m_], &f_lambda);
    const Eigen::MatrixXd b = bordered(x, f, f_lambda, prev);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_ + 1);
    rhs[m_] = 1;
    Eigen::VectorXd t = b.partialPivLu().solve(rhs);
    if (!t.allFinite()) throw SolverError("tangent system is singular");
    return t / metric_.norm(t);
  }

  // Corrector for F(x) = 0, <t, x - base> = ds starting from base + ds t.
  Node arclength_step(const Node& base, double ds) {
    Eigen::VectorXd x = base.x + ds * base.t;
    for (int it = 0;; ++it) {
      Eigen::VectorXd f_lambda;
      const Eigen::VectorXd f = ev_.F(x.head(m_), x[m_], &f_lambda);
      const double constraint = metric_.dot(base.t, x - base.x) - ds;
      const double norm = std::max(inf_norm(f), std::abs(constraint));
      if (inf_norm(f) <= opt_.newton.tolerance && std::abs(constraint) <= 1e-12) {
        Node node;
        node.x = x;
        node.t = tangent(x, base.t);
        node.s = base.s + ds;
        node.iterations = it;
        return node;
      }
      if (it == opt_.newton.max_iterations || !std::isfinite(norm))
        throw NonConvergenceError("arclength corrector did not converge");
      Eigen::VectorXd rhs(m_ + 1);
      rhs.head(m_) = -f;
      rhs[m_] = -constraint;
      x += bordered(x, f, f_lambda, base.t).partialPivLu().solve(rhs);
      if (x[m_] < 0) throw DomainError("arclength corrector produced a negative lambda");
    }
  }

  Node natural_step(const Node& base, double dl) {
    const double lambda = base.lambda() + dl;
    const double tl = base.t[m_];
    const Eigen::VectorXd guess = base.x.head(m_) + (dl / tl) * base.t.head(m_);
    NewtonOutcome r = natural_newton(ev_, lambda, guess, opt_.newton);
    Node node;
    node.x.resize(m_ + 1);
    node.x.head(m_) = r.v;
    node.x[m_] = lambda;
    node.t = tangent(node.x, base.t);
    node.s = base.s + metric_.norm(node.x - base.x);
    node.iterations = r.iterations;
    return node;
  }

  Node origin() {
    Node node;
    node.x = Eigen::VectorXd::Zero(m_ + 1);
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(m_ + 1);
    seed[m_] = 1;
    node.t = tangent(node.x, seed);
    return node;
  }

  double min_gap(const Node& node) const { return 1.0 + node.x.head(m_).minCoeff(); }

  BranchPoint point(const Node& node) const {
    BranchPoint p(ev_.profile(node.x.head(m_)), node.lambda());
    p.arclength = node.s;
    return p;
  }

  // Bisection on the sign of dlambda/ds inside [a, b] (t_lambda(a) > 0 >= t_lambda(b)).
  std::pair<Node, Node> refine_fold(Node a, Node b) {
    for (int k = 0; k < 80; ++k) {
      const double width = std::abs(a.lambda() - b.lambda()) / std::max(a.lambda(), b.lambda());
      if (width <= opt_.fold_rel_width && b.s - a.s <= opt_.fold_arclength_width) break;
      Node mid;
      try {
        mid = arclength_step(a, 0.5 * (b.s - a.s));
      } catch (const Error&) {
        break;
      }
      if (mid.t_lambda(metric_) > 0) a = std::move(mid);
      else b = std::move(mid);
    }
    return {std::move(a), std::move(b)};
  }

  BranchResult run(double dl0, int max_points) {
    std::vector<Node> nodes;
    std::vector<Node> extra;  // refined fold samples, merged by arclength
    nodes.push_back(origin());

    bool natural = true;
    bool fold = false;
    double dl = dl0, ds = 0, ds_init = 0;
    int post_fold = 0;
    auto start_arclength = [&](const Node& cur) {
      natural = false;
      ds_init = std::max(dl0 * std::sqrt(metric_.l_weight), 1e-3) / std::max(cur.t_lambda(metric_), 0.1);
      ds = ds_init;
    };

    while (static_cast<int>(nodes.size() + extra.size()) < max_points) {
      const Node& cur = nodes.back();
      if (natural && cur.t_lambda(metric_) < opt_.switch_slope) start_arclength(cur);
      Node next;
      try {
        next = natural ? natural_step(cur, dl) : arclength_step(cur, ds);
      } catch (const Error&) {
        if (natural) {
          dl *= 0.5;
          if (dl < dl0 * opt_.min_step_fraction) start_arclength(cur);
        } else {
          ds *= 0.5;
          if (ds < ds_init * opt_.min_step_fraction) break;
        }
        continue;
      }
      if (min_gap(next) < opt_.min_gap) break;

      const bool crossed = !fold && next.t_lambda(metric_) <= 0;
      if (crossed) {
        fold = true;
        auto [a, b] = refine_fold(cur, next);
        extra.push_back(std::move(a));
        extra.push_back(std::move(b));
      }
      const int iterations = next.iterations;
      nodes.push_back(std::move(next));
      if (fold && post_fold++ >= opt_.post_fold_points) break;
      if (natural) {
        if (iterations <= 3) dl = std::min(dl0, 1.5 * dl);
      } else if (iterations <= 3) {
        ds = std::min(2 * ds_init, 1.5 * ds);
      }
    }

    for (auto& n : extra) nodes.push_back(std::move(n));
    std::stable_sort(nodes.begin(), nodes.end(), [](const Node& l, const Node& r) { return l.s < r.s; });

    BranchResult result;
    result.fold_found = fold;
    for (const Node& n : nodes) result.points.push_back(point(n));
    return result;
  }

 private:
  ClampedOperator op_;
  Evaluator ev_;
  ContinuationOptions opt_;
  Index m_ = 0;
  double lambda_ref_ = 1;
  Metric metric_{1, 1};
};

Eigen::MatrixXd linearization(const ClampedOperator& op, const ModelParams& params, const Eigen::VectorXd& u,
                              double lambda, double rel) {
  Evaluator ev(op, params);
  const Eigen::VectorXd h0 = ev.h(u, lambda);
  const Eigen::MatrixXd dh = fd_jacobian(op, params, u, h0, jacobian_step(u, rel),
                                         [lambda](Evaluator& e, const Eigen::VectorXd& x) { return e.h(x, lambda); });
  return dh - op.matrix();
}

std::vector<double> sorted_spectrum(const Eigen::MatrixXd& l, int k) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(l, false);
  if (es.info() != Eigen::Success) throw SolverError("eigenvalue computation of the linearization failed");
  std::vector<double> re(static_cast<std::size_t>(l.rows()));
  for (Index i = 0; i < l.rows(); ++i) re[static_cast<std::size_t>(i)] = es.eigenvalues()[i].real();
  std::sort(re.begin(), re.end(), std::greater<>());
  re.resize(std::min<std::size_t>(re.size(), static_cast<std::size_t>(std::max(k, 1))));
  return re;
}

std::vector<double> spectrum_of(const ClampedOperator& op, const ModelParams& params, BranchPoint& point, int k) {
  if (!(point.profile.min_gap() > 0)) throw DomainError("branch point profile is not admissible");
  const Index m = op.free_size();
  const Eigen::MatrixXd l = linearization(op, params, point.profile.values().head(m), point.lambda, 1e-6);
  std::vector<double> eig = sorted_spectrum(l, k);
  point.leading_eig = eig.front();
  point.stable = point.leading_eig < 0;
  return eig;
}

}  // namespace

Eigen::VectorXd residual_F(double lambda, const PlateProfile& v, const ModelParams& params, const ClampedOperator& op) {
  if (!(v.grid() == op.grid())) throw PreconditionError("profile and operator use different grids");
  Evaluator ev(op, params);
  const Index m = op.free_size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  out.head(m) = ev.F(v.values().head(m), lambda);
  return out;
}

Eigen::MatrixXd residual_jacobian(PlateModel& model, double lambda, const PlateProfile& v, double step) {
  Evaluator ev(model.op(), model.params());
  const Index m = model.op().free_size();
  const Eigen::VectorXd x = v.values().head(m);
  return jacobian_F(ev, x, lambda, ev.F(x, lambda), step);
}

NewtonReport newton_iterate(PlateModel& model, double lambda, const PlateProfile& guess, const NewtonOptions& options) {
  if (!(guess.grid() == model.grid())) throw PreconditionError("guess and model use different grids");
  if (!(guess.min_gap() > 0)) throw DomainError("Newton guess is not admissible");
  if (!(lambda >= 0)) throw PreconditionError("lambda must be >= 0");
  Evaluator ev(model.op(), model.params());
  const Index m = model.op().free_size();
  NewtonOutcome r = natural_newton(ev, lambda, guess.values().head(m), options);
  NewtonReport report{ev.profile(r.v), r.iterations, std::move(r.history)};
  return report;
}

PlateProfile newton_solve(double lambda, const PlateProfile& guess, const ModelParams& params,
                          const NewtonOptions& options) {
  PlateModel model(params, guess.grid());
  return newton_iterate(model, lambda, guess, options).root;
}

BranchResult continue_branch(const ModelParams& params, const RadialGrid& grid, double lambda_step_init,
                             int max_points, const ContinuationOptions& options) {
  params.validate();
  if (!(lambda_step_init > 0)) throw PreconditionError("initial lambda step must be positive");
  if (max_points < 2) throw PreconditionError("max_points must be at least 2");
  Continuation cont(params, grid, options);
  BranchResult result = cont.run(lambda_step_init, max_points);

  detail::parallel_for(static_cast<long>(result.points.size()), [&](int, long k) {
    spectrum_of(cont.op(), params, result.points[static_cast<std::size_t>(k)], options.spectrum_size);
  });

  // sup of lambda over stable samples; the fold sample is the stable one
  // closest to the turning point.
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    const BranchPoint& p = result.points[k];
    if (p.stable && p.lambda >= result.lambda_star) {
      result.lambda_star = p.lambda;
      if (result.fold_found) result.fold_index = static_cast<Index>(k);
    }
  }
  return result;
}

Eigen::MatrixXd linearization_matrix(PlateModel& model, const PlateProfile& u, double lambda) {
  const Index m = model.op().free_size();
  return linearization(model.op(), model.params(), u.values().head(m), lambda, 1e-6);
}

std::vector<double> linearized_spectrum(PlateModel& model, BranchPoint& point, int k) {
  if (!(point.profile.grid() == model.grid())) throw PreconditionError("branch point and model use different grids");
  return spectrum_of(model.op(), model.params(), point, k);
}

std::vector<double> linearized_spectrum(BranchPoint& point, const ModelParams& params, int k) {
  const ClampedOperator op(params, point.profile.grid());
  return spectrum_of(op, params, point, k);
}

}  // namespace mems
