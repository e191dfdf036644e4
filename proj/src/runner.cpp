#include "mems/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "mems/elliptic_solver.hpp"
#include "mems/plate_dynamics.hpp"
#include "mems/spectral_verify.hpp"
#include "mems/stationary_branch.hpp"
#include "parallel.hpp"

namespace mems {

namespace {

using nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) {
    for (std::size_t k = 0; k < header.size(); ++k) text_ += (k ? "," : "") + header[k];
    text_ += '\n';
  }
  void row(std::initializer_list<double> values) {
    std::size_t k = 0;
    for (double v : values) text_ += (k++ ? "," : "") + fmt(v);
    text_ += '\n';
  }
  void row(const std::string& label, std::initializer_list<double> values) {
    text_ += label;
    for (double v : values) text_ += "," + fmt(v);
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }
  void write(const std::string& name, const std::string& text, RunReport& report) const {
    if (dir_.empty()) return;
    const std::filesystem::path path = std::filesystem::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw PreconditionError("cannot write " + path.string());
    report.files.push_back(path.string());
  }

 private:
  std::string dir_;
};

PlateProfile initial_profile(const RunConfig& c, const RadialGrid& grid) {
  const double amp = c.init_amplitude;
  return PlateProfile::from_function(grid, [amp](double r) { return -amp * (1 - r * r) * (1 - r * r); });
}

ordered_json header(const RunConfig& c) {
  ordered_json j;
  j["mode"] = to_string(c.mode);
  j["params"] = {{"epsilon", c.model.epsilon}, {"lambda", c.model.lambda}, {"beta", c.model.beta},
                 {"tau", c.model.tau},         {"a", c.model.a}};
  j["grid"] = {{"n_r", c.n_r}, {"n_eta", c.n_eta}};
  return j;
}

void run_potential(const RunConfig& c, ordered_json& j, const Output& out, RunReport& report) {
  const RadialGrid grid(c.n_r, c.n_eta);
  const PlateProfile v = initial_profile(c, grid);
  PotentialSolver solver(grid);
  const PotentialField phi = solver.solve_potential(v, c.model);
  const double residual = solver.last_residual();
  const Eigen::VectorXd g = solver.load(v, c.model);

  Csv field({"r", "eta", "phi"});
  double dev = 0;
  for (Index i = 0; i < grid.n_r(); ++i)
    for (Index k = 0; k < grid.n_eta(); ++k) {
      field.row({grid.r(i), grid.eta(k), phi(i, k)});
      dev = std::max(dev, std::abs(phi(i, k) - grid.eta(k)));
    }
  Csv load({"r", "v", "g"});
  for (Index i = 0; i < grid.n_r(); ++i) load.row({grid.r(i), v[i], g[i]});
  out.write("potential.csv", field.text(), report);
  out.write("load.csv", load.text(), report);

  j["status"] = "ok";
  j["min_gap"] = v.min_gap();
  j["max_phi_minus_eta"] = dev;
  j["solver_residual"] = residual;
  j["g_min"] = g.minCoeff();
  j["g_max"] = g.maxCoeff();
}

struct SimOutcome {
  double lambda;
  SimTrace trace;
};

void run_simulate(const RunConfig& c, ordered_json& j, const Output& out, RunReport& report) {
  const RadialGrid grid(c.n_r, c.n_eta);
  const PlateProfile u0 = initial_profile(c, grid);
  const SimTolerances tols{c.time.touchdown_tol, c.time.norm_cap, c.time.steady_tol};
  const bool sweep = !c.lambdas.empty();
  const std::vector<double> lambdas = sweep ? c.lambdas : std::vector<double>{c.model.lambda};

  std::vector<SimOutcome> results;
  for (double l : lambdas) results.push_back({l, SimTrace(grid)});
  detail::parallel_for(static_cast<long>(lambdas.size()), [&](int, long k) {
    const auto idx = static_cast<std::size_t>(k);
    results[idx].trace = simulate(u0, c.model.with_lambda(lambdas[idx]), c.time.t_end, c.time.dt, tols);
  });

  ordered_json runs = ordered_json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    const SimTrace& tr = results[k].trace;
    Csv csv({"t", "min_u", "l2_u", "grad_sq", "energy"});
    for (const SimRecord& r : tr.records) csv.row({r.t, r.min_u, r.l2_norm, r.grad_sq, r.energy_proxy});
    out.write(sweep ? "simulate_" + std::to_string(k) + ".csv" : "simulate.csv", csv.text(), report);

    ordered_json run;
    run["lambda"] = results[k].lambda;
    run["status"] = to_string(tr.status);
    run["t_final"] = tr.t_final;
    if (tr.status == SimStatus::touchdown) run["touchdown_time"] = tr.t_final;
    run["min_u"] = tr.final_state.values().minCoeff();
    run["l2_u"] = stencil::l2_norm(tr.final_state);
    run["steps"] = tr.records.empty() ? 0 : tr.records.size() - 1;
    report.touchdown = report.touchdown || tr.status == SimStatus::touchdown;
    runs.push_back(run);
  }
  if (sweep) {
    j["status"] = report.touchdown ? "touchdown" : "ok";
    j["runs"] = runs;
  } else {
    for (auto& [key, value] : runs[0].items()) j[key] = value;
  }
}

void run_branch(const RunConfig& c, ordered_json& j, const Output& out, RunReport& report) {
  const RadialGrid grid(c.n_r, c.n_eta);
  const BranchResult br = continue_branch(c.model, grid, c.lambda_step, c.max_points);
  Csv csv({"lambda", "min_u", "l2_u", "leading_eig", "stable"});
  for (const BranchPoint& p : br.points)
    csv.row({p.lambda, p.profile.values().minCoeff(), stencil::l2_norm(p.profile), p.leading_eig,
             p.stable ? 1.0 : 0.0});
  out.write("branch.csv", csv.text(), report);
  j["status"] = br.fold_found ? "fold" : "open";
  j["fold_found"] = br.fold_found;
  j["lambda_star"] = br.lambda_star;
  j["points"] = br.points.size();
}

void run_eigen(const RunConfig& c, ordered_json& j, const Output& out, RunReport& report) {
  const ModelParamsT<long double> p{c.model.epsilon, c.model.lambda, c.model.beta, c.model.tau, c.model.a};
  const RadialGridT<long double> grid(c.n_r, c.n_eta);
  const EigenPairT<long double> e = clamped_eigenpair(p, grid);
  Csv csv({"r", "zeta"});
  bool positive = true;
  for (Index i = 0; i < grid.n_r(); ++i) {
    csv.row({static_cast<double>(grid.r(i)), static_cast<double>(e.zeta[i])});
    if (i + 1 < grid.n_r()) positive = positive && e.zeta[i] > 0;
  }
  out.write("eigen.csv", csv.text(), report);
  j["status"] = "ok";
  j["mu1"] = static_cast<double>(e.mu);
  if (c.model.tau == 0) {
    const double k1 = clamped_disc_root(1);
    const double oracle = c.model.beta * std::pow(k1, 4);
    j["mu1_bessel"] = oracle;
    j["rel_error"] = static_cast<double>(e.mu) / oracle - 1;
  }
  j["residual"] = static_cast<double>(e.residual);
  j["iterations"] = e.iterations;
  j["zeta_positive"] = positive;
}

void run_verify(const RunConfig& c, ordered_json& j, const Output& out, RunReport& report) {
  const RadialGrid grid(c.n_r, c.n_eta);
  Csv csv({"check", "value", "threshold", "pass"});
  ordered_json checks = ordered_json::array();
  bool all = true;
  auto record = [&](const std::string& name, double value, double threshold, bool pass) {
    csv.row(name, {value, threshold, pass ? 1.0 : 0.0});
    checks.push_back({{"check", name}, {"value", value}, {"threshold", threshold}, {"pass", pass}});
    all = all && pass;
  };

  {
    ModelParams p = c.model;
    p.epsilon = 0;
    const PlateProfile v = PlateProfile::from_function(grid, [](double r) { return -0.5 * (1 - r * r) * (1 - r * r); });
    const Eigen::VectorXd g = g_eps(v, p);
    const double err = (g.array() - (1.0 + v.values().array()).square().inverse()).abs().maxCoeff();
    record("small_gap_load", err, 1e-8, err <= 1e-8);
  }
  {
    const PlateProfile v(grid, Eigen::VectorXd::Constant(grid.n_r(), -0.2));
    const PotentialField phi = solve_potential(v, c.model);
    double err = 0;
    for (Index k = 0; k < grid.n_eta(); ++k)
      err = std::max(err, (phi.values().col(k).array() - grid.eta(k)).abs().maxCoeff());
    record("constant_deflection_potential", err, 1e-10, err <= 1e-10);
  }
  {
    const double pi = std::numbers::pi;
    const auto a = mixed_derivative_identity_check(
        GridField::from_function(grid, [](double r, double e) { return (1 - r * r) * e * (1 - e); }));
    record("mixed_identity_poly", a.relerr, 5e-3, a.relerr <= 5e-3);
    const auto b = mixed_derivative_identity_check(GridField::from_function(
        grid, [pi](double r, double e) { return (1 - r * r) * (1 - r * r) * std::sin(pi * e); }));
    record("mixed_identity_sine", b.relerr, 5e-3, b.relerr <= 5e-3);
  }
  {
    const auto corpus = trace_corpus(grid, c.corpus_size, c.seed);
    for (double p : {2.0, 3.0, 4.0}) {
      const TraceFamilyReport f = trace_inequality_family(corpus, p, 10.0);
      record("trace_ratio_max_p" + std::to_string(static_cast<int>(p)), f.max_ratio, 10.0, f.bounded);
    }
  }
  {
    const AuxiliaryU aux = auxiliary_U(PlateProfile(grid, Eigen::VectorXd::Constant(grid.n_r(), -0.5)));
    double err = 0;
    for (Index i = 0; i < grid.n_r(); ++i) {
      const double r = grid.r(i);
      err = std::max({err, std::abs(aux.U[i] - (r * r - 1) / 8), std::abs(aux.dU[i] - r / 4)});
    }
    record("auxiliary_closed_form", err, 1e-12, err <= 1e-12);
  }
  {
    const ModelParamsT<long double> p{0, 0, 1, 0, 0};
    const auto e = clamped_eigenpair(p, RadialGridT<long double>(c.n_r, 9));
    const double rel = std::abs(static_cast<double>(e.mu) / std::pow(clamped_disc_root(1), 4) - 1);
    record("eigenvalue_bessel", rel, 5e-3, rel <= 5e-3);
  }

  out.write("verify.csv", csv.text(), report);
  j["status"] = all ? "pass" : "fail";
  j["seed"] = c.seed;
  j["checks"] = checks;
}

}  // namespace

RunReport run(const RunConfig& config) {
  config.validate();
  RunReport report;
  const Output out(config.output_path);
  ordered_json j = header(config);
  switch (config.mode) {
    case RunMode::potential: run_potential(config, j, out, report); break;
    case RunMode::simulate: run_simulate(config, j, out, report); break;
    case RunMode::branch: run_branch(config, j, out, report); break;
    case RunMode::eigen: run_eigen(config, j, out, report); break;
    case RunMode::verify: run_verify(config, j, out, report); break;
  }
  report.summary = j.dump(2);
  out.write("summary.json", report.summary + "\n", report);
  return report;
}

}  // namespace mems
