#include "mems/spectral_verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mems {

EigenPair clamped_eigenpair(const ModelParams& params, const RadialGrid& grid) {
  return clamped_eigenpair<double>(params, grid, EigenOptions{});
}

double clamped_disc_root(int index) {
  if (index < 1) throw PreconditionError("root index starts at 1");
  auto f = [](double k) {
    return std::cyl_bessel_j(0.0, k) * std::cyl_bessel_i(1.0, k) + std::cyl_bessel_i(0.0, k) * std::cyl_bessel_j(1.0, k);
  };
  // roots are simple and separated by roughly pi; scan then bisect
  const double dk = 0.05;
  double lo = 0.5, flo = f(lo);
  int found = 0;
  for (double hi = lo + dk;; hi += dk) {
    const double fhi = f(hi);
    if ((flo < 0) != (fhi < 0) && ++found == index) {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    lo = hi;
    flo = fhi;
  }
}

AuxiliaryU auxiliary_U(const PlateProfile& u) {
  if (!u.values().allFinite()) throw PreconditionError("source profile is not finite");
  const RadialGrid& grid = u.grid();
  const Index n = grid.n_r(), m = n - 1;
  const Eigen::MatrixXd lap = dirichlet_laplacian(grid);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
  values.head(m) = lap.partialPivLu().solve(-u.values().head(m));
  AuxiliaryU out{PlateProfile(grid, values), stencil::radial_first(values, grid.h_r()),
                 stencil::radial_second(values, grid.h_r())};
  return out;
}

AuxiliaryBoundReport check_auxiliary_bounds(const AuxiliaryU& aux, double slack1, double slack2) {
  AuxiliaryBoundReport report;
  const RadialGrid& grid = aux.U.grid();
  report.max_excess_d1 = -std::numeric_limits<double>::infinity();
  report.max_excess_d2 = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < grid.n_r(); ++i) {
    report.max_excess_d1 = std::max(report.max_excess_d1, std::abs(aux.dU[i]) - grid.r(i) / 2);
    report.max_excess_d2 = std::max(report.max_excess_d2, std::abs(aux.d2U[i]) - 1.5);
  }
  report.holds = report.max_excess_d1 <= slack1 && report.max_excess_d2 <= slack2;
  return report;
}

TraceReport trace_inequality_check(const GridField& w, double p) {
  if (!(p >= 2 && p <= 4)) throw PreconditionError("trace exponent must lie in [2, 4]");
  const RadialGrid& grid = w.grid();
  const Eigen::MatrixXd& v = w.values();
  if (!v.allFinite()) throw PreconditionError("test function is not finite");

  TraceReport report;
  const Eigen::VectorXd top = v.col(grid.n_eta() - 1).cwiseAbs();
  report.lhs = stencil::integrate_disc(grid, top.array().pow(p).matrix());
  const Eigen::MatrixXd wr = stencil::d_r(v, grid.h_r());
  const Eigen::MatrixXd we = stencil::d_eta(v, grid.h_eta());
  const double l2sq = stencil::integrate_cylinder(grid, v.cwiseAbs2());
  const double grad = stencil::integrate_cylinder(grid, (wr.cwiseAbs2() + we.cwiseAbs2()).eval());
  report.l2 = std::sqrt(l2sq);
  report.w12 = std::sqrt(l2sq + grad);
  if (report.w12 == 0.0) return report;
  report.ratio = report.lhs / (std::pow(report.w12, (3 * p - 4) / 2) * std::pow(report.l2, (4 - p) / 2));
  return report;
}

std::vector<GridField> trace_corpus(const RadialGrid& grid, int count, std::uint64_t seed) {
  if (count < 0) throw PreconditionError("corpus size must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> degree(0, 3);
  std::uniform_int_distribution<int> modes(0, 4);

  std::vector<GridField> corpus;
  corpus.reserve(static_cast<std::size_t>(count));
  const double pi = std::numbers::pi;
  for (int f = 0; f < count; ++f) {
    const int kmax = degree(rng), lmax = modes(rng);
    Eigen::MatrixXd c_const(kmax + 1, 1), c_cos(kmax + 1, lmax + 1), c_sin(kmax + 1, lmax + 1);
    for (int k = 0; k <= kmax; ++k) {
      c_const(k, 0) = coef(rng);
      for (int l = 1; l <= lmax; ++l) {
        c_cos(k, l) = coef(rng);
        c_sin(k, l) = coef(rng);
      }
    }
    corpus.push_back(GridField::from_function(grid, [&](double r, double eta) {
      double value = 0;
      for (int k = 0; k <= kmax; ++k) {
        double mode = c_const(k, 0);
        for (int l = 1; l <= lmax; ++l) mode += c_cos(k, l) * std::cos(l * pi * eta) + c_sin(k, l) * std::sin(l * pi * eta);
        value += std::pow(r, 2 * k) * mode;
      }
      return value;
    }));
  }
  return corpus;
}

TraceFamilyReport trace_inequality_family(const std::vector<GridField>& corpus, double p, double cap) {
  TraceFamilyReport report;
  report.count = static_cast<int>(corpus.size());
  report.min_ratio = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (const GridField& w : corpus) {
    const double ratio = trace_inequality_check(w, p).ratio;
    finite = finite && std::isfinite(ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
    report.min_ratio = std::min(report.min_ratio, ratio);
  }
  if (corpus.empty()) report.min_ratio = 0;
  report.bounded = finite && report.max_ratio <= cap;
  return report;
}

MixedIdentityReport mixed_derivative_identity_check(const PotentialField& phi) {
  const RadialGrid& grid = phi.grid();
  const Eigen::MatrixXd& v = phi.values();
  const Index nr = grid.n_r(), ne = grid.n_eta();
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  const double boundary = std::max({v.row(nr - 1).cwiseAbs().maxCoeff(), v.col(0).cwiseAbs().maxCoeff(),
                                    v.col(ne - 1).cwiseAbs().maxCoeff()});
  if (boundary > 1e-12 * scale) throw PreconditionError("Phi must vanish on the cylinder boundary");

  const Eigen::MatrixXd lap = stencil::laplacian_r(v, grid.h_r());
  const Eigen::MatrixXd pee = stencil::d_etaeta(v, grid.h_eta());
  const Eigen::MatrixXd pre = stencil::d_r(stencil::d_eta(v, grid.h_eta()), grid.h_r());
  MixedIdentityReport report;
  report.lhs = stencil::integrate_cylinder(grid, lap.cwiseProduct(pee));
  report.rhs = stencil::integrate_cylinder(grid, pre.cwiseAbs2().eval());
  const double denom = std::max(std::abs(report.lhs), std::abs(report.rhs));
  report.relerr = denom == 0.0 ? 0.0 : std::abs(report.lhs - report.rhs) / denom;
  return report;
}

}  // namespace mems
