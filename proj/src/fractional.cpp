#include "fracrb/fractional.hpp"

#include "fracrb/error.hpp"

#include <cmath>
#include <numbers>

namespace fracrb {

FractionalProblem::FractionalProblem(std::shared_ptr<const AssembledSystem> sys,
                                     SincGrid grid, SolverOptions solver)
    : sys_(std::move(sys)), grid_(grid), solver_(solver) {
  if (!sys_) {
    throw InvalidParameter("fractional problem needs an assembled system");
  }
  if (-grid_.lower_end() > max_abs_shift_exponent ||
      grid_.upper_end() > max_abs_shift_exponent) {
    throw InvalidParameter("sinc grid reaches |y| > 700; e^y would overflow");
  }
  load_ = sys_->F;
}

void FractionalProblem::set_load(FieldVector load) {
  if (load.size() != sys_->n_dofs()) {
    throw InvalidParameter("load length does not match N_h");
  }
  load_ = std::move(load);
}

void FractionalProblem::enable_factorization_cache(bool on) {
  cache_on_ = on;
  if (!on) {
    cache_.clear();
  }
}

FieldVector FractionalProblem::solve_shifted(double y) const {
  if (!(std::abs(y) <= max_abs_shift_exponent)) {
    throw InvalidParameter("shift exponent y must satisfy |y| <= 700");
  }
  ++solves_;
  try {
    if (cache_on_) {
      auto it = cache_.find(y);
      if (it == cache_.end()) {
        it = cache_.emplace(y, SpdSolver(*sys_, std::exp(y), solver_)).first;
      }
      return it->second.solve(load_);
    }
    return SpdSolver(*sys_, std::exp(y), solver_).solve(load_);
  } catch (const SolverFailure &e) {
    throw SolverFailure("shifted solve at y = " + std::to_string(y) + ": " +
                            e.what(),
                        e.residual());
  }
}

FieldVector FractionalProblem::evaluate_full(double s) const {
  const auto nodes = weights(s, grid_);
  std::vector<FieldVector> terms;
  terms.reserve(nodes.size());
  for (const auto &node : nodes) {
    terms.push_back(node.weight() * solve_shifted(node.y));
  }
  return compensated_sum(terms);
}

FieldVector FractionalProblem::evaluate_oracle(double s,
                                               const EigenDecomposition &eig,
                                               Transfer transfer) const {
  if (eig.phi.rows() != sys_->n_dofs()) {
    throw InvalidParameter("eigendecomposition does not match the system");
  }
  if (!(s > 0.0 && s < 1.0)) {
    throw InvalidParameter("fractional power s must lie in (0,1)");
  }
  const Eigen::VectorXd coeff = eig.phi.transpose() * load_;
  Eigen::VectorXd scaled(coeff.size());
  for (Index i = 0; i < coeff.size(); ++i) {
    const double lambda = eig.lambda(i);
    // w_h(y) = sum_i f_i phi_i lambda_i / (e^y + lambda_i)
    const double factor = transfer == Transfer::Sinc
                              ? lambda * scalar_sinc(s, grid_.step(), lambda)
                              : std::pow(lambda, 1.0 - s);
    scaled[i] = coeff[i] * factor;
  }
  return eig.phi * scaled;
}

double interval_series_value(double s, double x, int modes) {
  double sum = 0.0;
  for (int m = modes - (modes % 2 == 0 ? 1 : 0); m >= 1; m -= 2) {
    const double mp = m * std::numbers::pi;
    sum += 4.0 * std::pow(mp, -1.0 - 2.0 * s) * std::sin(mp * x);
  }
  return sum;
}

namespace {

struct GaussRule {
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    rule.nodes.push_back(x);
    rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}

} // namespace

double interval_series_l2_error(const AssembledSystem &sys,
                                const FieldVector &uh, double s, int modes,
                                int gauss_points) {
  if (sys.mesh.dim() != 1) {
    throw InvalidParameter("series reference needs an interval mesh");
  }
  const auto values = to_vertex_values(sys, uh);
  const auto rule = gauss_legendre(gauss_points);
  double sum = 0.0;
  for (Index c = 0; c < sys.mesh.n_cells(); ++c) {
    auto cl = sys.mesh.cell(c);
    const double a = sys.mesh.vertex(cl[0])[0], b = sys.mesh.vertex(cl[1])[0];
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double x = a + t * (b - a);
      const double fe = values[cl[0]] + t * (values[cl[1]] - values[cl[0]]);
      const double diff = interval_series_value(s, x, modes) - fe;
      sum += 0.5 * (b - a) * rule.weights[q] * diff * diff;
    }
  }
  return std::sqrt(sum);
}

} // namespace fracrb
