#include "fracrb/reduced_basis.hpp"

#include "fracrb/error.hpp"
#include "fracrb/fractional.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace fracrb {

TrainingSet TrainingSet::uniform(double lower, double upper, Index count) {
  return from_descriptor(Kind::Uniform, lower, upper, count, 0);
}

TrainingSet TrainingSet::random(double lower, double upper, Index count,
                                std::uint64_t seed) {
  return from_descriptor(Kind::Random, lower, upper, count, seed);
}

TrainingSet TrainingSet::from_descriptor(Kind kind, double lower, double upper,
                                         Index count, std::uint64_t seed) {
  if (count < 1) {
    throw InvalidParameter("training set needs at least one point");
  }
  if (!(lower <= upper)) {
    throw InvalidParameter("training interval is empty");
  }
  if (seed >= (std::uint64_t{1} << 53)) {
    throw InvalidParameter("training seed must be below 2^53");
  }
  TrainingSet set{kind, count, seed, lower, upper, {}};
  set.points.reserve(static_cast<std::size_t>(count));
  if (kind == Kind::Uniform) {
    if (count == 1) {
      set.points.push_back(0.5 * (lower + upper));
    } else {
      for (Index i = 0; i < count; ++i) {
        set.points.push_back(i == count - 1
                                 ? upper
                                 : lower + (upper - lower) *
                                               static_cast<double>(i) /
                                               static_cast<double>(count - 1));
      }
    }
  } else {
    std::mt19937_64 gen(seed);
    for (Index i = 0; i < count; ++i) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      set.points.push_back(lower + u * (upper - lower));
    }
    std::sort(set.points.begin(), set.points.end());
  }
  return set;
}

double ReducedBasis::gamma_unsquared() const {
  return 1.0 / (1.0 + poincare * std::exp(grid().upper_end()));
}

ReducedBasis ReducedBasis::truncated(Index n) const {
  if (n < 0 || n > size()) {
    throw InvalidParameter("cannot truncate basis of size " +
                           std::to_string(size()) + " to " + std::to_string(n));
  }
  ReducedBasis out = *this;
  out.selected_y.resize(static_cast<std::size_t>(n));
  out.B = B.leftCols(n);
  out.A1r = A1r.topLeftCorner(n, n);
  out.Fr = Fr.head(n);
  out.estimator = estimator.topLeftCorner(2 * n + 1, 2 * n + 1);
  return out;
}

ReducedBasis empty_basis(const AssembledSystem &sys, const SincGrid &grid,
                         double s_min, double s_max) {
  if (!(s_min > 0.0 && s_min <= s_max && s_max < 1.0)) {
    throw InvalidParameter("need 0 < s_min <= s_max < 1");
  }
  if (!grid.covers(s_min) || !grid.covers(s_max)) {
    throw InvalidParameter("grid does not cover [s_min, s_max]");
  }
  ReducedBasis rb;
  rb.n_h = sys.n_dofs();
  rb.B = Eigen::MatrixXd(rb.n_h, 0);
  rb.A1r = Eigen::MatrixXd(0, 0);
  rb.Fr = Eigen::VectorXd(0);
  rb.k = grid.step();
  rb.counts = grid.counts();
  rb.s_min = s_min;
  rb.s_max = s_max;
  rb.f_norm = sys.f_norm;
  rb.poincare = sys.poincare;
  rb.gamma = 1.0 / (1.0 + sys.poincare * sys.poincare *
                              std::exp(grid.upper_end()));
  const FieldVector z_f = SpdSolver(sys, 0.0).solve(sys.F);
  rb.estimator = Eigen::MatrixXd::Constant(1, 1, std::sqrt(std::max(
                                                     z_f.dot(sys.A0 * z_f), 0.0)));
  return rb;
}

Eigen::VectorXd rb_solve(const ReducedBasis &rb, double y) {
  if (!(std::abs(y) <= max_abs_shift_exponent)) {
    throw InvalidParameter("shift exponent y must satisfy |y| <= 700");
  }
  const Index n = rb.size();
  if (n == 0) {
    return Eigen::VectorXd(0);
  }
  Eigen::MatrixXd k = std::exp(y) * rb.A1r;
  k.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("reduced system is not positive definite at y = " +
                         std::to_string(y));
  }
  return llt.solve(rb.Fr);
}

FieldVector lift(const ReducedBasis &rb, const Eigen::VectorXd &c) {
  if (c.size() != rb.size()) {
    throw InvalidParameter("reduced coefficient length does not match n");
  }
  if (c.size() == 0) {
    return FieldVector::Zero(rb.n_h);
  }
  return rb.B * c;
}

namespace {

Eigen::VectorXd estimator_coordinates(double y, const Eigen::VectorXd &c) {
  const double shift = std::exp(y);
  Eigen::VectorXd x(2 * c.size() + 1);
  x[0] = 1.0;
  for (Index j = 0; j < c.size(); ++j) {
    x[2 * j + 1] = -c[j];
    x[2 * j + 2] = -shift * c[j];
  }
  return x;
}

} // namespace

double residual_dual_norm(const ReducedBasis &rb, double y,
                          const Eigen::VectorXd &c) {
  if (c.size() != rb.size()) {
    throw InvalidParameter("reduced coefficient length does not match n");
  }
  const Eigen::VectorXd x = estimator_coordinates(y, c);
  return (rb.estimator.triangularView<Eigen::Upper>() * x).norm();
}

double residual_dual_norm_direct(const ReducedBasis &rb,
                                 const AssembledSystem &sys, double y,
                                 const Eigen::VectorXd &c) {
  if (sys.n_dofs() != rb.n_h) {
    throw InvalidParameter("basis does not match the system");
  }
  const FieldVector u = lift(rb, c);
  const FieldVector rho = sys.F - sys.A0 * u - std::exp(y) * (sys.A1 * u);
  const FieldVector z = SpdSolver(sys, 0.0).solve(rho);
  return std::sqrt(std::max(rho.dot(z), 0.0));
}

FieldVector evaluate_rb(const ReducedBasis &rb, double s) {
  constexpr double slack = 1e-12;
  if (!(s >= rb.s_min - slack && s <= rb.s_max + slack)) {
    throw InvalidParameter("s = " + std::to_string(s) +
                           " outside the basis range [" +
                           std::to_string(rb.s_min) + ", " +
                           std::to_string(rb.s_max) + "]");
  }
  const auto nodes = weights(s, rb.grid());
  std::vector<Eigen::VectorXd> terms;
  terms.reserve(nodes.size());
  for (const auto &node : nodes) {
    terms.push_back(node.weight() * rb_solve(rb, node.y));
  }
  if (rb.size() == 0) {
    return FieldVector::Zero(rb.n_h);
  }
  return lift(rb, compensated_sum(terms));
}

namespace {

/// Offline state: the reduced basis plus the a0-orthonormal vectors Q behind
/// the estimator factor, and the A0 factorization for Riesz representers.
class OfflineBuilder {
public:
  OfflineBuilder(const AssembledSystem &sys, const SincGrid &grid,
                 double s_min, double s_max, const GreedyOptions &options)
      : sys_(sys), options_(options),
        a0_(sys, 0.0, options.solver),
        rb_(empty_basis(sys, grid, s_min, s_max)) {
    if (sys.F.norm() == 0.0) {
      throw InvalidParameter("greedy construction needs a nonzero load");
    }
    q_ = Eigen::MatrixXd(sys.n_dofs(), 0);
    rb_.estimator.resize(0, 0);
    append_estimator_column(a0_.solve(sys.F));
  }

  const ReducedBasis &basis() const { return rb_; }
  ReducedBasis take() { return std::move(rb_); }
  double riesz_load_norm() const { return rb_.estimator(0, 0); }

  FieldVector snapshot(double y) const {
    return SpdSolver(sys_, std::exp(y), options_.solver).solve(sys_.F);
  }

  /// Adds w after a0-orthogonalization; false if w is (numerically) already
  /// in the span.
  bool add_snapshot(double y, const FieldVector &w) {
    const double norm0 = a0_norm(w);
    FieldVector v = w;
    for (int pass = 0; pass < 2; ++pass) {
      v -= rb_.B * (rb_.B.transpose() * (sys_.A0 * v));
    }
    const double norm1 = a0_norm(v);
    if (!(norm1 > options_.drop_tol * norm0)) {
      return false;
    }
    v /= norm1;

    const Index n = rb_.size();
    const FieldVector a1v = sys_.A1 * v;
    rb_.B.conservativeResize(Eigen::NoChange, n + 1);
    rb_.B.col(n) = v;
    rb_.A1r.conservativeResize(n + 1, n + 1);
    const Eigen::VectorXd cross = rb_.B.transpose() * a1v;
    rb_.A1r.row(n) = cross.transpose();
    rb_.A1r.col(n) = cross;
    rb_.Fr.conservativeResize(n + 1);
    rb_.Fr[n] = v.dot(sys_.F);
    rb_.selected_y.push_back(y);

    append_estimator_column(v);
    append_estimator_column(a0_.solve(a1v));
    return true;
  }

  double a0_norm(const FieldVector &v) const {
    return std::sqrt(std::max(v.dot(sys_.A0 * v), 0.0));
  }

private:
  void append_estimator_column(const FieldVector &v) {
    const Index m = q_.cols();
    const double norm0 = a0_norm(v);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
    FieldVector u = v;
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd proj = q_.transpose() * (sys_.A0 * u);
      u -= q_ * proj;
      r += proj;
    }
    double diag = a0_norm(u);
    q_.conservativeResize(Eigen::NoChange, m + 1);
    if (diag > 1e-13 * norm0) {
      q_.col(m) = u / diag;
    } else {
      q_.col(m).setZero();
      diag = 0.0;
    }
    rb_.estimator.conservativeResize(m + 1, m + 1);
    rb_.estimator.row(m).setZero();
    rb_.estimator.col(m).head(m) = r;
    rb_.estimator(m, m) = diag;
  }

  const AssembledSystem &sys_;
  GreedyOptions options_;
  SpdSolver a0_;
  ReducedBasis rb_;
  Eigen::MatrixXd q_;
};

void check_greedy_inputs(const SincGrid &grid, const TrainingSet &theta,
                         const GreedyOptions &options) {
  if (!(options.eps > 0.0)) {
    throw InvalidParameter("greedy tolerance eps must be positive");
  }
  if (options.n_max < 1) {
    throw InvalidParameter("greedy n_max must be at least 1");
  }
  if (theta.points.empty()) {
    throw InvalidParameter("training set is empty");
  }
  const double tol = 1e-9 * std::max(1.0, grid.upper_end() - grid.lower_end());
  for (double y : theta.points) {
    if (y < grid.lower_end() - tol || y > grid.upper_end() + tol) {
      throw InvalidParameter("training point " + std::to_string(y) +
                             " outside the universal domain");
    }
  }
}

struct Sweep {
  double max = -1.0;
  std::size_t argmax = 0;

  void offer(std::size_t i, double value) {
    // strict comparison: smallest y wins ties since theta is ascending
    if (value > max) {
      max = value;
      argmax = i;
    }
  }
};

Sweep estimator_sweep(const ReducedBasis &rb, const TrainingSet &theta) {
  Sweep sweep;
  for (std::size_t i = 0; i < theta.points.size(); ++i) {
    const double y = theta.points[i];
    sweep.offer(i, residual_dual_norm(rb, y, rb_solve(rb, y)));
  }
  return sweep;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

bool already_selected(const ReducedBasis &rb, double y) {
  return std::find(rb.selected_y.begin(), rb.selected_y.end(), y) !=
         rb.selected_y.end();
}

} // namespace

GreedyResult greedy_build(const AssembledSystem &sys, const SincGrid &grid,
                          double s_min, double s_max, const TrainingSet &theta,
                          const GreedyOptions &options) {
  check_greedy_inputs(grid, theta, options);
  const auto start = std::chrono::steady_clock::now();
  OfflineBuilder builder(sys, grid, s_min, s_max, options);
  GreedyResult result;

  double next_y = 0.0;
  if (!builder.add_snapshot(next_y, builder.snapshot(next_y))) {
    throw SolverFailure("initial snapshot w_h(0) vanished", 0.0);
  }
  for (;;) {
    const ReducedBasis &rb = builder.basis();
    const Sweep sweep = estimator_sweep(rb, theta);
    result.trace.push_back({rb.size(), rb.selected_y.back(), sweep.max,
                            std::numeric_limits<double>::quiet_NaN(),
                            seconds_since(start)});
    if (sweep.max <= options.eps * sys.f_norm) {
      result.reason = StopReason::Tolerance;
      break;
    }
    if (rb.size() >= options.n_max) {
      result.reason = StopReason::MaxSize;
      break;
    }
    next_y = theta.points[sweep.argmax];
    if (sweep.max <= options.floor * builder.riesz_load_norm() ||
        already_selected(rb, next_y) ||
        !builder.add_snapshot(next_y, builder.snapshot(next_y))) {
      result.reason = StopReason::Stagnation;
      break;
    }
  }
  result.basis = builder.take();
  result.basis.training = theta;
  result.basis.training.points.clear();
  return result;
}

GreedyResult greedy_build_exact(const AssembledSystem &sys,
                                const SincGrid &grid, double s_min,
                                double s_max, const TrainingSet &theta,
                                const GreedyOptions &options) {
  check_greedy_inputs(grid, theta, options);
  if (theta.points.size() > 500) {
    throw InvalidParameter("exact greedy is limited to 500 training points");
  }
  const auto start = std::chrono::steady_clock::now();
  OfflineBuilder builder(sys, grid, s_min, s_max, options);
  std::vector<FieldVector> snapshots;
  snapshots.reserve(theta.points.size());
  for (double y : theta.points) {
    snapshots.push_back(builder.snapshot(y));
  }

  GreedyResult result;
  if (!builder.add_snapshot(0.0, builder.snapshot(0.0))) {
    throw SolverFailure("initial snapshot w_h(0) vanished", 0.0);
  }
  for (;;) {
    const ReducedBasis &rb = builder.basis();
    Sweep truth, estimate;
    for (std::size_t i = 0; i < theta.points.size(); ++i) {
      const double y = theta.points[i];
      const Eigen::VectorXd c = rb_solve(rb, y);
      truth.offer(i, builder.a0_norm(snapshots[i] - lift(rb, c)));
      estimate.offer(i, residual_dual_norm(rb, y, c));
    }
    result.trace.push_back({rb.size(), rb.selected_y.back(), estimate.max,
                            truth.max, seconds_since(start)});
    if (truth.max <= options.eps * sys.f_norm) {
      result.reason = StopReason::Tolerance;
      break;
    }
    if (rb.size() >= options.n_max) {
      result.reason = StopReason::MaxSize;
      break;
    }
    const double next_y = theta.points[truth.argmax];
    if (truth.max <= options.floor * builder.riesz_load_norm() ||
        already_selected(rb, next_y) ||
        !builder.add_snapshot(next_y, snapshots[truth.argmax])) {
      result.reason = StopReason::Stagnation;
      break;
    }
  }
  result.basis = builder.take();
  result.basis.training = theta;
  result.basis.training.points.clear();
  return result;
}

} // namespace fracrb
