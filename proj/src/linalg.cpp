#include "fracrb/linalg.hpp"

#include "fracrb/error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <atomic>
#include <cmath>

namespace fracrb {

namespace {
std::atomic<std::uint64_t> solve_calls{0};
}

struct SpdSolver::Impl {
  SparseMatrix matrix;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
};

SpdSolver::SpdSolver(const AssembledSystem &sys, double sigma,
                     const SolverOptions &options)
    : impl_(std::make_unique<Impl>()), method_(options.method), sigma_(sigma),
      tol_(options.tol) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter("shift sigma must be finite and nonnegative");
  }
  if (!(options.tol > 0.0 && options.tol <= 1e-4)) {
    throw InvalidParameter("solver tolerance must lie in (0, 1e-4]");
  }
  if (method_ == SolverMethod::Auto) {
    method_ = sys.n_dofs() > options.cg_threshold
                  ? SolverMethod::ConjugateGradient
                  : SolverMethod::Direct;
  }
  impl_->matrix = sys.A0 + sigma * sys.A1;
  if (method_ == SolverMethod::Direct) {
    impl_->ldlt.compute(impl_->matrix);
    if (impl_->ldlt.info() != Eigen::Success) {
      throw SolverFailure("sparse LDL^T factorization failed", INFINITY);
    }
  } else {
    impl_->cg.setTolerance(options.tol);
    impl_->cg.setMaxIterations(10 * sys.n_dofs());
    impl_->cg.compute(impl_->matrix);
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver &&) noexcept = default;
SpdSolver &SpdSolver::operator=(SpdSolver &&) noexcept = default;

std::uint64_t sparse_solve_calls() noexcept {
  return solve_calls.load(std::memory_order_relaxed);
}

FieldVector SpdSolver::solve(const FieldVector &b) const {
  solve_calls.fetch_add(1, std::memory_order_relaxed);
  if (b.size() != impl_->matrix.rows()) {
    throw InvalidParameter("right-hand side length does not match N_h");
  }
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    return FieldVector::Zero(b.size());
  }
  FieldVector x;
  if (method_ == SolverMethod::Direct) {
    x = impl_->ldlt.solve(b);
    FieldVector r = b - impl_->matrix * x;
    if (r.norm() > tol_ * bnorm) {
      x += impl_->ldlt.solve(r);
    }
  } else {
    x = impl_->cg.solve(b);
  }
  const double residual = (b - impl_->matrix * x).norm() / bnorm;
  if (!(residual <= tol_)) {
    throw SolverFailure("shifted solve missed tolerance (sigma=" +
                            std::to_string(sigma_) +
                            ", relative residual=" + std::to_string(residual) +
                            ")",
                        residual);
  }
  return x;
}

FieldVector solve_spd(const AssembledSystem &sys, double sigma,
                      const FieldVector &b, double tol, SolverMethod method) {
  SolverOptions options;
  options.tol = tol;
  options.method = method;
  return SpdSolver(sys, sigma, options).solve(b);
}

Eigen::VectorXd solve_dense(const Eigen::MatrixXd &m,
                            const Eigen::VectorXd &b) {
  if (m.rows() != m.cols() || m.rows() != b.size()) {
    throw InvalidParameter("dense solve needs a square matrix matching b");
  }
  if (m.rows() == 0) {
    return Eigen::VectorXd(0);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    throw SingularMatrix("dense system is singular (rank " +
                         std::to_string(lu.rank()) + " of " +
                         std::to_string(m.rows()) + ")");
  }
  return lu.solve(b);
}

EigenDecomposition generalized_eigen(const AssembledSystem &sys,
                                     Index max_dofs) {
  if (sys.n_dofs() > max_dofs) {
    throw InvalidParameter("dense eigendecomposition refused: N_h = " +
                           std::to_string(sys.n_dofs()) + " exceeds cap " +
                           std::to_string(max_dofs));
  }
  const Eigen::MatrixXd a0 = Eigen::MatrixXd(sys.A0);
  const Eigen::MatrixXd a1 = Eigen::MatrixXd(sys.A1);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      a1, a0, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw SolverFailure("generalized eigensolver did not converge", INFINITY);
  }
  EigenDecomposition eig;
  eig.mu = solver.eigenvalues().reverse();
  eig.phi = solver.eigenvectors().rowwise().reverse();
  return eig;
}

double inverse_inequality_constant(const EigenDecomposition &eig, double h) {
  return h * std::sqrt(1.0 / eig.mu.minCoeff());
}

} // namespace fracrb
