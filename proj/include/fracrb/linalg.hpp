#pragma once

#include "fracrb/fem.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>

namespace fracrb {

enum class SolverMethod { Auto, Direct, ConjugateGradient };

struct SolverOptions {
  SolverMethod method = SolverMethod::Auto;
  /// Relative algebraic residual ||K x - b|| / ||b||.
  double tol = 1e-10;
  /// Auto switches from sparse LDL^T to Jacobi-preconditioned CG above this.
  Index cg_threshold = 50000;
};

/// Solver for the shifted SPD system (A0 + sigma A1) x = b.
///
/// Move-only; the factorization (or the CG setup) is built once in the
/// constructor and reused by every solve().
class SpdSolver {
public:
  SpdSolver(const AssembledSystem &sys, double sigma,
            const SolverOptions &options = {});
  ~SpdSolver();
  SpdSolver(SpdSolver &&) noexcept;
  SpdSolver &operator=(SpdSolver &&) noexcept;

  FieldVector solve(const FieldVector &b) const;

  SolverMethod method() const noexcept { return method_; }
  double sigma() const noexcept { return sigma_; }
  double tolerance() const noexcept { return tol_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SolverMethod method_;
  double sigma_;
  double tol_;
};

/// Process-wide count of SpdSolver::solve calls. Lets callers assert that an
/// online path never reaches the sparse solver.
std::uint64_t sparse_solve_calls() noexcept;

FieldVector solve_spd(const AssembledSystem &sys, double sigma,
                      const FieldVector &b, double tol = 1e-10,
                      SolverMethod method = SolverMethod::Auto);

/// Dense LU with full pivoting; throws SingularMatrix on rank deficiency.
Eigen::VectorXd solve_dense(const Eigen::MatrixXd &m, const Eigen::VectorXd &b);

/// Generalized eigenpairs a1(phi, v) = mu a0(phi, v), a0-orthonormal.
/// mu is sorted descending, so column 0 is the fundamental mode.
struct EigenDecomposition {
  Eigen::VectorXd mu;
  Eigen::MatrixXd phi;

  /// Discrete Laplacian eigenvalue lambda_{h,i} = 1 / mu_i.
  double lambda(Index i) const { return 1.0 / mu[i]; }
  Index size() const noexcept { return mu.size(); }
};

/// Dense oracle; refuses systems larger than max_dofs.
EigenDecomposition generalized_eigen(const AssembledSystem &sys,
                                     Index max_dofs = 5000);

/// Inverse-inequality constant h * sqrt(max_i 1/mu_i). Diagnostic only.
double inverse_inequality_constant(const EigenDecomposition &eig, double h);

} // namespace fracrb
