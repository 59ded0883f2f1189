#pragma once

#include "fracrb/fem.hpp"
#include "fracrb/linalg.hpp"
#include "fracrb/sinc.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace fracrb {

/// Finite training sample Theta of the universal parameter domain.
struct TrainingSet {
  enum class Kind : std::uint32_t { Uniform = 0, Random = 1 };

  Kind kind = Kind::Uniform;
  Index count = 0;
  std::uint64_t seed = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> points; ///< sorted ascending

  /// count equispaced points including both ends.
  static TrainingSet uniform(double lower, double upper, Index count);
  /// count uniformly distributed samples from a seeded 64-bit Mersenne
  /// Twister; seed must be below 2^53 so it survives the basis file.
  static TrainingSet random(double lower, double upper, Index count,
                            std::uint64_t seed);
  /// Regenerates points from the descriptor fields.
  static TrainingSet from_descriptor(Kind kind, double lower, double upper,
                                     Index count, std::uint64_t seed);
};

/// s-independent reduced space V_h^n and everything needed online.
///
/// Columns of B are a0-orthonormal and span the snapshots w_h(y^1..y^n).
/// The residual dual norm is evaluated through `estimator`, an upper
/// triangular factor R with A0^{-1} residual = Q R x for an a0-orthonormal Q
/// over the columns [z_F, b_1, z_1, b_2, z_2, ...] (z_F = A0^{-1} F,
/// z_j = A0^{-1} A1 b_j) and x = [1, -c_1, -e^y c_1, -c_2, -e^y c_2, ...].
/// So the dual norm is ||R x||_2 and no N_h-sized work happens online. The
/// interleaved ordering makes the leading blocks a valid basis of any
/// smaller size.
struct ReducedBasis {
  Index n_h = 0;
  std::vector<double> selected_y;
  Eigen::MatrixXd B;         ///< N_h x n
  Eigen::MatrixXd A1r;       ///< B^T A1 B
  Eigen::VectorXd Fr;        ///< B^T F
  Eigen::MatrixXd estimator; ///< (2n+1) x (2n+1) upper triangular

  TrainingSet training; ///< descriptor only; points are not stored
  double k = 0.0;
  TruncationCounts counts;
  double s_min = 0.0;
  double s_max = 0.0;
  double f_norm = 0.0;
  double poincare = 0.0;
  double gamma = 0.0; ///< (1 + C_P^2 e^{Nk})^{-1}

  Index size() const noexcept { return static_cast<Index>(selected_y.size()); }
  SincGrid grid() const { return SincGrid(k, counts); }
  /// (1 + C_P e^{Nk})^{-1}, the variant with C_P not squared. Reported
  /// alongside gamma for diagnostics.
  double gamma_unsquared() const;
  /// Leading n basis functions (the greedy space after n steps).
  ReducedBasis truncated(Index n) const;
};

/// Empty reduced space (n = 0) for the given system; used as the greedy
/// starting point.
ReducedBasis empty_basis(const AssembledSystem &sys, const SincGrid &grid,
                         double s_min, double s_max);

/// Galerkin coefficients c with (I + e^y A1r) c = Fr.
Eigen::VectorXd rb_solve(const ReducedBasis &rb, double y);

/// B c
FieldVector lift(const ReducedBasis &rb, const Eigen::VectorXd &c);

/// ||F - (A0 + e^y A1) B c||_{V_h'} via the offline factor.
double residual_dual_norm(const ReducedBasis &rb, double y,
                          const Eigen::VectorXd &c);

/// Same quantity computed in the full space: sqrt(rho^T A0^{-1} rho).
double residual_dual_norm_direct(const ReducedBasis &rb,
                                 const AssembledSystem &sys, double y,
                                 const Eigen::VectorXd &c);

/// u^n_{h,k}(s): weighted sum of reduced coefficients, lifted once.
FieldVector evaluate_rb(const ReducedBasis &rb, double s);

struct GreedyOptions {
  double eps = 1e-8;     ///< stop when max estimator <= eps * ||f||
  Index n_max = 60;
  /// Stagnation: max estimator below floor * ||F||_{A0^{-1}}.
  double floor = 1e-12;
  /// Snapshot is dropped when its part orthogonal to the current space is
  /// below drop_tol times its norm.
  double drop_tol = 1e-12;
  SolverOptions solver;
};

enum class StopReason { Tolerance, MaxSize, Stagnation };

struct GreedyStep {
  Index n = 0;              ///< basis size after this step
  double y = 0.0;           ///< parameter added at this step
  double estimator_max = 0; ///< max_Theta residual dual norm with n functions
  double true_error_max = std::numeric_limits<double>::quiet_NaN();
  double elapsed = 0.0; ///< seconds since the build started
};

struct GreedyResult {
  ReducedBasis basis;
  std::vector<GreedyStep> trace;
  StopReason reason = StopReason::MaxSize;

  bool stagnated() const noexcept { return reason == StopReason::Stagnation; }
};

/// Weak greedy: picks argmax of the residual dual norm over theta.
GreedyResult greedy_build(const AssembledSystem &sys, const SincGrid &grid,
                          double s_min, double s_max, const TrainingSet &theta,
                          const GreedyOptions &options);

/// Strong greedy on the true error ||w_h(y) - P w_h(y)||_{H^1_0}; needs a
/// full snapshot per training point, so theta is capped at 500 points.
GreedyResult greedy_build_exact(const AssembledSystem &sys,
                                const SincGrid &grid, double s_min,
                                double s_max, const TrainingSet &theta,
                                const GreedyOptions &options);

/// Binary basis file ("FLRB", version 1, little-endian, trailing CRC-32).
void save_basis(const ReducedBasis &rb, const std::filesystem::path &path);
ReducedBasis load_basis(const std::filesystem::path &path);
std::string serialize_basis(const ReducedBasis &rb);
ReducedBasis deserialize_basis(const std::string &bytes);

inline constexpr std::uint32_t basis_format_version = 1;

} // namespace fracrb
