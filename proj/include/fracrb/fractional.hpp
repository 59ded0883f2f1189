#pragma once

#include "fracrb/fem.hpp"
#include "fracrb/linalg.hpp"
#include "fracrb/sinc.hpp"

#include <map>
#include <memory>

namespace fracrb {

/// Shifts e^y are only formed for |y| <= this bound.
inline constexpr double max_abs_shift_exponent = 700.0;

/// Per-eigenvalue factor applied by evaluate_oracle.
enum class Transfer {
  Sinc,       ///< sinc quadrature Q_{k,s}(lambda), reproduces u_{h,k}(s)
  ExactPower, ///< lambda^{-s}, the semi-discrete u_h(s)
};

/// Full-order evaluation of u_{h,k}(s) = (k sin(s pi)/pi) sum_l
/// e^{(1-s) y_l} w_h(y_l), where w_h(y) solves (A0 + e^y A1) w = F.
///
/// The load defaults to sys.F and can be replaced (e.g. by A1 phi_i for
/// single-mode checks). Not thread-safe: solve counting and the optional
/// factorization cache mutate internal state.
class FractionalProblem {
public:
  FractionalProblem(std::shared_ptr<const AssembledSystem> sys, SincGrid grid,
                    SolverOptions solver = {});

  const AssembledSystem &system() const noexcept { return *sys_; }
  const SincGrid &grid() const noexcept { return grid_; }
  const FieldVector &load() const noexcept { return load_; }
  void set_load(FieldVector load);

  /// Keep one factorization per distinct y, so repeated s-queries reuse them.
  void enable_factorization_cache(bool on);

  FieldVector solve_shifted(double y) const;
  FieldVector evaluate_full(double s) const;
  FieldVector evaluate_oracle(double s, const EigenDecomposition &eig,
                              Transfer transfer = Transfer::Sinc) const;

  /// Number of sparse shifted solves performed so far.
  std::size_t solve_count() const noexcept { return solves_; }
  void reset_solve_count() noexcept { solves_ = 0; }

private:
  std::shared_ptr<const AssembledSystem> sys_;
  SincGrid grid_;
  SolverOptions solver_;
  FieldVector load_;
  bool cache_on_ = false;
  mutable std::map<double, SpdSolver> cache_;
  mutable std::size_t solves_ = 0;
};

/// Exact spectral solution on (0,1) with f = 1, truncated to `modes` terms:
/// u(x) = sum_{m odd} 4 (m pi)^{-1-2s} sin(m pi x).
/// Also valid for s = 1, where it sums to x(1-x)/2.
double interval_series_value(double s, double x, int modes);

/// ||u - u_h||_{L2(0,1)} for a P1 field on an interval mesh, by Gauss
/// quadrature on each cell against the truncated series.
double interval_series_l2_error(const AssembledSystem &sys,
                                const FieldVector &uh, double s, int modes,
                                int gauss_points = 6);

} // namespace fracrb
