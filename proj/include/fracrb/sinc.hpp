#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace fracrb {

/// Truncation indices of the sinc sum: nodes l = -lower .. upper.
struct TruncationCounts {
  std::int64_t lower = 0; ///< M
  std::int64_t upper = 0; ///< N

  std::int64_t total() const noexcept { return lower + upper + 1; }
  friend bool operator==(const TruncationCounts &, const TruncationCounts &) = default;
};

/// Per-power counts M_s = ceil(pi^2/((1-s)k^2)), N_s = ceil(pi^2/(s k^2)).
TruncationCounts sinc_params(double s, double k);

/// Counts covering every s in [s_min, s_max]:
/// M = ceil(pi^2/((1-s_max)k^2)), N = ceil(pi^2/(s_min k^2)).
TruncationCounts universal_params(double s_min, double s_max, double k);

/// Uniform nodes y_l = l k, l = -M..N, in log-shift variables.
class SincGrid {
public:
  SincGrid(double k, TruncationCounts counts);

  static SincGrid universal(double s_min, double s_max, double k);

  double step() const noexcept { return k_; }
  const TruncationCounts &counts() const noexcept { return counts_; }
  std::int64_t size() const noexcept { return counts_.total(); }
  double node(std::int64_t l) const noexcept { return static_cast<double>(l) * k_; }
  double lower_end() const noexcept { return node(-counts_.lower); }
  double upper_end() const noexcept { return node(counts_.upper); }
  std::vector<double> nodes() const;

  /// True when [-M_s, N_s] for this s lies inside the grid.
  bool covers(double s) const;

private:
  double k_;
  TruncationCounts counts_;
};

/// Node of the per-s window together with its quadrature weight
/// (k sin(s pi)/pi) e^{(1-s) y}, kept in log form.
struct WeightedNode {
  std::int64_t l = 0;
  double y = 0.0;
  double log_weight = 0.0;

  double weight() const;
};

/// Weighted nodes for l in [-M_s, N_s]. Grid nodes outside that window get
/// no entry. Throws InvalidParameter if the grid is too small for s.
std::vector<WeightedNode> weights(double s, const SincGrid &grid);

/// Quadrature applied to the scalar resolvent:
/// (k sin(s pi)/pi) sum_l e^{(1-s) y_l} / (e^{y_l} + lambda) ~ lambda^{-s}.
double scalar_sinc(double s, double k, double lambda);

/// Sums terms in ascending magnitude with Neumaier compensation.
double compensated_sum(std::vector<double> terms);

/// Vector version: terms ordered by ascending Euclidean norm (ties by
/// position), compensation applied per component. All terms share a size.
Eigen::VectorXd compensated_sum(const std::vector<Eigen::VectorXd> &terms);

} // namespace fracrb
