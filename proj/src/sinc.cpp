#include "fracrb/sinc.hpp"

#include "fracrb/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fracrb {

namespace {

void check_power(double s) {
  if (!(s > 0.0 && s < 1.0)) {
    throw InvalidParameter("fractional power s must lie in (0,1)");
  }
}

void check_step(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw InvalidParameter("sinc step k must be positive and finite");
  }
}

std::int64_t ceil_count(double x) {
  if (!(x < 9.0e15)) {
    throw InvalidParameter("sinc truncation count overflows (k too small)");
  }
  return static_cast<std::int64_t>(std::ceil(x));
}

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

} // namespace

TruncationCounts sinc_params(double s, double k) {
  check_power(s);
  check_step(k);
  return {ceil_count(pi2 / ((1.0 - s) * k * k)),
          ceil_count(pi2 / (s * k * k))};
}

TruncationCounts universal_params(double s_min, double s_max, double k) {
  check_power(s_min);
  check_power(s_max);
  check_step(k);
  if (s_min > s_max) {
    throw InvalidParameter("s_min must not exceed s_max");
  }
  return {ceil_count(pi2 / ((1.0 - s_max) * k * k)),
          ceil_count(pi2 / (s_min * k * k))};
}

SincGrid::SincGrid(double k, TruncationCounts counts)
    : k_(k), counts_(counts) {
  check_step(k);
  if (counts.lower < 1 || counts.upper < 1) {
    throw InvalidParameter("sinc grid needs M, N >= 1");
  }
}

SincGrid SincGrid::universal(double s_min, double s_max, double k) {
  return SincGrid(k, universal_params(s_min, s_max, k));
}

std::vector<double> SincGrid::nodes() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (std::int64_t l = -counts_.lower; l <= counts_.upper; ++l) {
    out.push_back(node(l));
  }
  return out;
}

bool SincGrid::covers(double s) const {
  const auto window = sinc_params(s, k_);
  return window.lower <= counts_.lower && window.upper <= counts_.upper;
}

double WeightedNode::weight() const { return std::exp(log_weight); }

std::vector<WeightedNode> weights(double s, const SincGrid &grid) {
  const auto window = sinc_params(s, grid.step());
  if (!grid.covers(s)) {
    throw InvalidParameter("sinc grid does not cover the window for s = " +
                           std::to_string(s));
  }
  const double log_prefactor =
      std::log(grid.step() * std::sin(s * std::numbers::pi) / std::numbers::pi);
  std::vector<WeightedNode> out;
  out.reserve(static_cast<std::size_t>(window.total()));
  for (std::int64_t l = -window.lower; l <= window.upper; ++l) {
    const double y = grid.node(l);
    out.push_back({l, y, log_prefactor + (1.0 - s) * y});
  }
  return out;
}

double scalar_sinc(double s, double k, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidParameter("lambda must be positive and finite");
  }
  const SincGrid grid(k, sinc_params(s, k));
  const double log_lambda = std::log(lambda);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(grid.size()));
  for (const auto &node : weights(s, grid)) {
    // log(e^y + lambda) without overflow
    const double hi = std::max(node.y, log_lambda);
    const double lse = hi + std::log1p(std::exp(-std::abs(node.y - log_lambda)));
    terms.push_back(std::exp(node.log_weight - lse));
  }
  return compensated_sum(std::move(terms));
}

double compensated_sum(std::vector<double> terms) {
  std::stable_sort(terms.begin(), terms.end(),
                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  double sum = 0.0, comp = 0.0;
  for (double t : terms) {
    const double next = sum + t;
    comp += std::abs(sum) >= std::abs(t) ? (sum - next) + t : (t - next) + sum;
    sum = next;
  }
  return sum + comp;
}

Eigen::VectorXd compensated_sum(const std::vector<Eigen::VectorXd> &terms) {
  if (terms.empty()) {
    return Eigen::VectorXd(0);
  }
  const auto dim = terms.front().size();
  std::vector<std::size_t> order(terms.size());
  std::vector<double> norms(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].size() != dim) {
      throw InvalidParameter("compensated_sum: terms differ in length");
    }
    norms[i] = terms[i].norm();
  }
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return norms[a] < norms[b];
  });
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(dim);
  for (std::size_t idx : order) {
    const auto &t = terms[idx];
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double next = sum[j] + t[j];
      comp[j] += std::abs(sum[j]) >= std::abs(t[j]) ? (sum[j] - next) + t[j]
                                                     : (t[j] - next) + sum[j];
      sum[j] = next;
    }
  }
  return sum + comp;
}

} // namespace fracrb
