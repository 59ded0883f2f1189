#pragma once

#include "fracrb/fem.hpp"
#include "fracrb/mesh.hpp"

#include <Eigen/Dense>

#include <memory>
#include <random>

namespace fracrb::testing {

inline std::shared_ptr<const AssembledSystem> interval_system(double h) {
  return std::make_shared<const AssembledSystem>(
      assemble(build_interval_mesh(h), SourceTerm::constant(1.0)));
}

inline std::shared_ptr<const AssembledSystem> square_system(double target_h) {
  return std::make_shared<const AssembledSystem>(
      assemble(build_square_mesh(target_h), SourceTerm::constant(1.0)));
}

inline Eigen::VectorXd random_vector(Index n, std::mt19937_64 &gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) {
    v[i] = dist(gen);
  }
  return v;
}

inline Eigen::MatrixXd dense(const SparseMatrix &m) { return Eigen::MatrixXd(m); }

} // namespace fracrb::testing
