#include "fracrb/error.hpp"
#include "fracrb/fractional.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fracrb;
using namespace fracrb::testing;

namespace {

constexpr double pi = std::numbers::pi;

SincGrid default_grid() { return SincGrid::universal(0.1, 0.9, 0.5); }

} // namespace

TEST_CASE("single-mode load gives the scalar resolvent") {
  const auto sys = interval_system(1.0 / 64);
  const EigenDecomposition eig = generalized_eigen(*sys);
  FractionalProblem prob(sys, default_grid());
  for (Index i : {Index{0}, Index{3}, Index{50}}) {
    prob.set_load(sys->A1 * eig.phi.col(i));
    for (double y : {-5.0, 0.0, 3.0, 12.0}) {
      const FieldVector w = prob.solve_shifted(y);
      const double factor = eig.mu[i] / (1 + std::exp(y) * eig.mu[i]);
      const FieldVector expect = factor * eig.phi.col(i);
      CHECK(h10_norm(w - expect, *sys) <= 1e-9 * std::max(factor, 1e-300));
    }
  }
}

TEST_CASE("very negative shift approaches the Poisson solve") {
  const auto sys = interval_system(1.0 / 64);
  FractionalProblem prob(sys, default_grid());
  const FieldVector poisson = solve_spd(*sys, 0.0, sys->F);
  CHECK((prob.solve_shifted(-30.0) - poisson).norm() <= 1e-10 * poisson.norm());
}

TEST_CASE("single-DOF shifted solve with unit load") {
  const auto sys = interval_system(0.5);
  FractionalProblem prob(sys, default_grid());
  CHECK(prob.solve_shifted(0.0)[0] == doctest::Approx(3.0 / 26).epsilon(1e-14));
}

TEST_CASE("shift exponent is clamped") {
  const auto sys = interval_system(0.25);
  FractionalProblem prob(sys, default_grid());
  CHECK_THROWS_AS(prob.solve_shifted(701.0), InvalidParameter);
  CHECK_THROWS_AS(prob.solve_shifted(-701.0), InvalidParameter);
  CHECK_THROWS_AS(prob.solve_shifted(std::nan("")), InvalidParameter);
  CHECK_THROWS_AS(FractionalProblem(sys, SincGrid::universal(0.01, 0.5, 0.1)),
                  InvalidParameter);
  CHECK_THROWS_AS(FractionalProblem(nullptr, default_grid()), InvalidParameter);
  CHECK_THROWS_AS(prob.set_load(Eigen::VectorXd::Ones(2)), InvalidParameter);
}

TEST_CASE("full evaluation on a single mode matches the scalar quadrature") {
  const auto sys = interval_system(1.0 / 64);
  const EigenDecomposition eig = generalized_eigen(*sys);
  FractionalProblem prob(sys, default_grid());
  for (Index i : {Index{0}, Index{10}}) {
    prob.set_load(sys->A1 * eig.phi.col(i));
    for (double s : {0.1, 0.5, 0.9}) {
      const double lambda = eig.lambda(i);
      const FieldVector u = prob.evaluate_full(s);
      const double q = scalar_sinc(s, 0.5, lambda);
      CHECK(h10_norm(u - q * eig.phi.col(i), *sys) <= 1e-9 * q);
      CHECK(std::abs(q - std::pow(lambda, -s)) <= 3e-8);
      CHECK(h10_norm(prob.evaluate_oracle(s, eig) - q * eig.phi.col(i), *sys) <=
            1e-12 * q);
      CHECK(h10_norm(prob.evaluate_oracle(s, eig, Transfer::ExactPower) -
                         std::pow(lambda, -s) * eig.phi.col(i),
                     *sys) <= 1e-12 * std::pow(lambda, -s));
    }
  }
}

TEST_CASE("full evaluation is deterministic and counts its solves") {
  const auto sys = interval_system(1.0 / 128);
  FractionalProblem prob(sys, default_grid());
  const FieldVector a = prob.evaluate_full(0.5);
  CHECK(prob.solve_count() == 159);
  const FieldVector b = prob.evaluate_full(0.5);
  CHECK(a == b);
  prob.reset_solve_count();
  (void)prob.evaluate_full(0.1);
  CHECK(prob.solve_count() == 440);
}

TEST_CASE("factorization cache reproduces uncached results") {
  const auto sys = square_system(0.1);
  FractionalProblem plain(sys, default_grid());
  FractionalProblem cached(sys, default_grid());
  cached.enable_factorization_cache(true);
  for (double s : {0.3, 0.7, 0.3}) {
    CHECK(cached.evaluate_full(s) == plain.evaluate_full(s));
  }
  cached.enable_factorization_cache(false);
  CHECK(cached.evaluate_full(0.5) == plain.evaluate_full(0.5));
}

TEST_CASE("full and eigen-oracle evaluations agree") {
  const auto sys = interval_system(1.0 / 256);
  const EigenDecomposition eig = generalized_eigen(*sys);
  const FractionalProblem prob(sys, default_grid());
  for (double s : {0.1, 0.5, 0.9}) {
    CHECK(h10_norm(prob.evaluate_full(s) - prob.evaluate_oracle(s, eig), *sys) <=
          1e-8);
  }
  CHECK_THROWS_AS(prob.evaluate_oracle(0.0, eig), InvalidParameter);
  const EigenDecomposition other = generalized_eigen(*interval_system(0.25));
  CHECK_THROWS_AS(prob.evaluate_oracle(0.5, other), InvalidParameter);
}

TEST_CASE("series reference sums to the Poisson solution at s = 1") {
  for (double x : {0.1, 0.25, 0.5, 0.9}) {
    CHECK(interval_series_value(1.0, x, 20001) ==
          doctest::Approx(x * (1 - x) / 2).epsilon(1e-8));
  }
}

TEST_CASE("series reference matches its first term for few modes") {
  const double x = 0.3, s = 0.4;
  CHECK(interval_series_value(s, x, 1) ==
        doctest::Approx(4 * std::pow(pi, -1 - 2 * s) * std::sin(pi * x)));
}

TEST_CASE("unit-load solution is close to the exact spectral series") {
  const double h = 1.0 / 256;
  const auto sys = interval_system(h);
  const FractionalProblem prob(sys, default_grid());
  const FieldVector u = prob.evaluate_full(0.5);
  const double err = interval_series_l2_error(*sys, u, 0.5, 2000);
  // constant 1 in front of h^2 ln(1/h)
  CHECK(err <= h * h * std::log(1 / h) + 3e-9);
  CHECK(err > 0.0);
}

TEST_CASE("series error of the exact interpolant decays at second order for smooth data") {
  // f = sin(pi x) has u = pi^{-2s} sin(pi x); the eigen oracle on nodal data
  // gives the discrete solution whose L2 error must shrink by about 4.
  const double s = 0.5;
  double prev = 0.0;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const Mesh mesh = build_interval_mesh(h);
    const auto sys = std::make_shared<const AssembledSystem>(assemble(
        mesh, SourceTerm::interpolate(mesh, [](std::span<const double> p) {
          return std::sin(pi * p[0]);
        })));
    const EigenDecomposition eig = generalized_eigen(*sys);
    const FractionalProblem prob(sys, default_grid());
    const FieldVector uh = prob.evaluate_oracle(s, eig, Transfer::ExactPower);
    const auto values = to_vertex_values(*sys, uh);
    double err2 = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
      const auto cl = mesh.cell(c);
      const double a = mesh.vertex(cl[0])[0], b = mesh.vertex(cl[1])[0];
      for (int q = 0; q < 200; ++q) {
        const double t = (q + 0.5) / 200;
        const double x = a + t * (b - a);
        const double diff = std::pow(pi, -2 * s) * std::sin(pi * x) -
                            (values[cl[0]] + t * (values[cl[1]] - values[cl[0]]));
        err2 += diff * diff * (b - a) / 200;
      }
    }
    const double err = std::sqrt(err2);
    if (prev > 0) {
      CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    }
    prev = err;
  }
}

TEST_CASE("a priori bounds on shifted solutions") {
  std::mt19937_64 gen(21);
  for (const auto &sys : {interval_system(1.0 / 128), square_system(0.1)}) {
    const SincGrid grid = default_grid();
    FractionalProblem prob(sys, grid);
    std::uniform_real_distribution<double> pick(grid.lower_end(), grid.upper_end());
    const double cp = sys->poincare, f = sys->f_norm;
    const double slack = 1e-9;
    for (int t = 0; t < 200; ++t) {
      double y = pick(gen), yb = pick(gen);
      if (t % 4 == 0) {
        yb = y + 0.01 * (pick(gen) / grid.upper_end());
      }
      const FieldVector w = prob.solve_shifted(y);
      const FieldVector wb = prob.solve_shifted(yb);
      const double ratio = std::expm1(y - yb);
      CHECK(h10_norm(w, *sys) <= cp * f + slack);
      CHECK(l2_norm(w, *sys) <= std::exp(-y) * f + slack);
      const double dh = h10_norm(w - wb, *sys);
      const double dl = l2_norm(w - wb, *sys);
      CHECK(dh <= cp * cp * cp * std::abs(std::exp(y) - std::exp(yb)) * f + slack);
      CHECK(dl <= std::exp(-y) * std::abs(ratio) * f + slack);
      CHECK(dh <= 0.5 * std::exp(-y / 2) * std::abs(ratio) * f + slack);
    }
  }
}

TEST_CASE("coercivity and continuity of the shifted form") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> pick(-20, 20);
  for (const auto &sys : {interval_system(1.0 / 64), square_system(0.1)}) {
    const double cp = sys->poincare;
    for (int t = 0; t < 100; ++t) {
      const double y = pick(gen);
      const Eigen::VectorXd v = random_vector(sys->n_dofs(), gen);
      const Eigen::VectorXd w = random_vector(sys->n_dofs(), gen);
      const double hv = h10_norm(v, *sys), hw = h10_norm(w, *sys);
      CHECK(energy_form(*sys, y, v, v) >= hv * hv * (1 - 1e-12));
      CHECK(std::abs(energy_form(*sys, y, v, w)) <=
            (1 + cp * cp * std::exp(y)) * hv * hw * (1 + 1e-12));
    }
  }
}
