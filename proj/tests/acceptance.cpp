// Runs every acceptance criterion and prints one PASS/FAIL line per item.
// Exit status is nonzero when any criterion fails.

#include "fracrb/error.hpp"
#include "fracrb/experiments.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace fracrb;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::shared_ptr<const AssembledSystem> system_for(const Mesh &mesh) {
  return std::make_shared<const AssembledSystem>(assemble(mesh, SourceTerm::constant(1.0)));
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome sinc_counts() {
  const bool ok = sinc_params(0.1, 0.5).total() == 440 &&
                  sinc_params(0.9, 0.5).total() == 440 &&
                  sinc_params(0.3, 0.5).total() == 190 &&
                  sinc_params(0.7, 0.5).total() == 190 &&
                  sinc_params(0.5, 0.5).total() == 159 &&
                  universal_params(0.1, 0.9, 0.5) == TruncationCounts{395, 395};
  return {ok, "totals 440/190/159/190/440, universal M=N=395"};
}

Outcome scalar_sinc_accuracy() {
  const double bound = 5 * std::exp(-pi * pi / 0.5);
  double worst = 0.0, min_ratio = INFINITY;
  for (int i = 1; i <= 9; ++i) {
    const double s = 0.1 * i;
    for (double lambda : {0.1, 1.0, 10.0, 1e3}) {
      const double exact = std::pow(lambda, -s);
      const double fine = std::abs(scalar_sinc(s, 0.5, lambda) - exact);
      const double coarse = std::abs(scalar_sinc(s, 0.75, lambda) - exact);
      worst = std::max(worst, fine);
      min_ratio = std::min(min_ratio, coarse / fine);
    }
  }
  return {worst <= bound && min_ratio >= 50,
          "max error " + fmt("%.3e", worst) + " (bound " + fmt("%.3e", bound) +
              "), min k-ratio " + fmt("%.1f", min_ratio) + " (need >= 50)"};
}

Outcome oracle_equivalence() {
  const auto sys = system_for(build_interval_mesh(std::ldexp(1.0, -8)));
  const EigenDecomposition eig = generalized_eigen(*sys);
  const FractionalProblem prob(sys, SincGrid::universal(0.1, 0.9, 0.5));
  double worst = 0.0;
  for (double s : {0.1, 0.5, 0.9}) {
    worst = std::max(worst, h10_norm(prob.evaluate_full(s) -
                                         prob.evaluate_oracle(s, eig),
                                     *sys));
  }
  return {worst <= 1e-8, "max h10 distance " + fmt("%.3e", worst)};
}

Outcome apriori_bounds() {
  std::mt19937_64 gen(2024);
  const SincGrid grid = SincGrid::universal(0.1, 0.9, 0.5);
  std::uniform_real_distribution<double> pick(grid.lower_end(), grid.upper_end());
  int violations = 0, checks = 0;
  for (const Mesh &mesh : {build_interval_mesh(std::ldexp(1.0, -8)), build_square_mesh(0.1)}) {
    const auto sys = system_for(mesh);
    const FractionalProblem prob(sys, grid);
    const double cp = sys->poincare, f = sys->f_norm, slack = 1e-9;
    for (int t = 0; t < 200; ++t) {
      const double y = pick(gen), yb = pick(gen);
      const FieldVector w = prob.solve_shifted(y), wb = prob.solve_shifted(yb);
      const double dh = h10_norm(w - wb, *sys), dl = l2_norm(w - wb, *sys);
      const double jump = std::abs(std::expm1(y - yb));
      const bool bounds[] = {
          h10_norm(w, *sys) <= cp * f + slack,
          l2_norm(w, *sys) <= std::exp(-y) * f + slack,
          dh <= cp * cp * cp * std::abs(std::exp(y) - std::exp(yb)) * f + slack,
          dl <= std::exp(-y) * jump * f + slack,
          dh <= 0.5 * std::exp(-y / 2) * jump * f + slack,
      };
      for (bool ok : bounds) {
        ++checks;
        violations += ok ? 0 : 1;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " +
                               std::to_string(checks) + " checks"};
}

Outcome estimator_sandwich() {
  const auto sys = system_for(build_interval_mesh(std::ldexp(1.0, -8)));
  const SincGrid grid = SincGrid::universal(0.1, 0.9, 0.5);
  GreedyOptions opt;
  opt.eps = 1e-13;
  opt.n_max = 10;
  const GreedyResult g = greedy_build(
      *sys, grid, 0.1, 0.9,
      TrainingSet::uniform(grid.lower_end(), grid.upper_end(), 10000), opt);
  if (g.basis.size() < 10) {
    return {false, "basis stopped at n = " + std::to_string(g.basis.size())};
  }
  const FractionalProblem prob(sys, grid);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> pick(grid.lower_end(), grid.upper_end());
  const double cp2 = sys->poincare * sys->poincare;
  int violations = 0;
  for (Index n : {Index{1}, Index{5}, Index{10}}) {
    const ReducedBasis rb = g.basis.truncated(n);
    for (int t = 0; t < 100; ++t) {
      const double y = pick(gen);
      const Eigen::VectorXd c = rb_solve(rb, y);
      const double est = residual_dual_norm(rb, y, c);
      const double err = h10_norm(prob.solve_shifted(y) - lift(rb, c), *sys);
      const bool lower = est / (1 + cp2 * std::exp(y)) <= err * (1 + 1e-8) + 1e-13;
      const bool upper = err <= est * (1 + 1e-8) + 1e-13;
      violations += (lower && upper) ? 0 : 1;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in 300 samples"};
}

ExperimentConfig decay_config() {
  ExperimentConfig cfg;
  cfg.eps = 1e-13;
  cfg.n_max = 45;
  cfg.s.clear();
  for (int i = 1; i <= 9; ++i) {
    cfg.s.push_back(0.1 * i);
  }
  return cfg;
}

Outcome greedy_decay(const DecayReport &rep) {
  bool monotone = true;
  double reached = INFINITY;
  for (std::size_t i = 0; i < rep.e_w.size(); ++i) {
    if (i > 0 && rep.e_w[i] > rep.e_w[i - 1]) {
      monotone = false;
    }
    if (rep.n[i] <= 45) {
      reached = std::min(reached, rep.e_w[i]);
    }
  }
  bool picks_ok = true;
  for (const auto &step : rep.greedy.trace) {
    if (step.n >= 3 && (step.y < 0.0 || step.y > 20.0)) {
      picks_ok = false;
    }
  }
  const bool ok = monotone && reached <= 1e-6 * rep.f_norm &&
                  rep.e_w_fit.r2 >= 0.9 && picks_ok;
  return {ok, std::string("monotone=") + (monotone ? "yes" : "no") +
                  ", min e_w " + fmt("%.3e", reached) + ", fit R2 " +
                  fmt("%.4f", rep.e_w_fit.r2) + ", slope " +
                  fmt("%.3f", rep.e_w_fit.slope) +
                  ", picks n>=3 in [0,20]=" + (picks_ok ? "yes" : "no")};
}

Outcome rb_accuracy(const DecayReport &rep) {
  bool ok = rep.n.size() >= 20;
  std::string detail;
  for (double s : {0.5, 0.7, 0.9}) {
    for (const auto &[key, errs] : rep.e_u) {
      if (std::abs(key - s) < 1e-12 && errs.size() >= 20) {
        ok = ok && errs[19] <= 1e-6 * rep.f_norm;
        detail += "e_u(" + fmt("%.1f", s) + ")(20)=" + fmt("%.2e", errs[19]) + " ";
      }
    }
  }
  double min_r2 = INFINITY;
  for (const auto &[s, fit] : rep.fits) {
    min_r2 = std::min(min_r2, std::isnan(fit.r2) ? -INFINITY : fit.r2);
  }
  ok = ok && min_r2 >= 0.9 && rep.fits.size() == 9;
  return {ok, detail + "min R2 " + fmt("%.4f", min_r2)};
}

Outcome h_sensitivity() {
  ExperimentConfig cfg;
  cfg.eps = 1e-13;
  cfg.n_max = 45;
  cfg.out = (std::filesystem::temp_directory_path() / "fracrb_accept_hsens").string();
  cfg.h_list = {std::ldexp(1.0, -6), std::ldexp(1.0, -8), std::ldexp(1.0, -10)};
  const auto rows = run_hsens(cfg);
  std::filesystem::remove_all(cfg.out);
  bool ok = rows.size() == 3;
  std::string detail = "slopes";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail += " " + fmt("%.3f", rows[i].fit.slope);
    if (i > 0) {
      ok = ok && std::abs(rows[i - 1].fit.slope) > std::abs(rows[i].fit.slope);
    }
  }
  return {ok, detail + " for h = 2^-6, 2^-8, 2^-10"};
}

Outcome fem_rate() {
  std::string detail = "ratios";
  bool ok = true;
  double prev = 0.0;
  for (int p = 5; p <= 8; ++p) {
    const double err =
        fem_error(system_for(build_interval_mesh(std::ldexp(1.0, -p))), 0.5, 2000);
    if (prev > 0) {
      const double ratio = prev / err;
      ok = ok && ratio >= 3.3 && ratio <= 4.8;
      detail += " " + fmt("%.3f", ratio);
    }
    prev = err;
  }
  return {ok, detail + " (need [3.3, 4.8], f = 1)"};
}

// Same measurement for f = sin(pi x), whose solution pi^{-2s} sin(pi x) is
// smooth; shows the second-order rate when the load is regular enough.
Outcome fem_rate_smooth() {
  std::string detail = "ratios";
  bool ok = true;
  double prev = 0.0;
  const double s = 0.5;
  for (int p = 5; p <= 8; ++p) {
    const Mesh mesh = build_interval_mesh(std::ldexp(1.0, -p));
    const auto sys = std::make_shared<const AssembledSystem>(assemble(
        mesh, SourceTerm::interpolate(mesh, [](std::span<const double> x) {
          return std::sin(pi * x[0]);
        })));
    const EigenDecomposition eig = generalized_eigen(*sys);
    const FractionalProblem prob(sys, SincGrid::universal(0.1, 0.9, 0.5));
    const auto u = to_vertex_values(*sys, prob.evaluate_oracle(s, eig, Transfer::ExactPower));
    double err2 = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
      const auto cl = mesh.cell(c);
      const double a = mesh.vertex(cl[0])[0], b = mesh.vertex(cl[1])[0];
      constexpr int q = 64;
      for (int i = 0; i < q; ++i) {
        const double t = (i + 0.5) / q;
        const double d = std::pow(pi, -2 * s) * std::sin(pi * (a + t * (b - a))) -
                         (u[cl[0]] + t * (u[cl[1]] - u[cl[0]]));
        err2 += d * d * (b - a) / q;
      }
    }
    const double err = std::sqrt(err2);
    if (prev > 0) {
      const double ratio = prev / err;
      ok = ok && ratio >= 3.3 && ratio <= 4.8;
      detail += " " + fmt("%.3f", ratio);
    }
    prev = err;
  }
  return {ok, detail + " (f = sin(pi x))"};
}

Outcome two_d_sanity() {
  std::string detail;
  bool ok = true;
  for (const std::string domain : {"square", "lshape"}) {
    ExperimentConfig cfg;
    cfg.domain = domain;
    cfg.eps = 1e-13;
    cfg.n_max = 45;
    cfg.s = {0.1, 0.5, 0.9};
    const DecayReport rep = decay_study(build_system(cfg), cfg, false);
    double min_r2 = INFINITY;
    for (const auto &[s, fit] : rep.fits) {
      min_r2 = std::min(min_r2, std::isnan(fit.r2) ? -INFINITY : fit.r2);
    }
    ok = ok && rep.fits.size() == 3 && min_r2 >= 0.85;
    detail += domain + " min R2 " + fmt("%.4f", min_r2) + " (n=" +
              std::to_string(rep.greedy.basis.size()) + ") ";
  }
  return {ok, detail};
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "fracrb_accept_det";
  std::filesystem::remove_all(root);
  std::string first_trace, first_eval;
  bool ok = true;
  for (int run = 0; run < 2; ++run) {
    ExperimentConfig cfg;
    cfg.s = {0.3, 0.5};
    cfg.out = (root / ("run" + std::to_string(run))).string();
    const OfflineReport off = run_offline(cfg);
    (void)run_evaluate(cfg);
    const auto dir = std::filesystem::path(cfg.out);
    const std::string trace = slurp(dir / "greedy_trace.csv");
    const std::string eval = slurp(dir / "evaluate.csv");
    const auto copy = dir / "resaved.flrb";
    save_basis(load_basis(off.basis_file), copy);
    ok = ok && slurp(copy) == slurp(off.basis_file);
    if (run == 0) {
      first_trace = trace;
      first_eval = eval;
    } else {
      ok = ok && trace == first_trace && eval == first_eval;
    }
  }
  std::filesystem::remove_all(root);
  return {ok, "basis save/load and repeated offline/evaluate CSVs compared bytewise"};
}

} // namespace

int main() {
  int failures = 0;
  auto report = [&](const std::string &name, const std::function<Outcome()> &run,
                    bool counted = true) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception &e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", name.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (counted && !out.pass) {
      ++failures;
    }
  };

  report("criterion 1 sinc truncation counts", sinc_counts);
  report("criterion 2 scalar sinc accuracy", scalar_sinc_accuracy);
  report("criterion 3 oracle equivalence", oracle_equivalence);
  report("criterion 4 a priori bounds", apriori_bounds);
  report("criterion 5 estimator sandwich", estimator_sandwich);

  DecayReport decay;
  bool have_decay = false;
  auto ensure_decay = [&] {
    if (!have_decay) {
      const ExperimentConfig cfg = decay_config();
      decay = decay_study(build_system(cfg), cfg, true);
      have_decay = true;
    }
  };
  report("criterion 6 greedy decay", [&] { ensure_decay(); return greedy_decay(decay); });
  report("criterion 7 reduced basis accuracy", [&] { ensure_decay(); return rb_accuracy(decay); });
  report("criterion 8 h-sensitivity", h_sensitivity);
  report("criterion 9 finite element rate", fem_rate);
  report("supplementary 9 finite element rate, smooth load", fem_rate_smooth, false);
  report("criterion 10 2D decay", two_d_sanity);
  report("criterion 11 determinism and persistence", determinism);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
