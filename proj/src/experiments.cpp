#include "fracrb/experiments.hpp"

#include "fracrb/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>

namespace fracrb {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    throw FormatError("failed writing " + path.string());
  }
}

std::filesystem::path prepare_out(const ExperimentConfig &cfg) {
  std::filesystem::path dir(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw FormatError("cannot create output directory " + dir.string() + ": " +
                      ec.message());
  }
  return dir;
}

nlohmann::ordered_json config_json(const ExperimentConfig &cfg) {
  nlohmann::ordered_json j;
  j["domain"] = cfg.domain;
  j["h"] = cfg.effective_h();
  j["h_list"] = cfg.h_list;
  j["k"] = cfg.k;
  j["s_min"] = cfg.s_min;
  j["s_max"] = cfg.s_max;
  j["s"] = cfg.s;
  j["eps"] = cfg.eps;
  j["n_max"] = cfg.n_max;
  j["theta_count"] = cfg.theta_count;
  j["theta_kind"] = cfg.theta_kind;
  j["seed"] = cfg.seed;
  j["theta_prime"] = cfg.theta_prime;
  j["tol"] = cfg.tol;
  j["alpha_star"] = cfg.alpha_star;
  j["c_fem"] = cfg.c_fem;
  j["c_sinc"] = cfg.c_sinc;
  j["series_modes"] = cfg.series_modes;
  j["fit_lo"] = cfg.fit_lo;
  j["fit_hi"] = cfg.fit_hi;
  j["mode"] = cfg.mode;
  j["out"] = cfg.out;
  j["basis"] = cfg.basis_path().string();
  return j;
}

void write_manifest(const ExperimentConfig &cfg, const std::string &command,
                    nlohmann::ordered_json extra, double seconds) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["library_version"] = library_version;
  j["config"] = config_json(cfg);
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    j[it.key()] = it.value();
  }
  j["wall_time_seconds"] = seconds;
  write_text(std::filesystem::path(cfg.out) / (command + "_manifest.json"),
             j.dump(2) + "\n");
}

const char *reason_name(StopReason r) {
  switch (r) {
  case StopReason::Tolerance:
    return "tolerance";
  case StopReason::MaxSize:
    return "n_max";
  case StopReason::Stagnation:
    return "stagnation";
  }
  return "unknown";
}

std::string s_tag(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", s);
  return buf;
}

SolverOptions solver_options(const ExperimentConfig &cfg) {
  SolverOptions o;
  o.tol = cfg.tol;
  return o;
}

} // namespace

Mesh build_mesh(const ExperimentConfig &cfg) {
  const double h = cfg.effective_h();
  if (cfg.domain == "interval") {
    return build_interval_mesh(h);
  }
  if (cfg.domain == "square") {
    return build_square_mesh(h);
  }
  if (cfg.domain == "lshape") {
    return build_lshape_mesh(h);
  }
  return load_mesh(cfg.domain);
}

std::shared_ptr<const AssembledSystem> build_system(const ExperimentConfig &cfg) {
  return std::make_shared<const AssembledSystem>(
      assemble(build_mesh(cfg), SourceTerm::constant(1.0)));
}

SincGrid universal_grid(const ExperimentConfig &cfg) {
  return SincGrid::universal(cfg.s_min, cfg.s_max, cfg.k);
}

TrainingSet training_set(const ExperimentConfig &cfg, const SincGrid &grid) {
  if (cfg.theta_kind == "random") {
    return TrainingSet::random(grid.lower_end(), grid.upper_end(),
                               cfg.theta_count, cfg.seed);
  }
  return TrainingSet::uniform(grid.lower_end(), grid.upper_end(),
                              cfg.theta_count);
}

GreedyOptions greedy_options(const ExperimentConfig &cfg) {
  GreedyOptions o;
  o.eps = cfg.eps;
  o.n_max = cfg.n_max;
  o.solver = solver_options(cfg);
  return o;
}

LinearFit fit_log_linear(const std::vector<double> &n,
                         const std::vector<double> &e, Index lo, Index hi,
                         double floor) {
  if (n.size() != e.size()) {
    throw InvalidParameter("fit_log_linear: n and e differ in length");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] >= static_cast<double>(lo) && n[i] <= static_cast<double>(hi) &&
        e[i] > floor) {
      xs.push_back(n[i]);
      ys.push_back(std::log(e[i]));
    }
  }
  LinearFit fit;
  fit.points = static_cast<Index>(xs.size());
  if (xs.size() < 3) {
    fit.slope = fit.intercept = fit.r2 = nan;
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

OfflineReport run_offline(const ExperimentConfig &cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const auto dir = prepare_out(cfg);
  const auto sys = build_system(cfg);
  const SincGrid grid = universal_grid(cfg);
  const TrainingSet theta = training_set(cfg, grid);

  OfflineReport report;
  report.greedy = greedy_build(*sys, grid, cfg.s_min, cfg.s_max, theta,
                               greedy_options(cfg));
  report.basis_file = cfg.basis_path();
  save_basis(report.greedy.basis, report.basis_file);
  report.basis_hash = file_hash(report.basis_file);

  std::string csv = cfg.timings ? "n,y,estimator_max,wall_time\n"
                                : "n,y,estimator_max\n";
  for (const auto &step : report.greedy.trace) {
    csv += std::to_string(step.n) + ',' + format_double(step.y) + ',' +
           format_double(step.estimator_max);
    csv += cfg.timings ? ',' + format_double(step.elapsed) + '\n' : "\n";
  }
  write_text(dir / "greedy_trace.csv", csv);
  report.seconds = seconds_since(start);

  const auto &rb = report.greedy.basis;
  nlohmann::ordered_json extra;
  extra["n_h"] = rb.n_h;
  extra["basis_size"] = rb.size();
  extra["stop_reason"] = reason_name(report.greedy.reason);
  extra["grid"] = {{"k", rb.k}, {"M", rb.counts.lower}, {"N", rb.counts.upper}};
  extra["gamma"] = rb.gamma;
  extra["gamma_unsquared"] = rb.gamma_unsquared();
  extra["basis_file"] = report.basis_file.string();
  extra["basis_hash"] = report.basis_hash;
  write_manifest(cfg, "offline", extra, report.seconds);
  std::clog << "offline: N_h=" << rb.n_h << " n=" << rb.size()
            << " stop=" << reason_name(report.greedy.reason)
            << " basis_hash=" << report.basis_hash << '\n';
  return report;
}

std::vector<EvaluateRow> run_evaluate(const ExperimentConfig &cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const auto dir = prepare_out(cfg);
  const auto sys = build_system(cfg);
  const bool want_full = cfg.mode != "rb";
  const bool want_rb = cfg.mode != "full";

  ReducedBasis rb;
  std::string hash;
  SincGrid grid = universal_grid(cfg);
  if (want_rb) {
    rb = load_basis(cfg.basis_path());
    hash = file_hash(cfg.basis_path());
    if (rb.n_h != sys->n_dofs()) {
      throw ValidationError("basis has N_h = " + std::to_string(rb.n_h) +
                            " but the mesh has " +
                            std::to_string(sys->n_dofs()) + " interior DOFs");
    }
    if (rb.k != cfg.k) {
      throw ValidationError("basis was built with k = " + format_double(rb.k) +
                            ", config has k = " + format_double(cfg.k));
    }
    grid = rb.grid();
    std::clog << "evaluate: basis_hash=" << hash << " n=" << rb.size() << '\n';
  }
  FractionalProblem prob(sys, grid, solver_options(cfg));

  std::vector<EvaluateRow> rows;
  std::string csv = "s,mode,basis_size,full_solves,rb_sparse_solves,l2_"
                    "distance,h10_distance";
  csv += cfg.timings ? ",wall_time\n" : "\n";
  for (double s : cfg.s) {
    const auto t0 = Clock::now();
    EvaluateRow row{s, cfg.mode, want_rb ? rb.size() : 0, 0, 0, nan, nan};
    FieldVector full, reduced;
    if (want_full) {
      prob.reset_solve_count();
      full = prob.evaluate_full(s);
      row.full_solves = prob.solve_count();
      write_field(dir / ("u_full_s" + s_tag(s) + ".fld"), full);
    }
    if (want_rb) {
      const auto before = sparse_solve_calls();
      reduced = evaluate_rb(rb, s);
      row.rb_sparse_solves = sparse_solve_calls() - before;
      write_field(dir / ("u_rb_s" + s_tag(s) + ".fld"), reduced);
    }
    if (want_full && want_rb) {
      row.l2_distance = l2_norm(full - reduced, *sys);
      row.h10_distance = h10_norm(full - reduced, *sys);
    }
    csv += format_double(s) + ',' + row.mode + ',' +
           std::to_string(row.basis_size) + ',' +
           std::to_string(row.full_solves) + ',' +
           std::to_string(row.rb_sparse_solves) + ',' +
           format_double(row.l2_distance) + ',' +
           format_double(row.h10_distance);
    csv += cfg.timings ? ',' + format_double(seconds_since(t0)) + '\n' : "\n";
    rows.push_back(row);
  }
  write_text(dir / "evaluate.csv", csv);
  nlohmann::ordered_json extra;
  extra["basis_hash"] = hash;
  write_manifest(cfg, "evaluate", extra, seconds_since(start));
  return rows;
}

DecayReport decay_study(std::shared_ptr<const AssembledSystem> sys,
                        const ExperimentConfig &cfg, bool with_e_w) {
  cfg.validate();
  const SincGrid grid = universal_grid(cfg);
  DecayReport report;
  report.f_norm = sys->f_norm;
  report.greedy = greedy_build(*sys, grid, cfg.s_min, cfg.s_max,
                               training_set(cfg, grid), greedy_options(cfg));
  const ReducedBasis &rb = report.greedy.basis;
  const Index size = rb.size();
  for (Index n = 1; n <= size; ++n) {
    report.n.push_back(static_cast<double>(n));
  }
  const double floor = 1e-12 * sys->f_norm;

  if (with_e_w) {
    const auto sample = TrainingSet::uniform(grid.lower_end(), grid.upper_end(),
                                             cfg.theta_prime);
    std::vector<FieldVector> snapshots;
    snapshots.reserve(sample.points.size());
    for (double y : sample.points) {
      snapshots.push_back(
          SpdSolver(*sys, std::exp(y), solver_options(cfg)).solve(sys->F));
    }
    for (Index n = 1; n <= size; ++n) {
      const ReducedBasis sub = rb.truncated(n);
      double worst = 0.0;
      for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const FieldVector approx = lift(sub, rb_solve(sub, sample.points[i]));
        worst = std::max(worst, h10_norm(snapshots[i] - approx, *sys));
      }
      report.e_w.push_back(worst);
    }
    report.e_w_fit =
        fit_log_linear(report.n, report.e_w, cfg.fit_lo, cfg.fit_hi, floor);
  }

  FractionalProblem prob(sys, grid, solver_options(cfg));
  for (double s : cfg.s) {
    const FieldVector full = prob.evaluate_full(s);
    std::vector<double> errors;
    for (Index n = 1; n <= size; ++n) {
      errors.push_back(l2_norm(full - evaluate_rb(rb.truncated(n), s), *sys));
    }
    report.fits[s] =
        fit_log_linear(report.n, errors, cfg.fit_lo, cfg.fit_hi, floor);
    report.e_u[s] = std::move(errors);
  }
  return report;
}

DecayReport run_decay(const ExperimentConfig &cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const auto dir = prepare_out(cfg);
  DecayReport report = decay_study(build_system(cfg), cfg, true);
  const double elapsed = seconds_since(start);

  std::vector<ErrorRecord> records;
  for (std::size_t i = 0; i < report.e_w.size(); ++i) {
    records.push_back(
        {"e_w", "n", report.n[i], nan, "h10", report.e_w[i], elapsed});
  }
  for (const auto &[s, errors] : report.e_u) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
      records.push_back({"e_u", "n", report.n[i], s, "l2", errors[i], elapsed});
    }
  }
  write_text(dir / "decay.csv", format_records(records, cfg.timings));

  std::string fits = "quantity,s,slope,intercept,r2,points\n";
  auto add_fit = [&](const std::string &q, double s, const LinearFit &f) {
    fits += q + ',' + format_double(s) + ',' + format_double(f.slope) + ',' +
            format_double(f.intercept) + ',' + format_double(f.r2) + ',' +
            std::to_string(f.points) + '\n';
  };
  add_fit("e_w", nan, report.e_w_fit);
  for (const auto &[s, f] : report.fits) {
    add_fit("e_u", s, f);
  }
  write_text(dir / "decay_fits.csv", fits);

  nlohmann::ordered_json extra;
  extra["basis_size"] = report.greedy.basis.size();
  extra["stop_reason"] = reason_name(report.greedy.reason);
  write_manifest(cfg, "decay", extra, seconds_since(start));
  return report;
}

std::vector<SlopeRow> run_hsens(const ExperimentConfig &cfg) {
  cfg.validate();
  if (!cfg.is_interval()) {
    throw InvalidParameter("hsens runs on the interval domain only");
  }
  const auto start = Clock::now();
  const auto dir = prepare_out(cfg);
  std::vector<double> hs = cfg.h_list;
  if (hs.empty()) {
    hs = {0x1.0p-6, 0x1.0p-8, 0x1.0p-10};
  }
  for (std::size_t i = 1; i < hs.size(); ++i) {
    if (!(hs[i] < hs[i - 1])) {
      throw InvalidParameter("hsens needs a strictly descending h list");
    }
  }
  std::vector<SlopeRow> rows;
  std::string csv = cfg.timings ? "h,slope,intercept,r2,points,wall_time\n"
                                : "h,slope,intercept,r2,points\n";
  for (double h : hs) {
    const auto t0 = Clock::now();
    ExperimentConfig sub = cfg;
    sub.h = h;
    sub.s = {0.1};
    const auto report = decay_study(build_system(sub), sub, false);
    const LinearFit fit = report.fits.at(0.1);
    rows.push_back({h, fit});
    csv += format_double(h) + ',' + format_double(fit.slope) + ',' +
           format_double(fit.intercept) + ',' + format_double(fit.r2) + ',' +
           std::to_string(fit.points);
    csv += cfg.timings ? ',' + format_double(seconds_since(t0)) + '\n' : "\n";
  }
  write_text(dir / "hsens.csv", csv);
  write_manifest(cfg, "hsens", nlohmann::ordered_json::object(),
                 seconds_since(start));
  return rows;
}

double fem_error(std::shared_ptr<const AssembledSystem> sys, double s,
                 int modes) {
  const EigenDecomposition eig = generalized_eigen(*sys);
  // the grid is unused for exact powers; any valid one will do
  const FractionalProblem prob(sys, SincGrid(1.0, {1, 1}));
  const FieldVector uh = prob.evaluate_oracle(s, eig, Transfer::ExactPower);
  return interval_series_l2_error(*sys, uh, s, modes);
}

std::vector<Decomposition> error_decomposition(const ExperimentConfig &cfg) {
  cfg.validate();
  if (!cfg.is_interval()) {
    throw InvalidParameter("error decomposition needs the interval domain");
  }
  const auto sys = build_system(cfg);
  const EigenDecomposition eig = generalized_eigen(*sys);
  const SincGrid grid = universal_grid(cfg);
  FractionalProblem prob(sys, grid, solver_options(cfg));
  const GreedyResult greedy =
      greedy_build(*sys, grid, cfg.s_min, cfg.s_max, training_set(cfg, grid),
                   greedy_options(cfg));

  std::vector<Decomposition> rows;
  for (double s : cfg.s) {
    Decomposition d;
    d.s = s;
    d.h = cfg.effective_h();
    d.k = cfg.k;
    d.n = greedy.basis.size();
    const FieldVector uh = prob.evaluate_oracle(s, eig, Transfer::ExactPower);
    const FieldVector uhk = prob.evaluate_full(s);
    const FieldVector urb = evaluate_rb(greedy.basis, s);
    d.fem = interval_series_l2_error(*sys, uh, s, cfg.series_modes);
    d.sinc = l2_norm(uh - uhk, *sys);
    d.rb = l2_norm(uhk - urb, *sys);
    rows.push_back(d);
  }
  return rows;
}

std::vector<Decomposition> run_decomposition(const ExperimentConfig &cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const auto dir = prepare_out(cfg);
  std::vector<double> hs = cfg.h_list;
  if (hs.empty()) {
    hs = {cfg.effective_h()};
  }
  std::vector<Decomposition> all;
  for (double h : hs) {
    ExperimentConfig sub = cfg;
    sub.h = h;
    for (const auto &d : error_decomposition(sub)) {
      all.push_back(d);
    }
  }
  std::string csv = "s,h,k,n,fem_l2,sinc_l2,rb_l2\n";
  for (const auto &d : all) {
    csv += format_double(d.s) + ',' + format_double(d.h) + ',' +
           format_double(d.k) + ',' + std::to_string(d.n) + ',' +
           format_double(d.fem) + ',' + format_double(d.sinc) + ',' +
           format_double(d.rb) + '\n';
  }
  write_text(dir / "decomp.csv", csv);
  write_manifest(cfg, "decomp", nlohmann::ordered_json::object(),
                 seconds_since(start));
  return all;
}

Balance balance(double eps, double alpha_star, double c_fem, double c_sinc) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidParameter("balance needs eps in (0,1)");
  }
  if (!(alpha_star > 0.0 && alpha_star <= 1.0)) {
    throw InvalidParameter("balance needs alpha_star in (0,1]");
  }
  if (!(c_fem > 0.0) || !(c_sinc > eps)) {
    throw InvalidParameter("balance needs C_FEM > 0 and C_SINC > eps");
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return {std::pow(eps / c_fem, 1.0 / (2.0 * alpha_star)),
          pi2 / std::log(c_sinc / eps)};
}

} // namespace fracrb
