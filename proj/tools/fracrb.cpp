#include "fracrb/error.hpp"
#include "fracrb/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>

using namespace fracrb;

namespace {

enum Exit { ok = 0, config_error = 2, numerical_error = 3, format_error = 4 };

struct Flags {
  std::string config;
  std::string domain;
  std::vector<double> h;
  std::optional<double> k, s_min, s_max, eps, tol, alpha_star, c_fem, c_sinc;
  std::vector<double> s;
  std::optional<Index> n_max, theta, theta_prime;
  std::optional<std::uint64_t> seed;
  std::string theta_kind, mode, out, basis;
  bool timings = false;
};

void add_common(CLI::App *app, Flags &f) {
  app->add_option("--config", f.config, "key = value config file");
  app->add_option("--domain", f.domain, "interval | square | lshape | mesh file");
  app->add_option("--h", f.h, "mesh size (repeatable for hsens and decomp)");
  app->add_option("--k", f.k, "sinc step");
  app->add_option("--smin", f.s_min, "smallest fractional power");
  app->add_option("--smax", f.s_max, "largest fractional power");
  app->add_option("--s", f.s, "query power (repeatable)");
  app->add_option("--eps", f.eps, "greedy tolerance relative to ||f||");
  app->add_option("--nmax", f.n_max, "maximal basis size");
  app->add_option("--theta", f.theta, "training set size");
  app->add_option("--theta-kind", f.theta_kind, "uniform | random");
  app->add_option("--theta-prime", f.theta_prime, "sample size for e_w");
  app->add_option("--seed", f.seed, "seed of the random training set");
  app->add_option("--tol", f.tol, "relative solver tolerance");
  app->add_option("--mode", f.mode, "full | rb | both");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--basis", f.basis, "basis file (default <out>/basis.flrb)");
  app->add_option("--alpha-star", f.alpha_star, "regularity pick-up alpha*");
  app->add_option("--cfem", f.c_fem, "C_FEM of the balancing rule");
  app->add_option("--csinc", f.c_sinc, "C_SINC of the balancing rule");
  app->add_flag("--timings", f.timings, "add wall-time columns to CSV output");
}

template <class T>
void put(ExperimentConfig &cfg, const char *key, const std::optional<T> &v) {
  if (v) {
    if constexpr (std::is_floating_point_v<T>) {
      cfg.set(key, format_double(*v));
    } else {
      cfg.set(key, std::to_string(*v));
    }
  }
}

std::string join(const std::vector<double> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += (i ? "," : "") + format_double(v[i]);
  }
  return out;
}

/// Config file first, then every flag given on the command line.
ExperimentConfig resolve(const Flags &f, bool h_is_list) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{}
                                          : load_config(f.config);
  if (!f.domain.empty()) {
    cfg.set("domain", f.domain);
  }
  if (!f.h.empty()) {
    if (h_is_list && f.h.size() > 1) {
      cfg.set("h_list", join(f.h));
    } else if (f.h.size() == 1) {
      cfg.set("h", format_double(f.h.front()));
      if (h_is_list) {
        cfg.set("h_list", join(f.h));
      }
    } else {
      throw InvalidParameter("this command takes a single --h");
    }
  }
  put(cfg, "k", f.k);
  put(cfg, "s_min", f.s_min);
  put(cfg, "s_max", f.s_max);
  if (!f.s.empty()) {
    cfg.set("s", join(f.s));
  }
  put(cfg, "eps", f.eps);
  put(cfg, "n_max", f.n_max);
  put(cfg, "theta_count", f.theta);
  put(cfg, "theta_prime", f.theta_prime);
  put(cfg, "seed", f.seed);
  put(cfg, "tol", f.tol);
  put(cfg, "alpha_star", f.alpha_star);
  put(cfg, "c_fem", f.c_fem);
  put(cfg, "c_sinc", f.c_sinc);
  if (!f.theta_kind.empty()) {
    cfg.set("theta_kind", f.theta_kind);
  }
  if (!f.mode.empty()) {
    cfg.set("mode", f.mode);
  }
  if (!f.out.empty()) {
    cfg.set("out", f.out);
  }
  if (!f.basis.empty()) {
    cfg.set("basis", f.basis);
  }
  if (f.timings) {
    cfg.timings = true;
  }
  cfg.validate();
  return cfg;
}

int run(const std::string &command, const Flags &f) {
  if (command == "offline") {
    const auto report = run_offline(resolve(f, false));
    std::cout << "basis " << report.basis_file.string() << " n="
              << report.greedy.basis.size() << " hash=" << report.basis_hash
              << '\n';
  } else if (command == "evaluate") {
    for (const auto &row : run_evaluate(resolve(f, false))) {
      std::cout << "s=" << format_double(row.s) << " mode=" << row.mode
                << " full_solves=" << row.full_solves
                << " rb_sparse_solves=" << row.rb_sparse_solves
                << " l2=" << format_double(row.l2_distance) << '\n';
    }
  } else if (command == "decay") {
    const auto report = run_decay(resolve(f, false));
    for (const auto &[s, fit] : report.fits) {
      std::cout << "s=" << format_double(s) << " slope="
                << format_double(fit.slope) << " r2=" << format_double(fit.r2)
                << '\n';
    }
  } else if (command == "hsens") {
    for (const auto &row : run_hsens(resolve(f, true))) {
      std::cout << "h=" << format_double(row.h) << " slope="
                << format_double(row.fit.slope) << '\n';
    }
  } else if (command == "decomp") {
    for (const auto &d : run_decomposition(resolve(f, true))) {
      std::cout << "s=" << format_double(d.s) << " h=" << format_double(d.h)
                << " fem=" << format_double(d.fem)
                << " sinc=" << format_double(d.sinc)
                << " rb=" << format_double(d.rb) << '\n';
    }
  } else if (command == "balance") {
    ExperimentConfig cfg = resolve(f, false);
    const Balance b = balance(cfg.eps, cfg.alpha_star, cfg.c_fem, cfg.c_sinc);
    std::cout << "h,k\n"
              << format_double(b.h) << ',' << format_double(b.k) << '\n';
  }
  return ok;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Spectral fractional Laplacian solver with a universal reduced basis"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1, 1);
  Flags flags;
  for (const char *name :
       {"offline", "evaluate", "decay", "hsens", "decomp", "balance"}) {
    add_common(app.add_subcommand(name), flags);
  }
  app.get_subcommand("offline")->description("greedy build: basis file and trace CSV");
  app.get_subcommand("evaluate")->description("full and/or reduced evaluation per s");
  app.get_subcommand("decay")->description("e_w(n) and e_u(s)(n) decay study");
  app.get_subcommand("hsens")->description("decay slope of e_u(0.1) per h");
  app.get_subcommand("decomp")->description("FEM / sinc / RB error decomposition");
  app.get_subcommand("balance")->description("h and k that balance FEM and sinc errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), flags);
  } catch (const InvalidParameter &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const SolverFailure &e) {
    std::cerr << "numerical failure: " << e.what() << " (residual "
              << e.residual() << ")\n";
    return numerical_error;
  } catch (const SingularMatrix &e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical_error;
  } catch (const Error &e) {
    std::cerr << "format error: " << e.what() << '\n';
    return format_error;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return numerical_error;
  }
}
