#pragma once

#include "fracrb/fractional.hpp"
#include "fracrb/reduced_basis.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace fracrb {

inline constexpr const char *library_version = "1.0.0";

/// Flat key = value configuration shared by every subcommand. Keys match the
/// field names below; `s` and `h_list` take comma-separated lists.
struct ExperimentConfig {
  std::string domain = "interval"; ///< interval | square | lshape | mesh path
  double h = 0.0;                  ///< spacing (1D) or target diameter (2D); 0 = default
  std::vector<double> h_list;      ///< hsens and decomp sweeps
  double k = 0.5;
  double s_min = 0.1;
  double s_max = 0.9;
  std::vector<double> s{0.5};
  double eps = 1e-8;
  Index n_max = 60;
  Index theta_count = 10000;
  std::string theta_kind = "uniform"; ///< uniform | random
  std::uint64_t seed = 0;
  Index theta_prime = 200; ///< full-solve sample for e_w
  double tol = 1e-10;
  double alpha_star = 1.0;
  double c_fem = 1.0;
  double c_sinc = 1.0;
  int series_modes = 2000;
  Index fit_lo = 3;
  Index fit_hi = 25;
  std::string mode = "both"; ///< full | rb | both
  std::string out = "out";
  std::string basis; ///< empty = <out>/basis.flrb
  bool timings = false;

  /// Assigns one key; throws InvalidParameter on unknown keys or bad values.
  void set(const std::string &key, const std::string &value);
  void validate() const;
  double effective_h() const;
  bool is_interval() const;
  std::filesystem::path basis_path() const;
  std::string to_text() const;
};

ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &path);

Mesh build_mesh(const ExperimentConfig &cfg);
/// Mesh from cfg with f = 1.
std::shared_ptr<const AssembledSystem> build_system(const ExperimentConfig &cfg);
SincGrid universal_grid(const ExperimentConfig &cfg);
TrainingSet training_set(const ExperimentConfig &cfg, const SincGrid &grid);
GreedyOptions greedy_options(const ExperimentConfig &cfg);

/// Least squares for log(e) = intercept + slope * n.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  Index points = 0;
};

/// Fits over lo <= n <= hi, skipping errors at or below `floor` (round-off
/// plateau). Fewer than 3 usable points give r2 = NaN.
LinearFit fit_log_linear(const std::vector<double> &n,
                         const std::vector<double> &e, Index lo, Index hi,
                         double floor);

struct ErrorRecord {
  std::string experiment;
  std::string param;
  double param_value = 0.0;
  double s = 0.0; ///< NaN when the quantity does not depend on s
  std::string norm;
  double error = 0.0;
  double wall_time = 0.0;
};

/// 17 significant digits ("%.17g"), so values round-trip exactly.
std::string format_double(double v);
std::string format_records(const std::vector<ErrorRecord> &records,
                           bool timings);

/// "FLD N_h" then one coefficient per line.
void write_field(const std::filesystem::path &path, const FieldVector &v);
FieldVector read_field(const std::filesystem::path &path);

/// CRC-32 of a file's bytes as 8 hex digits.
std::string file_hash(const std::filesystem::path &path);

struct OfflineReport {
  GreedyResult greedy;
  std::filesystem::path basis_file;
  std::string basis_hash;
  double seconds = 0.0;
};

/// Greedy build; writes basis.flrb, greedy_trace.csv and a manifest.
OfflineReport run_offline(const ExperimentConfig &cfg);

struct EvaluateRow {
  double s = 0.0;
  std::string mode;
  Index basis_size = 0;
  std::uint64_t full_solves = 0;     ///< shifted solves by evaluate_full
  std::uint64_t rb_sparse_solves = 0; ///< sparse solves during evaluate_rb
  double l2_distance = 0.0;          ///< NaN unless mode = both
  double h10_distance = 0.0;
};

/// Loads the basis, evaluates every s in the requested mode, writes field
/// files and evaluate.csv.
std::vector<EvaluateRow> run_evaluate(const ExperimentConfig &cfg);

struct DecayReport {
  GreedyResult greedy;
  std::vector<double> n;                  ///< 1..basis size
  std::vector<double> e_w;                ///< empty if not requested
  std::map<double, std::vector<double>> e_u; ///< l2 distance to evaluate_full
  std::map<double, LinearFit> fits;
  LinearFit e_w_fit;
  double f_norm = 0.0;
};

/// e_w(n) over theta_prime points and e_u(s)(n) for every cfg.s, computed
/// on the nested greedy spaces of one universal basis.
DecayReport decay_study(std::shared_ptr<const AssembledSystem> sys,
                        const ExperimentConfig &cfg, bool with_e_w);
/// decay_study on cfg's mesh; writes decay.csv and decay_fits.csv.
DecayReport run_decay(const ExperimentConfig &cfg);

struct SlopeRow {
  double h = 0.0;
  LinearFit fit;
};

/// Decay slope of e_u(0.1) for each h in cfg.h_list (interval only).
std::vector<SlopeRow> run_hsens(const ExperimentConfig &cfg);

struct Decomposition {
  double s = 0.0;
  double h = 0.0;
  double k = 0.0;
  Index n = 0;
  double fem = 0.0;  ///< ||u - u_h|| against the truncated series
  double sinc = 0.0; ///< ||u_h - u_{h,k}||
  double rb = 0.0;   ///< ||u_{h,k} - u^n_{h,k}||
};

/// FEM component only, with u_h from the eigen oracle (exact powers).
double fem_error(std::shared_ptr<const AssembledSystem> sys, double s,
                 int modes);
/// All three components on the interval for every s in cfg.s.
std::vector<Decomposition> error_decomposition(const ExperimentConfig &cfg);
/// error_decomposition for cfg.h or every entry of cfg.h_list; writes decomp.csv.
std::vector<Decomposition> run_decomposition(const ExperimentConfig &cfg);

struct Balance {
  double h = 0.0;
  double k = 0.0;
};

/// Solves C_FEM h^{2 alpha*} = C_SINC e^{-pi^2/k} = eps.
Balance balance(double eps, double alpha_star, double c_fem = 1.0,
                double c_sinc = 1.0);

} // namespace fracrb
