#include "fracrb/error.hpp"
#include "fracrb/experiments.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fracrb {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() ||
      !std::isfinite(v)) {
    throw InvalidParameter("config key '" + key + "': '" + text +
                           "' is not a finite number");
  }
  return v;
}

std::int64_t to_integer(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidParameter("config key '" + key + "': '" + text +
                           "' is not an integer");
  }
  return v;
}

std::vector<double> to_list(const std::string &key, const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(to_double(key, item));
  }
  if (out.empty()) {
    throw InvalidParameter("config key '" + key + "' needs at least one value");
  }
  return out;
}

bool to_bool(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") {
    return true;
  }
  if (t == "false" || t == "0") {
    return false;
  }
  throw InvalidParameter("config key '" + key + "' expects true or false");
}

std::string join(const std::vector<double> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += (i ? "," : "") + format_double(v[i]);
  }
  return out;
}

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ExperimentConfig::set(const std::string &key_in,
                           const std::string &value_in) {
  const std::string key = trim(key_in), value = trim(value_in);
  if (key == "domain") {
    domain = value;
  } else if (key == "h") {
    h = to_double(key, value);
  } else if (key == "h_list") {
    h_list = to_list(key, value);
  } else if (key == "k") {
    k = to_double(key, value);
  } else if (key == "s_min") {
    s_min = to_double(key, value);
  } else if (key == "s_max") {
    s_max = to_double(key, value);
  } else if (key == "s") {
    s = to_list(key, value);
  } else if (key == "eps") {
    eps = to_double(key, value);
  } else if (key == "n_max") {
    n_max = to_integer(key, value);
  } else if (key == "theta_count") {
    theta_count = to_integer(key, value);
  } else if (key == "theta_kind") {
    theta_kind = value;
  } else if (key == "seed") {
    const auto v = to_integer(key, value);
    if (v < 0) {
      throw InvalidParameter("config key 'seed' must be nonnegative");
    }
    seed = static_cast<std::uint64_t>(v);
  } else if (key == "theta_prime") {
    theta_prime = to_integer(key, value);
  } else if (key == "tol") {
    tol = to_double(key, value);
  } else if (key == "alpha_star") {
    alpha_star = to_double(key, value);
  } else if (key == "c_fem") {
    c_fem = to_double(key, value);
  } else if (key == "c_sinc") {
    c_sinc = to_double(key, value);
  } else if (key == "series_modes") {
    series_modes = static_cast<int>(to_integer(key, value));
  } else if (key == "fit_lo") {
    fit_lo = to_integer(key, value);
  } else if (key == "fit_hi") {
    fit_hi = to_integer(key, value);
  } else if (key == "mode") {
    mode = value;
  } else if (key == "out") {
    out = value;
  } else if (key == "basis") {
    basis = value;
  } else if (key == "timings") {
    timings = to_bool(key, value);
  } else {
    throw InvalidParameter("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (domain.empty()) {
    throw InvalidParameter("domain must be interval, square, lshape or a mesh path");
  }
  auto check_h = [&](double v) {
    if (!(v > 0.0 && v < 1.0)) {
      throw InvalidParameter("h must lie in (0,1)");
    }
  };
  if (h != 0.0) {
    check_h(h);
  }
  for (double v : h_list) {
    check_h(v);
  }
  if (!(k > 0.0)) {
    throw InvalidParameter("k must be positive");
  }
  if (!(s_min > 0.0 && s_min <= s_max && s_max < 1.0)) {
    throw InvalidParameter("need 0 < s_min <= s_max < 1");
  }
  for (double v : s) {
    if (!(v >= s_min && v <= s_max)) {
      throw InvalidParameter("query s = " + format_double(v) +
                             " outside [s_min, s_max]");
    }
  }
  if (!(eps > 0.0)) {
    throw InvalidParameter("eps must be positive");
  }
  if (n_max < 1) {
    throw InvalidParameter("n_max must be at least 1");
  }
  if (theta_count < 1 || theta_prime < 1) {
    throw InvalidParameter("training set sizes must be positive");
  }
  if (theta_kind != "uniform" && theta_kind != "random") {
    throw InvalidParameter("theta_kind must be uniform or random");
  }
  if (seed >= (std::uint64_t{1} << 53)) {
    throw InvalidParameter("seed must be below 2^53");
  }
  if (!(tol > 0.0 && tol <= 1e-4)) {
    throw InvalidParameter("tol must lie in (0, 1e-4]");
  }
  if (!(alpha_star > 0.0 && alpha_star <= 1.0)) {
    throw InvalidParameter("alpha_star must lie in (0,1]");
  }
  if (!(c_fem > 0.0 && c_sinc > 0.0)) {
    throw InvalidParameter("c_fem and c_sinc must be positive");
  }
  if (series_modes < 1) {
    throw InvalidParameter("series_modes must be positive");
  }
  if (fit_lo < 1 || fit_hi < fit_lo) {
    throw InvalidParameter("need 1 <= fit_lo <= fit_hi");
  }
  if (mode != "full" && mode != "rb" && mode != "both") {
    throw InvalidParameter("mode must be full, rb or both");
  }
}

bool ExperimentConfig::is_interval() const { return domain == "interval"; }

double ExperimentConfig::effective_h() const {
  if (h != 0.0) {
    return h;
  }
  return is_interval() ? 0x1.0p-8 : 0.05;
}

std::filesystem::path ExperimentConfig::basis_path() const {
  return basis.empty() ? std::filesystem::path(out) / "basis.flrb"
                       : std::filesystem::path(basis);
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream o;
  o << "domain = " << domain << '\n'
    << "h = " << format_double(effective_h()) << '\n';
  if (!h_list.empty()) {
    o << "h_list = " << join(h_list) << '\n';
  }
  o << "k = " << format_double(k) << '\n'
    << "s_min = " << format_double(s_min) << '\n'
    << "s_max = " << format_double(s_max) << '\n'
    << "s = " << join(s) << '\n'
    << "eps = " << format_double(eps) << '\n'
    << "n_max = " << n_max << '\n'
    << "theta_count = " << theta_count << '\n'
    << "theta_kind = " << theta_kind << '\n'
    << "seed = " << seed << '\n'
    << "theta_prime = " << theta_prime << '\n'
    << "tol = " << format_double(tol) << '\n'
    << "alpha_star = " << format_double(alpha_star) << '\n'
    << "c_fem = " << format_double(c_fem) << '\n'
    << "c_sinc = " << format_double(c_sinc) << '\n'
    << "series_modes = " << series_modes << '\n'
    << "fit_lo = " << fit_lo << '\n'
    << "fit_hi = " << fit_hi << '\n'
    << "mode = " << mode << '\n'
    << "out = " << out << '\n';
  if (!basis.empty()) {
    o << "basis = " << basis << '\n';
  }
  o << "timings = " << (timings ? "true" : "false") << '\n';
  return o.str();
}

ExperimentConfig parse_config(const std::string &text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    if (trim(line).empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidParameter("config line " + std::to_string(line_no) +
                             ": expected key = value");
    }
    try {
      cfg.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const InvalidParameter &e) {
      throw InvalidParameter("config line " + std::to_string(line_no) + ": " +
                             e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidParameter("cannot open config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_records(const std::vector<ErrorRecord> &records,
                           bool timings) {
  std::string out = "experiment,param,param_value,s,norm,error";
  out += timings ? ",wall_time\n" : "\n";
  for (const auto &r : records) {
    out += r.experiment + ',' + r.param + ',' + format_double(r.param_value) +
           ',' + format_double(r.s) + ',' + r.norm + ',' +
           format_double(r.error);
    out += timings ? ',' + format_double(r.wall_time) + '\n' : "\n";
  }
  return out;
}

void write_field(const std::filesystem::path &path, const FieldVector &v) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot open " + path.string() + " for writing");
  }
  out << "FLD " << v.size() << '\n';
  for (Index i = 0; i < v.size(); ++i) {
    out << format_double(v[i]) << '\n';
  }
  if (!out) {
    throw FormatError("failed writing " + path.string());
  }
}

FieldVector read_field(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open field file " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("FLD ", 0) != 0) {
    throw ParseError(1, "field file must start with 'FLD N_h'");
  }
  Index n = 0;
  const std::string count = trim(line.substr(4));
  const auto [ptr, ec] =
      std::from_chars(count.data(), count.data() + count.size(), n);
  if (ec != std::errc() || ptr != count.data() + count.size() || n < 0) {
    throw ParseError(1, "bad N_h in field header");
  }
  FieldVector v(n);
  for (Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError(static_cast<std::size_t>(i + 2), "field file truncated");
    }
    const std::string t = trim(line);
    double x = 0.0;
    const auto [p, e] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (e != std::errc() || p != t.data() + t.size() || t.empty()) {
      throw ParseError(static_cast<std::size_t>(i + 2), "bad coefficient '" + t + "'");
    }
    v[i] = x;
  }
  return v;
}

std::string file_hash(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  uLong crc = crc32(0L, Z_NULL, 0);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const auto got = in.gcount();
    if (got > 0) {
      crc = crc32(crc, reinterpret_cast<const Bytef *>(buf),
                  static_cast<uInt>(got));
    }
  }
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08lx", static_cast<unsigned long>(crc));
  return hex;
}

} // namespace fracrb
