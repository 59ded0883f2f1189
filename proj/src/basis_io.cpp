#include "fracrb/error.hpp"
#include "fracrb/reduced_basis.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

namespace fracrb {

namespace {

constexpr char magic[4] = {'F', 'L', 'R', 'B'};

class Writer {
public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const double *p, Index n) {
    for (Index i = 0; i < n; ++i) {
      f64(p[i]);
    }
  }
  std::string &bytes() { return out_; }

private:
  std::string out_;
};

class Reader {
public:
  Reader(const std::string &bytes, std::size_t begin, std::size_t end)
      : bytes_(bytes), pos_(begin), end_(end) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64s(double *p, Index n) {
    need(static_cast<std::size_t>(n) * 8);
    for (Index i = 0; i < n; ++i) {
      p[i] = f64();
    }
  }
  bool done() const { return pos_ == end_; }

private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) {
      throw FormatError("basis file truncated");
    }
  }

  const std::string &bytes_;
  std::size_t pos_;
  std::size_t end_;
};

std::uint32_t crc32_of(const char *data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef *>(data), chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

// Guards against absurd sizes from a damaged header before allocating.
void check_dims(std::uint64_t n_h, std::uint64_t n, std::size_t payload) {
  const std::uint64_t limit = payload / 8;
  if (n_h > limit || n > limit || (n > 0 && n_h > limit / n)) {
    throw FormatError("basis file dimensions inconsistent with its size");
  }
}

} // namespace

std::string serialize_basis(const ReducedBasis &rb) {
  const Index n = rb.size();
  if (rb.B.rows() != rb.n_h || rb.B.cols() != n || rb.A1r.rows() != n ||
      rb.A1r.cols() != n || rb.Fr.size() != n ||
      rb.estimator.rows() != 2 * n + 1 || rb.estimator.cols() != 2 * n + 1) {
    throw InvalidParameter("reduced basis fields have inconsistent sizes");
  }
  Writer w;
  w.u64(static_cast<std::uint64_t>(rb.n_h));
  w.u64(static_cast<std::uint64_t>(n));
  w.f64s(rb.selected_y.data(), n);
  w.f64s(rb.B.data(), rb.B.size());
  w.f64s(rb.A1r.data(), rb.A1r.size());
  w.f64s(rb.Fr.data(), rb.Fr.size());
  w.f64s(rb.estimator.data(), rb.estimator.size());
  w.u32(static_cast<std::uint32_t>(rb.training.kind));
  w.u64(static_cast<std::uint64_t>(rb.training.count));
  w.u64(rb.training.seed);
  w.f64(rb.training.lower);
  w.f64(rb.training.upper);
  w.f64(rb.k);
  w.u64(static_cast<std::uint64_t>(rb.counts.lower));
  w.u64(static_cast<std::uint64_t>(rb.counts.upper));
  w.f64(rb.s_min);
  w.f64(rb.s_max);
  w.f64(rb.f_norm);
  w.f64(rb.poincare);
  w.f64(rb.gamma);

  const std::string payload = std::move(w.bytes());
  Writer file;
  file.bytes().append(magic, 4);
  file.u32(basis_format_version);
  file.bytes() += payload;
  file.u32(crc32_of(payload.data(), payload.size()));
  return std::move(file.bytes());
}

ReducedBasis deserialize_basis(const std::string &bytes) {
  if (bytes.size() < 12 || bytes.compare(0, 4, magic, 4) != 0) {
    throw FormatError("not a basis file (bad magic)");
  }
  Reader head(bytes, 4, 8);
  const std::uint32_t version = head.u32();
  if (version != basis_format_version) {
    throw FormatError("basis file version " + std::to_string(version) +
                      " unsupported (expected " +
                      std::to_string(basis_format_version) + ")");
  }
  const std::size_t begin = 8, end = bytes.size() - 4;
  Reader tail(bytes, end, bytes.size());
  if (tail.u32() != crc32_of(bytes.data() + begin, end - begin)) {
    throw FormatError("basis file checksum mismatch");
  }

  Reader r(bytes, begin, end);
  ReducedBasis rb;
  const std::uint64_t n_h = r.u64();
  const std::uint64_t n = r.u64();
  check_dims(n_h, n, end - begin);
  rb.n_h = static_cast<Index>(n_h);
  const auto nn = static_cast<Index>(n);
  rb.selected_y.resize(n);
  r.f64s(rb.selected_y.data(), nn);
  rb.B.resize(rb.n_h, nn);
  r.f64s(rb.B.data(), rb.B.size());
  rb.A1r.resize(nn, nn);
  r.f64s(rb.A1r.data(), rb.A1r.size());
  rb.Fr.resize(nn);
  r.f64s(rb.Fr.data(), nn);
  rb.estimator.resize(2 * nn + 1, 2 * nn + 1);
  r.f64s(rb.estimator.data(), rb.estimator.size());
  const std::uint32_t kind = r.u32();
  if (kind > 1) {
    throw FormatError("unknown training-set kind in basis file");
  }
  rb.training.kind = static_cast<TrainingSet::Kind>(kind);
  rb.training.count = static_cast<Index>(r.u64());
  rb.training.seed = r.u64();
  rb.training.lower = r.f64();
  rb.training.upper = r.f64();
  rb.k = r.f64();
  rb.counts.lower = static_cast<std::int64_t>(r.u64());
  rb.counts.upper = static_cast<std::int64_t>(r.u64());
  rb.s_min = r.f64();
  rb.s_max = r.f64();
  rb.f_norm = r.f64();
  rb.poincare = r.f64();
  rb.gamma = r.f64();
  if (!r.done()) {
    throw FormatError("basis file has trailing bytes in its payload");
  }
  return rb;
}

void save_basis(const ReducedBasis &rb, const std::filesystem::path &path) {
  const std::string bytes = serialize_basis(rb);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FormatError("failed writing " + path.string());
  }
}

ReducedBasis load_basis(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open basis file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_basis(buf.str());
}

} // namespace fracrb
