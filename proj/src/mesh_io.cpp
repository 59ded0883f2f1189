#include "fracrb/error.hpp"
#include "fracrb/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fracrb {

namespace {

class LineReader {
public:
  explicit LineReader(const std::string &text) : in_(text) {}

  std::istringstream next(const char *what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        return std::istringstream(line);
      }
    }
    throw ParseError(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
  }

  std::size_t line() const { return line_no_; }

private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

template <typename T>
T read_value(std::istringstream &ls, const LineReader &reader,
             const char *what) {
  T value{};
  if (!(ls >> value)) {
    throw ParseError(reader.line(), std::string("cannot read ") + what);
  }
  return value;
}

void expect_line_end(std::istringstream &ls, const LineReader &reader) {
  std::string extra;
  if (ls >> extra) {
    throw ParseError(reader.line(), "unexpected trailing token '" + extra + "'");
  }
}

} // namespace

Mesh parse_mesh(const std::string &text) {
  LineReader reader(text);
  auto header = reader.next("header");
  const int dim = read_value<int>(header, reader, "dim");
  const auto nv = read_value<Index>(header, reader, "vertex count");
  const auto nc = read_value<Index>(header, reader, "cell count");
  expect_line_end(header, reader);
  if (dim != 1 && dim != 2) {
    throw ParseError(reader.line(), "dim must be 1 or 2");
  }
  if (nv <= 0 || nc <= 0) {
    throw ParseError(reader.line(), "vertex and cell counts must be positive");
  }

  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(nv * dim));
  for (Index v = 0; v < nv; ++v) {
    auto ls = reader.next("vertex line");
    for (int d = 0; d < dim; ++d) {
      coords.push_back(read_value<double>(ls, reader, "vertex coordinate"));
    }
    expect_line_end(ls, reader);
  }

  std::vector<Index> cells;
  cells.reserve(static_cast<std::size_t>(nc * (dim + 1)));
  for (Index c = 0; c < nc; ++c) {
    auto ls = reader.next("cell line");
    for (int d = 0; d <= dim; ++d) {
      const auto v = read_value<Index>(ls, reader, "cell vertex index");
      if (v < 0 || v >= nv) {
        throw ParseError(reader.line(), "cell vertex index " +
                                            std::to_string(v) +
                                            " out of range");
      }
      cells.push_back(v);
    }
    expect_line_end(ls, reader);
  }

  auto ls = reader.next("boundary vertex line");
  std::vector<Index> boundary;
  Index v = 0;
  while (ls >> v) {
    boundary.push_back(v);
  }
  if (!ls.eof()) {
    throw ParseError(reader.line(), "cannot read boundary vertex index");
  }
  return Mesh(dim, std::move(coords), std::move(cells), std::move(boundary));
}

Mesh load_mesh(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open mesh file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mesh(buf.str());
}

std::string format_mesh(const Mesh &mesh) {
  std::string out = std::to_string(mesh.dim()) + " " +
                    std::to_string(mesh.n_vertices()) + " " +
                    std::to_string(mesh.n_cells()) + "\n";
  char buf[32];
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    auto x = mesh.vertex(v);
    for (std::size_t d = 0; d < x.size(); ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", x[d]);
      out += buf;
      out += d + 1 < x.size() ? ' ' : '\n';
    }
  }
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    auto cl = mesh.cell(c);
    for (std::size_t i = 0; i < cl.size(); ++i) {
      out += std::to_string(cl[i]);
      out += i + 1 < cl.size() ? ' ' : '\n';
    }
  }
  const auto &b = mesh.boundary_vertices();
  for (std::size_t i = 0; i < b.size(); ++i) {
    out += std::to_string(b[i]);
    if (i + 1 < b.size()) {
      out += ' ';
    }
  }
  out += '\n';
  return out;
}

void save_mesh(const Mesh &mesh, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FormatError("cannot write mesh file " + path.string());
  }
  out << format_mesh(mesh);
}

} // namespace fracrb
