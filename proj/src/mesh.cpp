#include "fracrb/mesh.hpp"

#include "fracrb/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <utility>

namespace fracrb {

namespace {

double signed_volume(int dim, std::span<const double> coords,
                     std::span<const Index> cell) {
  if (dim == 1) {
    return coords[cell[1]] - coords[cell[0]];
  }
  const double *a = &coords[2 * cell[0]];
  const double *b = &coords[2 * cell[1]];
  const double *c = &coords[2 * cell[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

using Edge = std::pair<Index, Index>;

Edge undirected(Index a, Index b) { return a < b ? Edge{a, b} : Edge{b, a}; }

} // namespace

std::vector<Index> topological_boundary(int dim, Index n_vertices,
                                        std::span<const Index> cells) {
  std::vector<char> flag(static_cast<std::size_t>(n_vertices), 0);
  if (dim == 1) {
    std::vector<int> count(static_cast<std::size_t>(n_vertices), 0);
    for (Index v : cells) {
      ++count[v];
    }
    for (Index v = 0; v < n_vertices; ++v) {
      flag[v] = count[v] == 1;
    }
  } else {
    std::map<Edge, int> edges;
    for (std::size_t c = 0; c + 2 < cells.size(); c += 3) {
      for (int e = 0; e < 3; ++e) {
        ++edges[undirected(cells[c + e], cells[c + (e + 1) % 3])];
      }
    }
    for (const auto &[edge, count] : edges) {
      if (count == 1) {
        flag[edge.first] = flag[edge.second] = 1;
      }
    }
  }
  std::vector<Index> out;
  for (Index v = 0; v < n_vertices; ++v) {
    if (flag[v]) {
      out.push_back(v);
    }
  }
  return out;
}

Mesh::Mesh(int dim, std::vector<double> coords, std::vector<Index> cells,
           std::vector<Index> boundary_vertices)
    : dim_(dim), coords_(std::move(coords)), cells_(std::move(cells)),
      boundary_(std::move(boundary_vertices)) {
  if (dim_ != 1 && dim_ != 2) {
    throw ValidationError("mesh dimension must be 1 or 2, got " +
                          std::to_string(dim_));
  }
  std::sort(boundary_.begin(), boundary_.end());
  validate();
  on_boundary_.assign(static_cast<std::size_t>(n_vertices()), 0);
  for (Index v : boundary_) {
    on_boundary_[v] = 1;
  }
}

void Mesh::validate() const {
  if (coords_.size() % dim_ != 0) {
    throw ValidationError("coordinate array length is not a multiple of dim");
  }
  if (cells_.size() % (dim_ + 1) != 0) {
    throw ValidationError("cell array length is not a multiple of dim+1");
  }
  const Index nv = n_vertices();
  const Index nc = n_cells();
  if (nc == 0) {
    throw ValidationError("mesh has no cells");
  }

  std::vector<char> used(static_cast<std::size_t>(nv), 0);
  for (Index c = 0; c < nc; ++c) {
    auto cl = cell(c);
    for (std::size_t i = 0; i < cl.size(); ++i) {
      if (cl[i] < 0 || cl[i] >= nv) {
        throw ValidationError("cell " + std::to_string(c) +
                              " references vertex " + std::to_string(cl[i]) +
                              " out of range [0," + std::to_string(nv) + ")");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (cl[i] == cl[j]) {
          throw ValidationError("cell " + std::to_string(c) +
                                " repeats a vertex");
        }
      }
      used[cl[i]] = 1;
    }
    if (!(signed_volume(dim_, coords_, cl) > 0.0)) {
      throw ValidationError("cell " + std::to_string(c) +
                            " has non-positive volume");
    }
  }
  for (Index v = 0; v < nv; ++v) {
    if (!used[v]) {
      throw ValidationError("vertex " + std::to_string(v) +
                            " belongs to no cell");
    }
  }

  // Distinct vertices must have distinct coordinates.
  std::vector<Index> order(static_cast<std::size_t>(nv));
  std::iota(order.begin(), order.end(), Index{0});
  auto less = [&](Index a, Index b) {
    return std::lexicographical_compare(vertex(a).begin(), vertex(a).end(),
                                        vertex(b).begin(), vertex(b).end());
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (std::equal(vertex(order[i]).begin(), vertex(order[i]).end(),
                   vertex(order[i - 1]).begin())) {
      throw ValidationError("duplicate vertex coordinates at vertices " +
                            std::to_string(order[i - 1]) + " and " +
                            std::to_string(order[i]));
    }
  }

  if (dim_ == 1) {
    std::vector<Index> by_left(static_cast<std::size_t>(nc));
    std::iota(by_left.begin(), by_left.end(), Index{0});
    std::sort(by_left.begin(), by_left.end(), [&](Index a, Index b) {
      return coords_[cell(a)[0]] < coords_[cell(b)[0]];
    });
    for (std::size_t i = 1; i < by_left.size(); ++i) {
      const double prev_right = coords_[cell(by_left[i - 1])[1]];
      const double left = coords_[cell(by_left[i])[0]];
      if (left < prev_right) {
        throw ValidationError("nonconforming mesh: overlapping intervals");
      }
    }
  } else {
    std::map<Edge, int> directed;
    for (Index c = 0; c < nc; ++c) {
      auto cl = cell(c);
      for (int e = 0; e < 3; ++e) {
        if (++directed[Edge{cl[e], cl[(e + 1) % 3]}] > 1) {
          throw ValidationError(
              "nonconforming mesh: edge traversed twice in the same direction");
        }
      }
    }
    std::vector<Edge> boundary_edges;
    for (const auto &[edge, count] : directed) {
      if (!directed.contains(Edge{edge.second, edge.first})) {
        boundary_edges.push_back(edge);
      }
    }
    // Hanging nodes show up as a vertex strictly inside a one-cell edge.
    for (const auto &[a, b] : boundary_edges) {
      const double ax = coords_[2 * a], ay = coords_[2 * a + 1];
      const double ex = coords_[2 * b] - ax, ey = coords_[2 * b + 1] - ay;
      const double len2 = ex * ex + ey * ey;
      for (Index v = 0; v < nv; ++v) {
        if (v == a || v == b) {
          continue;
        }
        const double px = coords_[2 * v] - ax, py = coords_[2 * v + 1] - ay;
        const double t = (px * ex + py * ey) / len2;
        const double cross = px * ey - py * ex;
        if (t > 1e-12 && t < 1.0 - 1e-12 &&
            std::abs(cross) <= 1e-12 * len2) {
          throw ValidationError("nonconforming mesh: hanging vertex " +
                                std::to_string(v));
        }
      }
    }
    // Cells around an interior vertex must close up to a full turn.
    const auto topo = topological_boundary(2, nv, cells_);
    std::vector<char> topo_flag(static_cast<std::size_t>(nv), 0);
    for (Index v : topo) {
      topo_flag[v] = 1;
    }
    std::vector<double> angle(static_cast<std::size_t>(nv), 0.0);
    for (Index c = 0; c < nc; ++c) {
      auto cl = cell(c);
      for (int i = 0; i < 3; ++i) {
        const double *p = &coords_[2 * cl[i]];
        const double *q = &coords_[2 * cl[(i + 1) % 3]];
        const double *r = &coords_[2 * cl[(i + 2) % 3]];
        const double ux = q[0] - p[0], uy = q[1] - p[1];
        const double wx = r[0] - p[0], wy = r[1] - p[1];
        angle[cl[i]] += std::atan2(ux * wy - uy * wx, ux * wx + uy * wy);
      }
    }
    for (Index v = 0; v < nv; ++v) {
      if (!topo_flag[v] &&
          std::abs(angle[v] - 2.0 * std::numbers::pi) > 1e-8) {
        throw ValidationError("nonconforming mesh: cells around vertex " +
                              std::to_string(v) + " overlap or leave a gap");
      }
    }
  }

  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    if (boundary_[i] < 0 || boundary_[i] >= nv) {
      throw ValidationError("boundary vertex index out of range");
    }
    if (i > 0 && boundary_[i] == boundary_[i - 1]) {
      throw ValidationError("boundary vertex listed twice");
    }
  }
  if (boundary_ != topological_boundary(dim_, nv, cells_)) {
    throw ValidationError(
        "boundary vertex list does not match the mesh boundary");
  }
}

double Mesh::cell_volume(Index c) const {
  return signed_volume(dim_, coords_, cell(c));
}

double Mesh::cell_diameter(Index c) const {
  auto cl = cell(c);
  double diam = 0.0;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double d2 = 0.0;
      for (int d = 0; d < dim_; ++d) {
        const double diff = vertex(cl[i])[d] - vertex(cl[j])[d];
        d2 += diff * diff;
      }
      diam = std::max(diam, std::sqrt(d2));
    }
  }
  return diam;
}

double Mesh::total_volume() const {
  double vol = 0.0;
  for (Index c = 0; c < n_cells(); ++c) {
    vol += cell_volume(c);
  }
  return vol;
}

std::vector<double> Mesh::extents() const {
  std::vector<double> lo(dim_, INFINITY), hi(dim_, -INFINITY);
  for (Index v = 0; v < n_vertices(); ++v) {
    for (int d = 0; d < dim_; ++d) {
      lo[d] = std::min(lo[d], vertex(v)[d]);
      hi[d] = std::max(hi[d], vertex(v)[d]);
    }
  }
  std::vector<double> ext(dim_);
  for (int d = 0; d < dim_; ++d) {
    ext[d] = hi[d] - lo[d];
  }
  return ext;
}

Mesh build_interval_mesh(double h) {
  if (!(h > 0.0 && h < 1.0)) {
    throw InvalidParameter("interval mesh spacing must lie in (0,1)");
  }
  const auto n = static_cast<Index>(std::ceil(1.0 / h - 1e-10));
  std::vector<double> coords(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i <= n; ++i) {
    coords[i] = static_cast<double>(i) / static_cast<double>(n);
  }
  std::vector<Index> cells;
  cells.reserve(static_cast<std::size_t>(2 * n));
  for (Index i = 0; i < n; ++i) {
    cells.push_back(i);
    cells.push_back(i + 1);
  }
  return Mesh(1, std::move(coords), std::move(cells), {0, n});
}

namespace {

Index cells_per_side(double target_h) {
  if (!(target_h > 0.0 && target_h < 1.0)) {
    throw InvalidParameter("target mesh size must lie in (0,1)");
  }
  // Diameter of each triangle is sqrt(2)/m; m is kept even so that 0.5 is a
  // grid line.
  const double half = std::numbers::sqrt2 / (2.0 * target_h);
  return 2 * static_cast<Index>(std::ceil(half - 1e-10));
}

Mesh union_jack(double target_h, bool cut_lshape) {
  const Index m = cells_per_side(target_h);
  const Index stride = m + 1;
  std::vector<Index> cells;
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      if (cut_lshape && 2 * i + 1 < m && 2 * j + 1 > m) {
        continue;
      }
      const Index v00 = j * stride + i, v10 = v00 + 1;
      const Index v01 = v00 + stride, v11 = v01 + 1;
      if ((i + j) % 2 == 0) {
        cells.insert(cells.end(), {v00, v10, v11, v00, v11, v01});
      } else {
        cells.insert(cells.end(), {v00, v10, v01, v10, v11, v01});
      }
    }
  }
  std::vector<Index> renumber(static_cast<std::size_t>(stride * stride), -1);
  for (Index v : cells) {
    renumber[v] = 0;
  }
  std::vector<double> coords;
  Index next = 0;
  for (Index v = 0; v < stride * stride; ++v) {
    if (renumber[v] == 0) {
      renumber[v] = next++;
      coords.push_back(static_cast<double>(v % stride) / static_cast<double>(m));
      coords.push_back(static_cast<double>(v / stride) / static_cast<double>(m));
    }
  }
  for (Index &v : cells) {
    v = renumber[v];
  }
  auto boundary = topological_boundary(2, next, cells);
  return Mesh(2, std::move(coords), std::move(cells), std::move(boundary));
}

} // namespace

Mesh build_square_mesh(double target_h) { return union_jack(target_h, false); }

Mesh build_lshape_mesh(double target_h) { return union_jack(target_h, true); }

DofMap DofMap::from_mesh(const Mesh &mesh) {
  DofMap map;
  map.interior_index.assign(static_cast<std::size_t>(mesh.n_vertices()), -1);
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    if (!mesh.is_boundary(v)) {
      map.interior_index[v] = map.n_dofs++;
      map.vertex_of_dof.push_back(v);
    }
  }
  return map;
}

double poincare_constant(const Mesh &mesh) {
  double sum = 0.0;
  for (double w : mesh.extents()) {
    sum += 1.0 / (w * w);
  }
  return 1.0 / (std::numbers::pi * std::sqrt(sum));
}

} // namespace fracrb
