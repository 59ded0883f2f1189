#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fracrb {

using Index = std::int64_t;

/// Simplicial mesh of an interval (dim 1) or a polygon (dim 2).
///
/// Vertices are stored flat with stride dim, cells flat with stride dim+1.
/// Cells are positively oriented: x1 > x0 in 1D, counter-clockwise in 2D.
/// Constructing a Mesh runs validate(), so every live Mesh satisfies the
/// invariants listed there.
class Mesh {
public:
  Mesh(int dim, std::vector<double> coords, std::vector<Index> cells,
       std::vector<Index> boundary_vertices);

  int dim() const noexcept { return dim_; }
  Index n_vertices() const noexcept {
    return static_cast<Index>(coords_.size()) / dim_;
  }
  Index n_cells() const noexcept {
    return static_cast<Index>(cells_.size()) / (dim_ + 1);
  }

  std::span<const double> vertex(Index v) const {
    return {coords_.data() + v * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const Index> cell(Index c) const {
    return {cells_.data() + c * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
  }

  const std::vector<double> &coords() const noexcept { return coords_; }
  const std::vector<Index> &cells() const noexcept { return cells_; }
  /// Sorted ascending.
  const std::vector<Index> &boundary_vertices() const noexcept {
    return boundary_;
  }
  bool is_boundary(Index v) const { return on_boundary_[v] != 0; }

  /// Signed length (1D) or area (2D) of a cell.
  double cell_volume(Index c) const;
  /// Longest edge of a cell.
  double cell_diameter(Index c) const;
  double total_volume() const;

  /// Axis-aligned bounding box extents per dimension.
  std::vector<double> extents() const;

  friend bool operator==(const Mesh &a, const Mesh &b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_ &&
           a.cells_ == b.cells_ && a.boundary_ == b.boundary_;
  }

private:
  void validate() const;

  int dim_;
  std::vector<double> coords_;
  std::vector<Index> cells_;
  std::vector<Index> boundary_;
  std::vector<char> on_boundary_;
};

/// Vertices lying on exactly-one-cell facets, sorted.
std::vector<Index> topological_boundary(int dim, Index n_vertices,
                                        std::span<const Index> cells);

/// Uniform partition of (0,1) into ceil(1/h) cells.
Mesh build_interval_mesh(double h);

/// Union-jack triangulation of the unit square. The number of cells per side
/// is even and chosen so every triangle diameter is within
/// [target_h/2, target_h].
Mesh build_square_mesh(double target_h);

/// Same construction on (0,1)^2 minus [0,0.5]x[0.5,1].
Mesh build_lshape_mesh(double target_h);

/// Text format: "dim n_vertices n_cells", vertex lines, cell lines, then one
/// line with the boundary vertex indices.
Mesh load_mesh(const std::filesystem::path &path);
Mesh parse_mesh(const std::string &text);
void save_mesh(const Mesh &mesh, const std::filesystem::path &path);
std::string format_mesh(const Mesh &mesh);

/// Map from vertices to interior degrees of freedom (boundary vertices are
/// eliminated).
struct DofMap {
  std::vector<Index> interior_index; ///< -1 on boundary vertices
  std::vector<Index> vertex_of_dof;
  Index n_dofs = 0;

  static DofMap from_mesh(const Mesh &mesh);
};

/// Upper bound for the Poincare constant from the bounding box:
/// 1 / (pi * sqrt(sum_d 1/width_d^2)). Exact for boxes.
double poincare_constant(const Mesh &mesh);

} // namespace fracrb
