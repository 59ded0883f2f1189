#include "fracrb/error.hpp"
#include "fracrb/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

using namespace fracrb;

namespace {

bool on_square_boundary(double x, double y) {
  return x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0;
}

bool on_lshape_boundary(double x, double y) {
  return on_square_boundary(x, y) || (y == 0.5 && x <= 0.5) ||
         (x == 0.5 && y >= 0.5);
}

void check_geometric_boundary(const Mesh &mesh, bool (*on_boundary)(double, double)) {
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    const auto p = mesh.vertex(v);
    CHECK(mesh.is_boundary(v) == on_boundary(p[0], p[1]));
  }
}

void check_diameters(const Mesh &mesh, double target_h) {
  double lo = 1e300, hi = 0.0;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    lo = std::min(lo, mesh.cell_diameter(c));
    hi = std::max(hi, mesh.cell_diameter(c));
    REQUIRE(mesh.cell_volume(c) > 0.0);
  }
  CHECK(lo >= target_h / 2);
  CHECK(hi <= target_h);
}

std::filesystem::path temp_file(const std::string &name) {
  return std::filesystem::temp_directory_path() / ("fracrb_test_" + name);
}

} // namespace

TEST_CASE("interval mesh sizes") {
  const Mesh fine = build_interval_mesh(std::ldexp(1.0, -12));
  CHECK(fine.n_cells() == 4096);
  CHECK(DofMap::from_mesh(fine).n_dofs == 4095);

  const Mesh two = build_interval_mesh(0.5);
  CHECK(two.n_cells() == 2);
  CHECK(DofMap::from_mesh(two).n_dofs == 1);

  const Mesh m6 = build_interval_mesh(std::ldexp(1.0, -6));
  CHECK(m6.n_cells() == 64);
  CHECK(DofMap::from_mesh(m6).n_dofs == 63);
  CHECK(m6.boundary_vertices() == std::vector<Index>{0, 64});
  CHECK(m6.vertex(0)[0] == 0.0);
  CHECK(m6.vertex(64)[0] == 1.0);
}

TEST_CASE("interval mesh rounds 1/h up") {
  CHECK(build_interval_mesh(0.3).n_cells() == 4);
}

TEST_CASE("mesh generators reject out-of-range sizes") {
  for (double h : {0.0, -0.1, 1.0, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(build_interval_mesh(h), InvalidParameter);
    CHECK_THROWS_AS(build_square_mesh(h), InvalidParameter);
    CHECK_THROWS_AS(build_lshape_mesh(h), InvalidParameter);
  }
}

TEST_CASE("coarsest square mesh has 8 triangles and one interior vertex") {
  const Mesh mesh = build_square_mesh(0.75);
  CHECK(mesh.n_cells() == 8);
  CHECK(DofMap::from_mesh(mesh).n_dofs == 1);
  check_diameters(mesh, 0.75);
  check_geometric_boundary(mesh, on_square_boundary);
}

TEST_CASE("square mesh diameters stay within [h/2, h]") {
  for (double h : {0.5, 0.25, 0.1, 0.05, 0.01}) {
    CAPTURE(h);
    const Mesh mesh = build_square_mesh(h);
    check_diameters(mesh, h);
    CHECK(mesh.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
  }
  check_geometric_boundary(build_square_mesh(0.05), on_square_boundary);
}

TEST_CASE("L-shape mesh lies inside the L and tags the re-entrant corner") {
  const Mesh mesh = build_lshape_mesh(0.25);
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    double cx = 0, cy = 0;
    for (Index v : mesh.cell(c)) {
      cx += mesh.vertex(v)[0] / 3;
      cy += mesh.vertex(v)[1] / 3;
    }
    const bool in_square = cx > 0 && cx < 1 && cy > 0 && cy < 1;
    const bool in_cut = cx < 0.5 && cy > 0.5;
    CHECK(in_square);
    CHECK_FALSE(in_cut);
  }
  CHECK(mesh.total_volume() == doctest::Approx(0.75).epsilon(1e-12));
  bool found_corner = false;
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.vertex(v)[0] == 0.5 && mesh.vertex(v)[1] == 0.5) {
      found_corner = true;
      CHECK(mesh.is_boundary(v));
    }
  }
  CHECK(found_corner);
  check_geometric_boundary(mesh, on_lshape_boundary);
  check_diameters(build_lshape_mesh(0.05), 0.05);
}

TEST_CASE("interior edges are shared by exactly two triangles") {
  for (const Mesh &mesh : {build_square_mesh(0.1), build_lshape_mesh(0.1)}) {
    std::map<std::pair<Index, Index>, int> count;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
      auto cl = mesh.cell(c);
      for (int e = 0; e < 3; ++e) {
        Index a = cl[e], b = cl[(e + 1) % 3];
        count[{std::min(a, b), std::max(a, b)}]++;
      }
    }
    for (const auto &[edge, n] : count) {
      const bool boundary_edge =
          mesh.is_boundary(edge.first) && mesh.is_boundary(edge.second) && n == 1;
      CHECK((n == 2 || boundary_edge));
    }
  }
}

TEST_CASE("dof map is a bijection onto the interior vertices") {
  const Mesh mesh = build_lshape_mesh(0.1);
  const DofMap dofs = DofMap::from_mesh(mesh);
  CHECK(dofs.n_dofs ==
        mesh.n_vertices() - static_cast<Index>(mesh.boundary_vertices().size()));
  std::set<Index> seen;
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    const Index d = dofs.interior_index[v];
    if (mesh.is_boundary(v)) {
      CHECK(d == -1);
    } else {
      REQUIRE(d >= 0);
      REQUIRE(d < dofs.n_dofs);
      CHECK(dofs.vertex_of_dof[d] == v);
      seen.insert(d);
    }
  }
  CHECK(static_cast<Index>(seen.size()) == dofs.n_dofs);
}

TEST_CASE("Poincare constants of the built-in domains") {
  const double pi = std::numbers::pi;
  CHECK(poincare_constant(build_interval_mesh(0.1)) == doctest::Approx(1 / pi));
  CHECK(poincare_constant(build_square_mesh(0.1)) ==
        doctest::Approx(1 / (std::sqrt(2.0) * pi)));
  CHECK(poincare_constant(build_lshape_mesh(0.1)) ==
        doctest::Approx(1 / (std::sqrt(2.0) * pi)));
}

TEST_CASE("mesh validation rejects broken meshes") {
  SUBCASE("index out of range") {
    CHECK_THROWS_AS(Mesh(1, {0.0, 0.5, 1.0}, {0, 1, 1, 3}, {0, 2}), ValidationError);
  }
  SUBCASE("repeated vertex in a cell") {
    CHECK_THROWS_AS(Mesh(1, {0.0, 0.5, 1.0}, {0, 0, 1, 2}, {0, 2}), ValidationError);
  }
  SUBCASE("negative orientation") {
    CHECK_THROWS_AS(Mesh(1, {0.0, 0.5, 1.0}, {1, 0, 1, 2}, {0, 2}), ValidationError);
    CHECK_THROWS_AS(Mesh(2, {0, 0, 1, 0, 0, 1}, {0, 2, 1}, {0, 1, 2}),
                    ValidationError);
  }
  SUBCASE("wrong boundary set") {
    CHECK_THROWS_AS(Mesh(1, {0.0, 0.5, 1.0}, {0, 1, 1, 2}, {0}), ValidationError);
    CHECK_THROWS_AS(Mesh(1, {0.0, 0.5, 1.0}, {0, 1, 1, 2}, {0, 1, 2}),
                    ValidationError);
  }
  SUBCASE("overlapping intervals") {
    CHECK_THROWS_AS(Mesh(1, {0.0, 0.5, 1.0}, {0, 2, 1, 2}, {0, 2}), ValidationError);
  }
  SUBCASE("hanging vertex") {
    // unit square split into a left triangle pair and a right pair with a
    // midpoint (0.5, 0.5) used on one side only
    const std::vector<double> xy{0, 0, 1, 0, 1, 1, 0, 1, 0.5, 0.5};
    CHECK_THROWS_AS(Mesh(2, xy, {0, 1, 2, 0, 2, 4, 0, 4, 3}, {0, 1, 2, 3, 4}),
                    ValidationError);
  }
  SUBCASE("unused vertex") {
    CHECK_THROWS_AS(Mesh(1, {0.0, 0.5, 1.0, 2.0}, {0, 1, 1, 2}, {0, 2}),
                    ValidationError);
  }
}

TEST_CASE("mesh text round trip") {
  SUBCASE("two-cell interval") {
    const Mesh parsed = parse_mesh("1 3 2\n0\n0.5\n1\n0 1\n1 2\n0 2\n");
    CHECK(parsed == build_interval_mesh(0.5));
  }
  SUBCASE("square mesh through a file") {
    const Mesh mesh = build_square_mesh(0.25);
    const auto path = temp_file("square.mesh");
    save_mesh(mesh, path);
    const Mesh loaded = load_mesh(path);
    CHECK(loaded.coords() == mesh.coords());
    CHECK(loaded.cells() == mesh.cells());
    CHECK(loaded == mesh);
    CHECK(format_mesh(loaded) == format_mesh(mesh));
    std::filesystem::remove(path);
  }
  SUBCASE("L-shape keeps its boundary") {
    const Mesh mesh = build_lshape_mesh(0.125);
    CHECK(parse_mesh(format_mesh(mesh)) == mesh);
  }
}

TEST_CASE("mesh parser reports errors with line numbers") {
  SUBCASE("cell index out of range") {
    try {
      parse_mesh("1 3 2\n0\n0.5\n1\n0 1\n1 7\n0 2\n");
      FAIL("expected a parse error");
    } catch (const ParseError &e) {
      CHECK(e.line() == 6);
    }
  }
  SUBCASE("bad number") {
    try {
      parse_mesh("1 3 2\n0\nabc\n1\n0 1\n1 2\n0 2\n");
      FAIL("expected a parse error");
    } catch (const ParseError &e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("truncated file") {
    CHECK_THROWS_AS(parse_mesh("1 3 2\n0\n0.5\n1\n0 1\n"), ParseError);
  }
  SUBCASE("nonconforming content is a validation error") {
    CHECK_THROWS_AS(parse_mesh("1 3 2\n0\n0.5\n1\n0 1\n1 2\n0\n"), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_mesh(temp_file("does_not_exist.mesh")), FormatError);
  }
}
