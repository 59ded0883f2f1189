#include "fracrb/fem.hpp"

#include "fracrb/error.hpp"
#include "fracrb/linalg.hpp"

#include <array>
#include <cmath>

namespace fracrb {

namespace {

using Triplet = Eigen::Triplet<double>;

struct ElementMatrices {
  std::array<std::array<double, 3>, 3> stiffness{};
  std::array<std::array<double, 3>, 3> mass{};
  double volume = 0.0;
};

ElementMatrices element_matrices(const Mesh &mesh, Index c) {
  ElementMatrices em;
  auto cl = mesh.cell(c);
  em.volume = mesh.cell_volume(c);
  if (mesh.dim() == 1) {
    const double len = em.volume;
    em.stiffness[0] = {1.0 / len, -1.0 / len};
    em.stiffness[1] = {-1.0 / len, 1.0 / len};
    em.mass[0] = {len / 3.0, len / 6.0};
    em.mass[1] = {len / 6.0, len / 3.0};
    return em;
  }
  // grad phi_i = (y_{i+1} - y_{i+2}, x_{i+2} - x_{i+1}) / (2|K|)
  std::array<std::array<double, 2>, 3> grad;
  for (int i = 0; i < 3; ++i) {
    auto p = mesh.vertex(cl[(i + 1) % 3]);
    auto q = mesh.vertex(cl[(i + 2) % 3]);
    grad[i] = {(p[1] - q[1]) / (2.0 * em.volume),
               (q[0] - p[0]) / (2.0 * em.volume)};
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      em.stiffness[i][j] =
          em.volume * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
      em.mass[i][j] = em.volume * (i == j ? 2.0 : 1.0) / 12.0;
    }
  }
  return em;
}

SparseMatrix symmetrized(const SparseMatrix &a) {
  SparseMatrix at = a.transpose();
  SparseMatrix out = 0.5 * (a + at);
  out.makeCompressed();
  return out;
}

} // namespace

SourceTerm SourceTerm::interpolate(
    const Mesh &mesh, const std::function<double(std::span<const double>)> &f) {
  std::vector<double> values(static_cast<std::size_t>(mesh.n_vertices()));
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    values[v] = f(mesh.vertex(v));
  }
  return from_nodes(std::move(values));
}

AssembledSystem assemble(const Mesh &mesh, const SourceTerm &f) {
  if (f.kind == SourceTerm::Kind::Nodal &&
      static_cast<Index>(f.nodal.size()) != mesh.n_vertices()) {
    throw InvalidParameter("nodal source needs one value per mesh vertex");
  }
  AssembledSystem sys{mesh, DofMap::from_mesh(mesh), {}, {}, {}, 0.0, 0.0, 0.0};
  const Index n = sys.dofs.n_dofs;
  if (n == 0) {
    throw ValidationError("mesh has no interior degrees of freedom");
  }
  const int nloc = mesh.dim() + 1;

  std::vector<Triplet> k_trip, m_trip;
  k_trip.reserve(static_cast<std::size_t>(mesh.n_cells() * nloc * nloc));
  m_trip.reserve(k_trip.capacity());
  sys.F = FieldVector::Zero(n);
  double f_norm2 = 0.0;

  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const auto em = element_matrices(mesh, c);
    auto cl = mesh.cell(c);
    sys.mesh_size = std::max(sys.mesh_size, mesh.cell_diameter(c));
    for (int i = 0; i < nloc; ++i) {
      const Index gi = sys.dofs.interior_index[cl[i]];
      const double share = em.volume / nloc;
      if (gi >= 0) {
        sys.F[gi] += (f.kind == SourceTerm::Kind::Constant ? f.value
                                                            : f.nodal[cl[i]]) *
                     share;
      }
      for (int j = 0; j < nloc; ++j) {
        if (f.kind == SourceTerm::Kind::Nodal) {
          f_norm2 += f.nodal[cl[i]] * em.mass[i][j] * f.nodal[cl[j]];
        }
        const Index gj = sys.dofs.interior_index[cl[j]];
        if (gi >= 0 && gj >= 0) {
          k_trip.emplace_back(gi, gj, em.stiffness[i][j]);
          m_trip.emplace_back(gi, gj, em.mass[i][j]);
        }
      }
    }
  }
  if (f.kind == SourceTerm::Kind::Constant) {
    f_norm2 = f.value * f.value * mesh.total_volume();
  }
  sys.f_norm = std::sqrt(std::max(f_norm2, 0.0));

  SparseMatrix a0(n, n), a1(n, n);
  a0.setFromTriplets(k_trip.begin(), k_trip.end());
  a1.setFromTriplets(m_trip.begin(), m_trip.end());
  sys.A0 = symmetrized(a0);
  sys.A1 = symmetrized(a1);
  sys.poincare = poincare_constant(mesh);
  return sys;
}

namespace {

void check_length(const FieldVector &v, const AssembledSystem &sys) {
  if (v.size() != sys.n_dofs()) {
    throw InvalidParameter("field length " + std::to_string(v.size()) +
                           " does not match N_h = " +
                           std::to_string(sys.n_dofs()));
  }
}

} // namespace

double l2_norm(const FieldVector &v, const AssembledSystem &sys) {
  check_length(v, sys);
  return std::sqrt(std::max(v.dot(sys.A1 * v), 0.0));
}

double h10_norm(const FieldVector &v, const AssembledSystem &sys) {
  check_length(v, sys);
  return std::sqrt(std::max(v.dot(sys.A0 * v), 0.0));
}

double hr_norm(const FieldVector &v, double r, const EigenDecomposition &eig,
               const AssembledSystem &sys) {
  check_length(v, sys);
  if (!(r >= 0.0 && r <= 1.0)) {
    throw InvalidParameter("interpolation order r must lie in [0,1]");
  }
  if (eig.phi.rows() != sys.n_dofs()) {
    throw InvalidParameter("eigendecomposition does not match the system");
  }
  const FieldVector coeff = eig.phi.transpose() * (sys.A0 * v);
  double sum = 0.0;
  for (Index i = 0; i < coeff.size(); ++i) {
    sum += coeff[i] * coeff[i] * std::pow(eig.mu[i], 1.0 - r);
  }
  return std::sqrt(sum);
}

double energy_form(const AssembledSystem &sys, double y, const FieldVector &v,
                   const FieldVector &w) {
  check_length(v, sys);
  check_length(w, sys);
  return v.dot(sys.A0 * w) + std::exp(y) * v.dot(sys.A1 * w);
}

std::vector<double> to_vertex_values(const AssembledSystem &sys,
                                     const FieldVector &v) {
  check_length(v, sys);
  std::vector<double> out(sys.dofs.interior_index.size(), 0.0);
  for (Index d = 0; d < sys.n_dofs(); ++d) {
    out[sys.dofs.vertex_of_dof[d]] = v[d];
  }
  return out;
}

} // namespace fracrb
