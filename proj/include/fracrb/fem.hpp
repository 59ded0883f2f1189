#pragma once

#include "fracrb/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <vector>

namespace fracrb {

using SparseMatrix = Eigen::SparseMatrix<double>;
/// Coefficients of a P1 function, in DofMap order (full) or in reduced
/// coordinates.
using FieldVector = Eigen::VectorXd;

struct EigenDecomposition;

/// Right-hand side f of the reaction-diffusion problems.
struct SourceTerm {
  enum class Kind { Constant, Nodal };

  Kind kind = Kind::Constant;
  double value = 1.0;
  std::vector<double> nodal; ///< one value per mesh vertex (Nodal only)

  static SourceTerm constant(double c) { return {Kind::Constant, c, {}}; }
  static SourceTerm from_nodes(std::vector<double> values) {
    return {Kind::Nodal, 0.0, std::move(values)};
  }
  static SourceTerm interpolate(const Mesh &mesh,
                                const std::function<double(std::span<const double>)> &f);
};

/// P1 operators over the interior degrees of freedom.
///
/// A0 is the stiffness matrix (a0), A1 the mass matrix (a1), F the load
/// vector; all three are restricted to interior vertices, so A0 and A1 are
/// symmetric positive definite.
struct AssembledSystem {
  Mesh mesh;
  DofMap dofs;
  SparseMatrix A0;
  SparseMatrix A1;
  FieldVector F;
  double f_norm = 0.0;    ///< ||f||_{L2(Omega)}
  double poincare = 0.0;  ///< C_P used by estimators and bounds
  double mesh_size = 0.0; ///< largest cell diameter

  Index n_dofs() const noexcept { return dofs.n_dofs; }
};

AssembledSystem assemble(const Mesh &mesh, const SourceTerm &f);

/// sqrt(v^T A1 v)
double l2_norm(const FieldVector &v, const AssembledSystem &sys);
/// sqrt(v^T A0 v)
double h10_norm(const FieldVector &v, const AssembledSystem &sys);

/// Discrete interpolation norm (sum_i c_i^2 mu_i^{1-r})^{1/2}, where the c_i
/// are the coordinates of v in the a0-orthonormal generalized eigenbasis.
/// Equals l2_norm at r = 0 and h10_norm at r = 1.
double hr_norm(const FieldVector &v, double r, const EigenDecomposition &eig,
               const AssembledSystem &sys);

/// a(v, w; y) = v^T (A0 + e^y A1) w
double energy_form(const AssembledSystem &sys, double y, const FieldVector &v,
                   const FieldVector &w);

/// Full-space coefficient vector (boundary vertices set to zero) for output.
std::vector<double> to_vertex_values(const AssembledSystem &sys,
                                     const FieldVector &v);

} // namespace fracrb
