#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <vector>

#include "fracorder/mesh.hpp"

namespace fracorder {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using ScalarField = std::function<double(const Point&)>;

// Isotropic operator -div(a grad u) + q u with density rho.
struct Coefficients {
  ScalarField a = [](const Point&) { return 1.0; };
  ScalarField q = [](const Point&) { return 0.0; };
  ScalarField rho = [](const Point&) { return 1.0; };
};

// flux = sum_k weight_k u[node_k]
struct FluxStencil {
  int node = -1;
  Point normal{0.0, 0.0};
  std::vector<std::pair<int, double>> terms;
};

struct FemSystem {
  std::shared_ptr<const Mesh> mesh;
  SpMat mass;       // plain
  SpMat mass_rho;   // rho-weighted
  SpMat stiffness;  // a and q
  std::vector<int> interior_dofs;
  std::vector<int> dirichlet_dofs;
  std::vector<int> interior_index;  // dof -> position in interior_dofs, or -1
  FluxStencil observation;
  double q_min = 0.0;  // smallest q at a quadrature point (may be negative)

  int n_dofs() const { return static_cast<int>(mesh->nodes.size()); }
  int n_interior() const { return static_cast<int>(interior_dofs.size()); }
};

// Every marked boundary node is a Dirichlet DOF. x0 must be an outer-boundary node.
// Throws ConfigError if x0 is not found or a coefficient bound fails (a > 0, rho > 0).
FemSystem assemble(const Mesh& mesh, const Coefficients& coeffs, const Point& x0);

double boundary_flux(const FemSystem& sys, const Vec& u);

Vec interpolate(const Mesh& mesh, const ScalarField& f);

// Solves K u = rhs on interior DOFs with the Dirichlet entries of u held fixed.
class DirichletSolver {
 public:
  DirichletSolver(const FemSystem& sys, const SpMat& K);
  // u: full-length vector whose Dirichlet entries are prescribed; interior entries are overwritten.
  void solve(const Vec& rhs, Vec& u) const;

 private:
  const FemSystem* sys_;
  SpMat k_ib_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

// S y = M_rho f (rho_weighted) or S y = M f, with y = g on Dirichlet DOFs.
// Empty f or g means zero.
struct EllipticData {
  Vec f;
  Vec g;
  bool rho_weighted = true;
};
Vec elliptic_solve(const FemSystem& sys, const EllipticData& data);

// Extract rows/cols of a full matrix for the given index sets.
SpMat submatrix(const SpMat& K, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace fracorder
