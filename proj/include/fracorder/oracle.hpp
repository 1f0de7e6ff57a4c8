#pragma once

#include <Eigen/Dense>
#include <string>

#include "fracorder/forward.hpp"

namespace fracorder {

// Generalized eigenpairs S phi = lambda M_rho phi on interior DOFs, full-length and
// M_rho-orthonormal (zero on Dirichlet DOFs).
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // n_dofs x count
  int count() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralBasis spectral_basis(const FemSystem& sys, int count);

// max |Phi^T M_rho Phi - I|
double orthonormality_residual(const FemSystem& sys, const SpectralBasis& b);

// u(t) from the eigen-expansion with Mittag-Leffler factors. Requires g = 0.
// Duhamel integrals use graded Gauss-Legendre pieces toward s = t.
Vec series_solution(const SpectralBasis& basis, const ProblemSpec& spec, double t);

enum class SourceCase { initial_condition, volume_source, boundary_source };
std::string to_string(SourceCase c);

// Leading large-time term of the flux: h(t) ~ coefficient * t^{-exponent}.
// Signs follow the Laplace-transform asymptotics of the discrete problem:
//   u0:  + d_nu A^{-1} u0 / Gamma(1 - alpha),         exponent alpha
//   F:   - d_nu A^{-2} F* / Gamma(-alpha),             exponent 1 + alpha
//   g:   - d_nu A^{-1} G* / Gamma(-alpha),             exponent 1 + alpha
// with F* and g* the time integrals over [0, T] and G* the discrete harmonic
// extension of g*. 1/Gamma uses the pole convention (zero at non-positive integers).
struct AsymptotePrediction {
  double leading_coefficient = 0.0;
  double exponent = 0.0;
  SourceCase source_case = SourceCase::initial_condition;
  double elliptic_flux = 0.0;  // d_nu A^{-1}u0, d_nu A^{-2}F* or d_nu A^{-1}G*
};

AsymptotePrediction asymptote_prediction(const FemSystem& sys, const ProblemSpec& spec);

}  // namespace fracorder
