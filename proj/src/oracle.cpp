#include "fracorder/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fracorder/errors.hpp"
#include "fracorder/quadrature.hpp"
#include "fracorder/special.hpp"

namespace fracorder {

namespace {

constexpr int kDuhamelOrder = 15;
constexpr double kDuhamelRatio = 4.0;
constexpr double kInnerFraction = 1e-12;  // analytic piece [0, d0] near the kernel singularity

bool nonzero(const Vec& v) { return v.size() > 0 && v.cwiseAbs().maxCoeff() > 0.0; }

Vec field_at(const FemSystem& sys, const SpaceTimeField& f, double t) {
  const Mesh& m = *sys.mesh;
  Vec v(sys.n_dofs());
  for (int i = 0; i < sys.n_dofs(); ++i) v[i] = f(m.nodes[i], t);
  return v;
}

// int_0^{T_eff} f(., t) dt, 64 panels of 8-point Gauss-Legendre.
Vec time_integral(const FemSystem& sys, const SpaceTimeField& f, double t_end) {
  Vec acc = Vec::Zero(sys.n_dofs());
  if (!f || !(t_end > 0.0)) return acc;
  const QuadRule q = gauss_legendre(8);
  const int panels = 64;
  const double h = t_end / panels;
  for (int p = 0; p < panels; ++p)
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double t = (p + 0.5 + 0.5 * q.nodes[k]) * h;
      acc += (0.5 * h * q.weights[k]) * field_at(sys, f, t);
    }
  return acc;
}

}  // namespace

SpectralBasis spectral_basis(const FemSystem& sys, int count) {
  const int ni = sys.n_interior();
  if (count < 1 || count > ni)
    throw std::invalid_argument("spectral_basis: count must lie in [1, " + std::to_string(ni) + "]");
  if (ni > 4000) throw std::invalid_argument("spectral_basis: interior dimension too large for a dense eigensolve");
  Eigen::MatrixXd S(submatrix(sys.stiffness, sys.interior_dofs, sys.interior_dofs));
  Eigen::MatrixXd M(submatrix(sys.mass_rho, sys.interior_dofs, sys.interior_dofs));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(S, M);
  if (ges.info() != Eigen::Success) throw NumericError("spectral_basis: eigensolver failed");
  SpectralBasis b;
  b.eigenvalues = ges.eigenvalues().head(count);
  b.eigenvectors = Eigen::MatrixXd::Zero(sys.n_dofs(), count);
  for (int k = 0; k < ni; ++k) b.eigenvectors.row(sys.interior_dofs[k]) = ges.eigenvectors().row(k).head(count);
  return b;
}

double orthonormality_residual(const FemSystem& sys, const SpectralBasis& b) {
  Eigen::MatrixXd G = b.eigenvectors.transpose() * (sys.mass_rho * b.eigenvectors);
  G -= Eigen::MatrixXd::Identity(b.count(), b.count());
  return G.cwiseAbs().maxCoeff();
}

Vec series_solution(const SpectralBasis& basis, const ProblemSpec& spec, double t) {
  if (!spec.sys) throw std::invalid_argument("series_solution: missing FemSystem");
  if (spec.dirichlet && spec.dirichlet->g)
    throw std::invalid_argument("series_solution: requires zero Dirichlet data");
  if (!(t >= 0.0)) throw std::invalid_argument("series_solution: t must be non-negative");
  const FemSystem& sys = *spec.sys;
  const double a = spec.alpha;
  const int nm = basis.count();
  const Eigen::MatrixXd& Phi = basis.eigenvectors;
  Vec coef = Vec::Zero(nm);

  if (nonzero(spec.u0)) {
    Vec u0 = spec.u0;
    for (int k : sys.dirichlet_dofs) u0[k] = 0.0;
    const Vec c0 = Phi.transpose() * (sys.mass_rho * u0);
    for (int n = 0; n < nm; ++n) coef[n] += mlf({a, 1.0}, -basis.eigenvalues[n] * std::pow(t, a)) * c0[n];
  }

  const double s_end = std::min(t, spec.source_cutoff);
  if (spec.source && s_end > 0.0) {
    // d = t - s runs over [dlo, dhi]; graded pieces [d, 4d] resolve the kernel near d = 0.
    const double dlo = t - s_end, dhi = t;
    auto proj = [&](double s) -> Vec { return Phi.transpose() * (sys.mass * field_at(sys, spec.source, s)); };
    double b0 = dlo;
    if (dlo <= 0.0) {
      b0 = kInnerFraction * dhi;
      const Vec f = proj(t - 0.5 * b0);
      for (int n = 0; n < nm; ++n)
        coef[n] += std::pow(b0, a) * mlf({a, a + 1.0}, -basis.eigenvalues[n] * std::pow(b0, a)) * f[n];
    }
    const QuadRule q = gauss_legendre(kDuhamelOrder);
    while (b0 < dhi) {
      const double b1 = std::min(dhi, std::max(kDuhamelRatio * b0, b0 + 1e-300));
      const double mid = 0.5 * (b0 + b1), half = 0.5 * (b1 - b0);
      for (int k = 0; k < kDuhamelOrder; ++k) {
        const double d = mid + half * q.nodes[k];
        const double w = half * q.weights[k] * std::pow(d, a - 1.0);
        const Vec f = proj(t - d);
        for (int n = 0; n < nm; ++n) coef[n] += w * mlf({a, a}, -basis.eigenvalues[n] * std::pow(d, a)) * f[n];
      }
      b0 = b1;
    }
  }
  return Phi * coef;
}

std::string to_string(SourceCase c) {
  switch (c) {
    case SourceCase::initial_condition: return "initial_condition";
    case SourceCase::volume_source: return "volume_source";
    case SourceCase::boundary_source: return "boundary_source";
  }
  return "?";
}

AsymptotePrediction asymptote_prediction(const FemSystem& sys, const ProblemSpec& spec) {
  const double a = spec.alpha;
  if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("asymptote_prediction: alpha must lie in (0, 2)");
  AsymptotePrediction p;
  if (nonzero(spec.u0)) {
    Vec u0 = spec.u0;
    for (int k : sys.dirichlet_dofs) u0[k] = 0.0;
    EllipticData d;
    d.f = u0;
    p.source_case = SourceCase::initial_condition;
    p.elliptic_flux = boundary_flux(sys, elliptic_solve(sys, d));
    p.exponent = a;
    p.leading_coefficient = p.elliptic_flux * gamma_recip(1.0 - a);
    return p;
  }
  const double t_end = std::min(spec.grid.horizon, spec.source_cutoff);
  const Vec fstar = time_integral(sys, spec.source, t_end);
  Vec gstar = Vec::Zero(sys.n_dofs());
  const std::vector<int> gd = dirichlet_data_dofs(spec);
  if (!gd.empty()) {
    const Vec gi = time_integral(sys, spec.dirichlet->g, t_end);
    for (int k : gd) gstar[k] = gi[k];
  }
  const bool has_f = nonzero(fstar), has_g = nonzero(gstar);
  if (!has_f && !has_g) throw std::invalid_argument("asymptote_prediction: all problem data are zero");
  double flux = 0.0;
  if (has_f) {
    EllipticData d1;
    d1.f = fstar;
    d1.rho_weighted = false;
    EllipticData d2;
    d2.f = elliptic_solve(sys, d1);
    flux += boundary_flux(sys, elliptic_solve(sys, d2));
  }
  if (has_g) {
    EllipticData dg;
    dg.g = gstar;
    EllipticData d2;
    d2.f = elliptic_solve(sys, dg);
    flux += boundary_flux(sys, elliptic_solve(sys, d2));
  }
  p.source_case = has_f ? SourceCase::volume_source : SourceCase::boundary_source;
  p.elliptic_flux = flux;
  p.exponent = 1.0 + a;
  p.leading_coefficient = -flux * gamma_recip(-a);
  return p;
}

}  // namespace fracorder
