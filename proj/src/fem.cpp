#include "fracorder/fem.hpp"

#include <cmath>
#include <map>

namespace fracorder {

namespace {

using Trip = Eigen::Triplet<double>;

void check_coeff(double a, double rho, const Point& x) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw ConfigError("assemble: a(x) must be positive, got " + std::to_string(a) + " at x=(" +
                      std::to_string(x[0]) + "," + std::to_string(x[1]) + ")");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw ConfigError("assemble: rho(x) must be positive, got " + std::to_string(rho));
}

void assemble_1d(const Mesh& m, const Coefficients& c, std::vector<Trip>& tm, std::vector<Trip>& tr,
                 std::vector<Trip>& ts, double& qmin) {
  const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (const auto& el : m.elements) {
    const int i0 = el[0], i1 = el[1];
    const double x0 = m.nodes[i0][0], x1 = m.nodes[i1][0];
    const double h = x1 - x0, ah = std::abs(h);
    double mm[2][2] = {}, mr[2][2] = {}, sk[2][2] = {};
    const double dphi[2] = {-1.0 / h, 1.0 / h};
    for (int qp = 0; qp < 3; ++qp) {
      const double phi[2] = {0.5 * (1.0 - gx[qp]), 0.5 * (1.0 + gx[qp])};
      const Point x{x0 + 0.5 * (1.0 + gx[qp]) * h, 0.0};
      const double w = gw[qp] * 0.5 * ah;
      const double a = c.a(x), q = c.q(x), rho = c.rho(x);
      check_coeff(a, rho, x);
      qmin = std::min(qmin, q);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          mm[i][j] += w * phi[i] * phi[j];
          mr[i][j] += w * rho * phi[i] * phi[j];
          sk[i][j] += w * (a * dphi[i] * dphi[j] + q * phi[i] * phi[j]);
        }
    }
    const int id[2] = {i0, i1};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        tm.emplace_back(id[i], id[j], mm[i][j]);
        tr.emplace_back(id[i], id[j], mr[i][j]);
        ts.emplace_back(id[i], id[j], sk[i][j]);
      }
  }
}

// P1 gradients on a counter-clockwise triangle
void p1_gradients(const Point& p0, const Point& p1, const Point& p2, double g[3][2], double& area) {
  area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  const double s = 1.0 / (2.0 * area);
  g[0][0] = (p1[1] - p2[1]) * s, g[0][1] = (p2[0] - p1[0]) * s;
  g[1][0] = (p2[1] - p0[1]) * s, g[1][1] = (p0[0] - p2[0]) * s;
  g[2][0] = (p0[1] - p1[1]) * s, g[2][1] = (p1[0] - p0[0]) * s;
}

void assemble_2d(const Mesh& m, const Coefficients& c, std::vector<Trip>& tm, std::vector<Trip>& tr,
                 std::vector<Trip>& ts, double& qmin) {
  const double bary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
  for (const auto& el : m.elements) {
    const Point &p0 = m.nodes[el[0]], &p1 = m.nodes[el[1]], &p2 = m.nodes[el[2]];
    double g[3][2], area;
    p1_gradients(p0, p1, p2, g, area);
    double mm[3][3] = {}, mr[3][3] = {}, sk[3][3] = {};
    for (int qp = 0; qp < 3; ++qp) {
      const double* phi = bary[qp];
      const Point x{phi[0] * p0[0] + phi[1] * p1[0] + phi[2] * p2[0], phi[0] * p0[1] + phi[1] * p1[1] + phi[2] * p2[1]};
      const double w = area / 3.0;
      const double a = c.a(x), q = c.q(x), rho = c.rho(x);
      check_coeff(a, rho, x);
      qmin = std::min(qmin, q);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          mm[i][j] += w * phi[i] * phi[j];
          mr[i][j] += w * rho * phi[i] * phi[j];
          sk[i][j] += w * (a * (g[i][0] * g[j][0] + g[i][1] * g[j][1]) + q * phi[i] * phi[j]);
        }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        tm.emplace_back(el[i], el[j], mm[i][j]);
        tr.emplace_back(el[i], el[j], mr[i][j]);
        ts.emplace_back(el[i], el[j], sk[i][j]);
      }
  }
}

FluxStencil stencil_1d(const Mesh& m, int node) {
  FluxStencil st;
  st.node = node;
  for (const auto& el : m.elements) {
    if (el[0] != node && el[1] != node) continue;
    const int other = el[0] == node ? el[1] : el[0];
    const double d = m.nodes[node][0] - m.nodes[other][0];
    st.normal = {d > 0 ? 1.0 : -1.0, 0.0};
    // nu * (u_node - u_other) / d
    const double w = st.normal[0] / d;
    st.terms = {{node, w}, {other, -w}};
    return st;
  }
  throw MeshError("assemble: observation node belongs to no element");
}

FluxStencil stencil_2d(const Mesh& m, int node) {
  FluxStencil st;
  st.node = node;
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& el : m.elements)
    for (int k = 0; k < 3; ++k) {
      int a = el[k], b = el[(k + 1) % 3];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  double nx = 0.0, ny = 0.0, total = 0.0;
  std::map<int, double> w;
  std::vector<std::array<double, 4>> grads;  // area, and the element index as double
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    int pos = -1;
    for (int k = 0; k < 3; ++k)
      if (el[k] == node) pos = k;
    if (pos < 0) continue;
    for (int k = 0; k < 3; ++k) {
      int a = el[k], b = el[(k + 1) % 3];
      if ((a != node && b != node) || edge_count[{std::min(a, b), std::max(a, b)}] != 1) continue;
      const double dx = m.nodes[b][0] - m.nodes[a][0], dy = m.nodes[b][1] - m.nodes[a][1];
      const double len = std::hypot(dx, dy);
      nx += dy / len;
      ny += -dx / len;
    }
  }
  const double nn = std::hypot(nx, ny);
  if (!(nn > 1e-12)) throw MeshError("assemble: cannot determine the outward normal at the observation node");
  st.normal = {nx / nn, ny / nn};
  for (const auto& el : m.elements) {
    if (el[0] != node && el[1] != node && el[2] != node) continue;
    double g[3][2], area;
    p1_gradients(m.nodes[el[0]], m.nodes[el[1]], m.nodes[el[2]], g, area);
    for (int k = 0; k < 3; ++k) w[el[k]] += area * (g[k][0] * st.normal[0] + g[k][1] * st.normal[1]);
    total += area;
  }
  for (const auto& [k, v] : w) st.terms.emplace_back(k, v / total);
  return st;
}

}  // namespace

SpMat submatrix(const SpMat& K, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> rmap(K.rows(), -1), cmap(K.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) cmap[cols[j]] = static_cast<int>(j);
  std::vector<Trip> t;
  for (int c = 0; c < K.outerSize(); ++c) {
    if (cmap[c] < 0) continue;
    for (SpMat::InnerIterator it(K, c); it; ++it)
      if (rmap[it.row()] >= 0) t.emplace_back(rmap[it.row()], cmap[c], it.value());
  }
  SpMat S(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

FemSystem assemble(const Mesh& mesh, const Coefficients& coeffs, const Point& x0) {
  FemSystem sys;
  sys.mesh = std::make_shared<const Mesh>(mesh);
  const Mesh& m = *sys.mesh;
  const int n = static_cast<int>(m.nodes.size());
  const int node = find_node(m, x0, 1e-8);
  if (node < 0 || !is_outer_marker(m.markers[node]))
    throw ConfigError("assemble: observation point is not an outer-boundary mesh node");

  std::vector<Trip> tm, tr, ts;
  double qmin = std::numeric_limits<double>::infinity();
  if (m.dim == 1) assemble_1d(m, coeffs, tm, tr, ts, qmin);
  else assemble_2d(m, coeffs, tm, tr, ts, qmin);
  sys.q_min = qmin;
  sys.mass.resize(n, n);
  sys.mass_rho.resize(n, n);
  sys.stiffness.resize(n, n);
  sys.mass.setFromTriplets(tm.begin(), tm.end());
  sys.mass_rho.setFromTriplets(tr.begin(), tr.end());
  sys.stiffness.setFromTriplets(ts.begin(), ts.end());

  sys.interior_index.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (m.markers[i] == marker::interior) {
      sys.interior_index[i] = static_cast<int>(sys.interior_dofs.size());
      sys.interior_dofs.push_back(i);
    } else {
      sys.dirichlet_dofs.push_back(i);
    }
  }
  if (sys.interior_dofs.empty()) throw MeshError("assemble: mesh has no interior nodes");
  sys.observation = m.dim == 1 ? stencil_1d(m, node) : stencil_2d(m, node);
  return sys;
}

double boundary_flux(const FemSystem& sys, const Vec& u) {
  double f = 0.0;
  for (const auto& [k, w] : sys.observation.terms) f += w * u[k];
  return f;
}

Vec interpolate(const Mesh& mesh, const ScalarField& f) {
  Vec v(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) v[i] = f(mesh.nodes[i]);
  return v;
}

DirichletSolver::DirichletSolver(const FemSystem& sys, const SpMat& K) : sys_(&sys) {
  SpMat kii = submatrix(K, sys.interior_dofs, sys.interior_dofs);
  k_ib_ = submatrix(K, sys.interior_dofs, sys.dirichlet_dofs);
  ldlt_.compute(kii);
  if (ldlt_.info() != Eigen::Success) throw NumericError("DirichletSolver: factorization failed");
  if (!(ldlt_.vectorD().minCoeff() > 0.0)) throw NumericError("DirichletSolver: matrix is not positive definite");
}

void DirichletSolver::solve(const Vec& rhs, Vec& u) const {
  const auto& I = sys_->interior_dofs;
  const auto& D = sys_->dirichlet_dofs;
  Vec ri(I.size()), ub(D.size());
  for (std::size_t k = 0; k < I.size(); ++k) ri[k] = rhs[I[k]];
  for (std::size_t k = 0; k < D.size(); ++k) ub[k] = u[D[k]];
  if (D.size() > 0) ri -= k_ib_ * ub;
  Vec x = ldlt_.solve(ri);
  for (std::size_t k = 0; k < I.size(); ++k) u[I[k]] = x[k];
}

Vec elliptic_solve(const FemSystem& sys, const EllipticData& data) {
  const int n = sys.n_dofs();
  Vec rhs = Vec::Zero(n);
  if (data.f.size() > 0) {
    if (data.f.size() != n) throw std::invalid_argument("elliptic_solve: f has wrong length");
    rhs = (data.rho_weighted ? sys.mass_rho : sys.mass) * data.f;
  }
  Vec u = Vec::Zero(n);
  if (data.g.size() > 0) {
    if (data.g.size() != n) throw std::invalid_argument("elliptic_solve: g has wrong length");
    for (int k : sys.dirichlet_dofs) u[k] = data.g[k];
  }
  DirichletSolver solver(sys, sys.stiffness);
  solver.solve(rhs, u);
  return u;
}

}  // namespace fracorder
