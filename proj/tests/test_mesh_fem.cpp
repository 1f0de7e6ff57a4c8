#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "fracorder/fem.hpp"
#include "fracorder/oracle.hpp"

using namespace fracorder;
namespace fs = std::filesystem;

namespace {

// -v'(0) for -((1+x^2) v')' + v = x^2 (1 - x), v(0) = v(1) = 0; scipy solve_bvp, tol 1e-12.
constexpr double kFluxAinvU0 = -0.02498206177547902;
// smallest eigenvalue of -((1+x^2) v')' + v on (0,1), Dirichlet; scipy + refined finite differences
constexpr double kLambda1 = 14.159676;

Coefficients ex41_coeffs() {
  Coefficients c;
  c.a = [](const Point& x) { return 1.0 + x[0] * x[0]; };
  c.q = [](const Point&) { return 1.0; };
  return c;
}

std::string write_temp(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / ("fracorder_test_" + name);
  std::ofstream(p) << text;
  return p.string();
}

double dense_sym_err(const SpMat& A) { return (SpMat(A.transpose()) - A).norm() / A.norm(); }

}  // namespace

TEST_CASE("interval meshes") {
  Mesh m2 = make_interval_mesh(2);
  REQUIRE(m2.nodes.size() == 3);
  CHECK(m2.nodes[0][0] == 0.0);
  CHECK(m2.nodes[1][0] == 0.5);
  CHECK(m2.nodes[2][0] == 1.0);
  CHECK(m2.markers[0] == marker::left_end);
  CHECK(m2.markers[1] == marker::interior);
  CHECK(m2.markers[2] == marker::right_end);
  Mesh m4 = make_interval_mesh(4);
  REQUIRE(m4.nodes.size() == 5);
  for (int i = 0; i < 4; ++i) CHECK(m4.nodes[i + 1][0] - m4.nodes[i][0] == doctest::Approx(0.25));
  CHECK(make_interval_mesh(100).nodes.size() == 101);
}

TEST_CASE("square meshes") {
  Mesh m2 = make_square_mesh(2);
  CHECK(m2.nodes.size() == 9);
  CHECK(m2.elements.size() == 8);
  Mesh m4 = make_square_mesh(4);
  CHECK(m4.nodes.size() == 25);
  CHECK(m4.elements.size() == 32);
  for (int n : {2, 7, 64}) {
    Mesh m = make_square_mesh(n);
    double area = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e) area += m.element_measure(e);
    CHECK(std::abs(area - 1.0) < 1e-13);
  }
  CHECK(m4.markers[find_node(m4, {0.0, 0.0})] == marker::bottom);
  CHECK(m4.markers[find_node(m4, {1.0, 0.0})] == marker::bottom);
  CHECK(m4.markers[find_node(m4, {0.0, 1.0})] == marker::top);
  CHECK(m4.markers[find_node(m4, {0.5, 0.0})] == marker::bottom);
  CHECK(m4.markers[find_node(m4, {1.0, 0.5})] == marker::right);
  CHECK(m4.markers[find_node(m4, {0.5, 1.0})] == marker::top);
  CHECK(m4.markers[find_node(m4, {0.0, 0.5})] == marker::left);
  CHECK(m4.markers[find_node(m4, {0.5, 0.5})] == marker::interior);
}

TEST_CASE("load_mesh: single triangle and errors") {
  auto p = write_temp("tri.mesh", "# one triangle\n2 3 1 3\n1 0 0\n2 1 0\n3 0 1\n7 1 2 3\n1 1\n2 1\n3 1\n");
  Mesh m = load_mesh(p);
  CHECK(m.dim == 2);
  CHECK(m.elements.size() == 1);
  CHECK(m.element_measure(0) == doctest::Approx(0.5));

  auto rep = write_temp("rep.mesh", "2 3 1 0\n1 0 0\n2 1 0\n3 0 1\n1 1 1 3\n");
  CHECK_THROWS_AS(load_mesh(rep), MeshError);

  auto bad = write_temp("bad.mesh", "2 3 1 0\n1 0 0\n2 1 zero\n3 0 1\n1 1 2 3\n");
  try {
    load_mesh(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
  auto flat = write_temp("flat.mesh", "2 3 1 0\n1 0 0\n2 1 0\n3 2 0\n1 1 2 3\n");
  CHECK_THROWS_AS(load_mesh(flat), MeshError);
  CHECK_THROWS_AS(load_mesh("/nonexistent/x.mesh"), MeshError);
}

TEST_CASE("load_mesh: save/load round trip") {
  Mesh a = make_square_mesh(3);
  auto p = (fs::temp_directory_path() / "fracorder_test_rt.mesh").string();
  save_mesh(a, p);
  Mesh b = load_mesh(p);
  REQUIRE(b.nodes.size() == a.nodes.size());
  REQUIRE(b.elements.size() == a.elements.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(b.nodes[i] == a.nodes[i]);
    CHECK(b.markers[i] == a.markers[i]);
  }
}

TEST_CASE("obstacle mesh fixture") {
  for (const char* name : {"square_hole_32.mesh", "square_hole_64.mesh"}) {
    CAPTURE(name);
    Mesh m = load_mesh(std::string(FRACORDER_DATA_DIR) + "/" + name);
    std::set<std::pair<int, int>> edges;
    for (const auto& el : m.elements)
      for (int k = 0; k < 3; ++k) {
        int a = el[k], b = el[(k + 1) % 3];
        edges.insert({std::min(a, b), std::max(a, b)});
      }
    // annulus: V - E + F = 0
    CHECK(static_cast<long>(m.nodes.size()) - static_cast<long>(edges.size()) + static_cast<long>(m.elements.size()) == 0);
    int n_obs = 0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      const double d = std::hypot(m.nodes[i][0] - 0.5, m.nodes[i][1] - 0.5);
      if (m.markers[i] == marker::obstacle) {
        ++n_obs;
        CHECK(d == doctest::Approx(0.2).epsilon(1e-12));
      } else {
        CHECK(d > 0.2);
      }
    }
    CHECK(n_obs > 8);
    double area = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e) area += m.element_measure(e);
    const double poly = 0.5 * n_obs * 0.04 * std::sin(2.0 * std::numbers::pi / n_obs);
    CHECK(area == doctest::Approx(1.0 - poly).epsilon(1e-12));
    CHECK(find_node(m, {0.0, 0.5}) >= 0);
  }
  Mesh m32 = load_mesh(std::string(FRACORDER_DATA_DIR) + "/square_hole_32.mesh");
  CHECK(m32.elements.size() > 1500);
  CHECK(m32.elements.size() < 2500);
}

TEST_CASE("assembly: textbook 1D rows") {
  const int n = 10;
  const double h = 1.0 / n;
  Mesh m = make_interval_mesh(n);
  FemSystem s = assemble(m, Coefficients{}, {0.0, 0.0});
  Eigen::MatrixXd S(s.stiffness), M(s.mass), Mr(s.mass_rho);
  for (int i = 1; i < n; ++i) {
    CHECK(S(i, i - 1) == doctest::Approx(-1.0 / h));
    CHECK(S(i, i) == doctest::Approx(2.0 / h));
    CHECK(S(i, i + 1) == doctest::Approx(-1.0 / h));
    CHECK(M.row(i).sum() == doctest::Approx(h));
  }
  CHECK((M - Mr).norm() < 1e-15);
  CHECK(s.interior_dofs.size() == static_cast<std::size_t>(n - 1));
  CHECK(s.dirichlet_dofs.size() == 2);
}

TEST_CASE("assembly: symmetry and definiteness") {
  Coefficients c;
  c.a = [](const Point& x) { return 1.0 + std::sin(std::numbers::pi * x[0]) * x[1] * (1.0 - x[1]); };
  c.q = [](const Point&) { return 1.0; };
  c.rho = [](const Point& x) { return 1.0 + 0.5 * x[0]; };
  Mesh m = make_square_mesh(8);
  FemSystem s = assemble(m, c, {0.0, 0.5});
  CHECK(dense_sym_err(s.mass) < 1e-15);
  CHECK(dense_sym_err(s.mass_rho) < 1e-15);
  CHECK(dense_sym_err(s.stiffness) < 1e-15);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    Vec u(s.n_dofs());
    for (int i = 0; i < u.size(); ++i) u[i] = nd(rng);
    CHECK(u.dot(s.stiffness * u) > 0.0);
    CHECK(u.dot(s.mass * u) > 0.0);
    CHECK(u.dot(s.mass_rho * u) > 0.0);
  }
  CHECK(s.q_min == doctest::Approx(1.0));
}

TEST_CASE("assembly: coefficient bounds and observation point") {
  Mesh m = make_interval_mesh(10);
  Coefficients bad_a;
  bad_a.a = [](const Point& x) { return x[0] - 0.5; };
  CHECK_THROWS_AS(assemble(m, bad_a, {0.0, 0.0}), ConfigError);
  Coefficients bad_rho;
  bad_rho.rho = [](const Point&) { return 0.0; };
  CHECK_THROWS_AS(assemble(m, bad_rho, {0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(assemble(m, Coefficients{}, {0.5, 0.0}), ConfigError);   // interior node
  CHECK_THROWS_AS(assemble(m, Coefficients{}, {0.33, 0.0}), ConfigError);  // not a node
  Coefficients neg_q;
  neg_q.q = [](const Point& x) { return std::cos(std::numbers::pi * x[0]); };
  FemSystem s = assemble(m, neg_q, {1.0, 0.0});
  CHECK(s.q_min < 0.0);
}

TEST_CASE("elliptic_solve: exact nodal values and linear profile") {
  const int n = 16;
  Mesh m = make_interval_mesh(n);
  FemSystem s = assemble(m, Coefficients{}, {0.0, 0.0});
  EllipticData d;
  d.f = Vec::Ones(s.n_dofs());
  Vec y = elliptic_solve(s, d);
  // P1 Galerkin for -u'' = 1 in 1D is nodally exact
  for (int i = 0; i <= n; ++i) {
    const double x = m.nodes[i][0];
    CHECK(y[i] == doctest::Approx(0.5 * x * (1.0 - x)).epsilon(1e-12));
  }
  EllipticData g;
  g.g = Vec::Zero(s.n_dofs());
  g.g[0] = 1.0;
  Vec z = elliptic_solve(s, g);
  for (int i = 0; i <= n; ++i) CHECK(z[i] == doctest::Approx(1.0 - m.nodes[i][0]).epsilon(1e-12));
  CHECK(boundary_flux(s, z) == doctest::Approx(1.0));  // nu = -e_x, u' = -1
}

TEST_CASE("boundary_flux: 1D stencils") {
  Mesh m = make_interval_mesh(200);
  FemSystem s = assemble(m, Coefficients{}, {0.0, 0.0});
  Vec lin = interpolate(m, [](const Point& x) { return x[0]; });
  CHECK(boundary_flux(s, lin) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(boundary_flux(s, Vec::Constant(s.n_dofs(), 3.0)) == doctest::Approx(0.0));
  // x(1-x) at 0: exact -1, one-sided difference gives -(1 - h)
  double prev = 0.0;
  for (int n : {50, 100, 200, 400}) {
    Mesh mm = make_interval_mesh(n);
    FemSystem ss = assemble(mm, Coefficients{}, {0.0, 0.0});
    const double e = std::abs(boundary_flux(ss, interpolate(mm, [](const Point& x) { return x[0] * (1 - x[0]); })) + 1.0);
    CHECK(e == doctest::Approx(1.0 / n).epsilon(1e-9));
    if (prev > 0) CHECK(prev / e == doctest::Approx(2.0).epsilon(1e-6));
    prev = e;
  }
  FemSystem right = assemble(m, Coefficients{}, {1.0, 0.0});
  CHECK(boundary_flux(right, lin) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("boundary_flux: 2D linear fields") {
  Mesh sq = make_square_mesh(8);
  Mesh hole = load_mesh(std::string(FRACORDER_DATA_DIR) + "/square_hole_32.mesh");
  for (const Mesh* m : {&sq, &hole}) {
    FemSystem s = assemble(*m, Coefficients{}, {0.0, 0.5});
    CHECK(boundary_flux(s, interpolate(*m, [](const Point& x) { return x[0]; })) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(boundary_flux(s, interpolate(*m, [](const Point& x) { return x[1]; }))) < 1e-12);
    CHECK(boundary_flux(s, interpolate(*m, [](const Point& x) { return 2.0 - 3.0 * x[0] + x[1]; })) ==
          doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("elliptic flux oracle for the 1D initial-condition example") {
  // d_nu A^{-1}u0 at x0 = 0 converges to the BVP value; the one-sided difference is
  // first order in general, second here since u''(0) = 0
  std::vector<double> err;
  for (int n : {100, 200, 400, 800}) {
    Mesh m = make_interval_mesh(n);
    FemSystem s = assemble(m, ex41_coeffs(), {0.0, 0.0});
    EllipticData d;
    d.f = interpolate(m, [](const Point& x) { return x[0] * x[0] * (1.0 - x[0]); });
    err.push_back(std::abs(boundary_flux(s, elliptic_solve(s, d)) - kFluxAinvU0));
  }
  CHECK(err.back() / std::abs(kFluxAinvU0) < 5e-3);
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double rate = std::log2(err[i - 1] / err[i]);
    CAPTURE(rate);
    CHECK(rate > 1.7);
  }
}

TEST_CASE("smallest eigenvalue: coarse vs fine mesh") {
  auto lam1 = [](int n) {
    Mesh m = make_interval_mesh(n);
    FemSystem s = assemble(m, ex41_coeffs(), {0.0, 0.0});
    return spectral_basis(s, 1).eigenvalues[0];
  };
  const double coarse = lam1(10), fine = lam1(1000);
  CHECK(std::abs(coarse - fine) / fine < 0.01);
  CHECK(fine == doctest::Approx(kLambda1).epsilon(1e-5));
}
