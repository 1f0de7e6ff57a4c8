#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fracorder/config.hpp"
#include "fracorder/oracle.hpp"

using namespace fracorder;
using std::numbers::pi;

namespace {

std::shared_ptr<const FemSystem> preset_system(const ExperimentConfig& cfg) {
  return std::make_shared<const FemSystem>(assemble(build_mesh(cfg), build_coefficients(cfg), cfg.x0));
}

double rho_norm(const FemSystem& s, const Vec& v) { return std::sqrt(v.dot(s.mass * v)); }

// mean of t^p h(t) over stored times in [t0, t1]
double scaled_mean(const FluxSeries& f, double p, double t0, double t1) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < f.times.size(); ++i)
    if (f.times[i] >= t0 - 1e-12 && f.times[i] <= t1 + 1e-12) sum += std::pow(f.times[i], p) * f.values[i], ++n;
  return sum / n;
}

}  // namespace

TEST_CASE("spectral basis: Dirichlet Laplacian") {
  auto sys = assemble(make_interval_mesh(200), Coefficients{}, {0.0, 0.0});
  SpectralBasis b = spectral_basis(sys, 20);
  REQUIRE(b.count() == 20);
  for (int n = 1; n <= 5; ++n) CHECK(b.eigenvalues[n - 1] == doctest::Approx(n * n * pi * pi).epsilon(0.01));
  for (int n = 1; n < b.count(); ++n) CHECK(b.eigenvalues[n] > b.eigenvalues[n - 1]);
  CHECK(orthonormality_residual(sys, b) < 1e-10);
  for (int k : sys.dirichlet_dofs) CHECK(b.eigenvectors.row(k).norm() == 0.0);
  CHECK_THROWS_AS(spectral_basis(sys, 200), std::invalid_argument);
  CHECK_THROWS_AS(spectral_basis(sys, 0), std::invalid_argument);
}

TEST_CASE("spectral basis: variable coefficients, refinement and Parseval") {
  Coefficients c;
  c.a = [](const Point& x) { return 1.0 + x[0] * x[0]; };
  c.q = [](const Point&) { return 1.0; };
  c.rho = [](const Point& x) { return 1.0 + 0.5 * x[0]; };
  auto lam1 = [&](int n) { return spectral_basis(assemble(make_interval_mesh(n), c, {0.0, 0.0}), 1).eigenvalues[0]; };
  const double l200 = lam1(200), l400 = lam1(400);
  CHECK(l200 > 0.0);
  CHECK(std::abs(l200 - l400) / l400 < 0.005);

  auto sys = assemble(make_interval_mesh(100), c, {0.0, 0.0});
  CHECK(orthonormality_residual(sys, spectral_basis(sys, 99)) < 1e-10);
  Vec u0 = interpolate(*sys.mesh, [](const Point& x) { return x[0] * x[0] * (1 - x[0]); });
  const double total = u0.dot(sys.mass_rho * u0);
  double prev = 0.0;
  for (int count : {1, 5, 20, 99}) {
    SpectralBasis b = spectral_basis(sys, count);
    Vec coef = b.eigenvectors.transpose() * (sys.mass_rho * u0);
    const double s = coef.squaredNorm();
    CAPTURE(count);
    CHECK(s <= total * (1 + 1e-12));
    CHECK(s >= prev);
    prev = s;
  }
  CHECK(prev == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("series solution: trivial cases") {
  auto sys = std::make_shared<const FemSystem>(assemble(make_interval_mesh(100), Coefficients{}, {0.0, 0.0}));
  SpectralBasis b = spectral_basis(*sys, 99);
  ProblemSpec s;
  s.sys = sys;
  s.alpha = 0.5;
  s.grid = TimeGrid::from_horizon(0.01, 1.0);
  CHECK(series_solution(b, s, 0.5).norm() == 0.0);

  // alpha = 1 and u0 = phi_1: pure exponential decay
  s.alpha = 1.0;
  s.u0 = b.eigenvectors.col(0);
  Vec u = series_solution(b, s, 0.3);
  Vec expect = std::exp(-b.eigenvalues[0] * 0.3) * s.u0;
  CHECK((u - expect).lpNorm<Eigen::Infinity>() < 1e-10 * s.u0.lpNorm<Eigen::Infinity>());

  s.dirichlet = DirichletData{[](const Point&, double) { return 1.0; }, {}};
  CHECK_THROWS_AS(series_solution(b, s, 0.5), std::invalid_argument);
}

TEST_CASE("series solution vs subdiffusion stepper, ex4.1i at t = 1") {
  ExperimentConfig cfg = preset_config("ex4.1i");
  cfg.T = 1.0;
  auto sys = preset_system(cfg);
  SpectralBasis b = spectral_basis(*sys, sys->n_interior());
  ProblemSpec s = build_problem(cfg, 0.5, sys);
  Vec stepped;
  StepOptions opt;
  opt.observer = [&](int n, double, const Vec& u) {
    if (n == s.grid.n_steps) stepped = u;
  };
  simulate(s, cfg.soe_tol, opt);
  Vec ref = series_solution(b, s, 1.0);
  CHECK(rho_norm(*sys, stepped - ref) / rho_norm(*sys, ref) < 1e-2);
}

TEST_CASE("asymptote prediction: pole convention, errors and signs") {
  ExperimentConfig cfg = preset_config("ex4.1ii");
  auto sys = preset_system(cfg);
  ProblemSpec s = build_problem(cfg, 1.0, sys);
  AsymptotePrediction p = asymptote_prediction(*sys, s);
  CHECK(p.source_case == SourceCase::volume_source);
  CHECK(p.exponent == 2.0);
  CHECK(p.elliptic_flux != 0.0);
  CHECK(p.leading_coefficient == 0.0);

  ProblemSpec zero;
  zero.sys = sys;
  zero.alpha = 0.5;
  zero.grid = s.grid;
  CHECK_THROWS_AS(asymptote_prediction(*sys, zero), std::invalid_argument);

  // u0 <= 0 gives an outward derivative of A^{-1}u0 that is positive
  ExperimentConfig c1 = preset_config("ex4.1i");
  auto sys1 = preset_system(c1);
  ProblemSpec neg = build_problem(c1, 0.5, sys1);
  neg.u0 = -neg.u0;
  AsymptotePrediction q = asymptote_prediction(*sys1, neg);
  CHECK(q.source_case == SourceCase::initial_condition);
  CHECK(q.exponent == 0.5);
  CHECK(q.elliptic_flux > 0.0);
  CHECK(q.leading_coefficient == doctest::Approx(q.elliptic_flux / std::tgamma(0.5)).epsilon(1e-14));

  ExperimentConfig c3 = preset_config("ex4.1iii");
  auto sys3 = preset_system(c3);
  AsymptotePrediction g = asymptote_prediction(*sys3, build_problem(c3, 0.5, sys3));
  CHECK(g.source_case == SourceCase::boundary_source);
  CHECK(g.exponent == 1.5);
}

TEST_CASE("long-time flux approaches the predicted leading term") {
  SUBCASE("initial condition") {
    ExperimentConfig cfg = preset_config("ex4.1i");
    auto sys = preset_system(cfg);
    ProblemSpec s = build_problem(cfg, 0.5, sys);
    AsymptotePrediction p = asymptote_prediction(*sys, s);
    const double fitted = scaled_mean(simulate(s, cfg.soe_tol), 0.5, 50.0, 100.0);
    CHECK(fitted == doctest::Approx(p.leading_coefficient).epsilon(0.05));
  }
  SUBCASE("volume source") {
    ExperimentConfig cfg = preset_config("ex4.1ii");
    auto sys = preset_system(cfg);
    ProblemSpec s = build_problem(cfg, 0.5, sys);
    AsymptotePrediction p = asymptote_prediction(*sys, s);
    const double fitted = scaled_mean(simulate(s, cfg.soe_tol), 1.5, 50.0, 100.0);
    CHECK(fitted == doctest::Approx(p.leading_coefficient).epsilon(0.05));
  }
}
