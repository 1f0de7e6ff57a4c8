#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracorder/special.hpp"
#include "mpfr_oracle.hpp"

using namespace fracorder;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("gamma_recip pole convention") {
  CHECK(gamma_recip(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_recip(0.0) == 0.0);
  CHECK(gamma_recip(-1.0) == 0.0);
  CHECK(gamma_recip(-7.0) == 0.0);
  CHECK(gamma_recip(0.5) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(gamma_recip(-0.5) == doctest::Approx(-0.5 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("mlf closed forms") {
  CHECK(mlf({1, 1}, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  const double q = std::numbers::pi / 2;
  CHECK(std::abs(mlf({2, 1}, -q * q)) < 1e-14);
  CHECK(rel(mlf({2, 1}, -7.3), std::cos(std::sqrt(7.3))) < 1e-12);
  // E_{1/2,1}(-x) = exp(x^2) erfc(x)
  for (double x : {0.3, 1.0, 2.5, 6.0}) CHECK(rel(mlf({0.5, 1}, -x), std::exp(x * x) * std::erfc(x)) < 1e-12);
  CHECK(rel(mlf({1, 2}, -3.0), -std::expm1(-3.0) / 3.0) < 1e-14);
}

TEST_CASE("mlf at zero equals 1/Gamma(beta)") {
  for (double a : {0.25, 0.5, 1.0, 1.5, 1.99})
    for (double b : {0.5, 1.0, 1.5, 2.0, 3.0}) CHECK(mlf({a, b}, 0.0) == gamma_recip(b));
}

TEST_CASE("mlf domain errors") {
  CHECK_THROWS_AS(mlf({0.0, 1}, -1.0), std::domain_error);
  CHECK_THROWS_AS(mlf({2.5, 1}, -1.0), std::domain_error);
  CHECK_THROWS_AS(mlf({-1.0, 1}, -1.0), std::domain_error);
}

TEST_CASE("E_{1,1} equals exp on [-30, 30]") {
  for (int i = 0; i <= 600; ++i) {
    double z = -30.0 + 0.1 * i;
    CHECK(rel(mlf({1, 1}, z), std::exp(z)) < 1e-12);
  }
  // the plain series as well, while cancellation (about e^{2|z|} eps) stays small
  for (double z : {-0.7, -3.0}) CHECK(rel(mlf_series({1, 1}, z), std::exp(z)) < 1e-12);
}

TEST_CASE("mlf against high-precision series") {
  const double alphas[] = {0.25, 0.5, 0.75, 0.999, 1.001, 1.25, 1.5, 1.75, 2.0};
  for (double a : alphas) {
    for (double b : {1.0, a, 2.0, a + 1.0, 0.5}) {
      for (double z : {-0.3, -1.0, -1.7, -4.0, -15.0, -60.0, -250.0}) {
        if (std::pow(-z, 1.0 / a) > 1200.0) continue;
        double ref = oracle_mp::mlf_mp(a, b, z);
        INFO("alpha=" << a << " beta=" << b << " z=" << z);
        CHECK(rel(mlf({a, b}, z), ref) < 1e-12);
      }
    }
  }
  for (double z : {0.5, 3.0, 20.0}) CHECK(rel(mlf({0.75, 1.0}, z), oracle_mp::mlf_mp(0.75, 1.0, z)) < 1e-12);
}

TEST_CASE("alpha=0.5 beta=1 z=-50: asymptotic p=6 vs high-precision series") {
  const double ref = oracle_mp::mlf_mp(0.5, 1.0, -50.0);
  CHECK(rel(mlf_asymptotic({0.5, 1.0}, -50.0, 6), ref) < 1e-9);
  CHECK(rel(mlf({0.5, 1.0}, -50.0), ref) < 1e-12);
}

TEST_CASE("branch agreement around the switch points") {
  for (double a : {0.25, 0.5, 0.75, 1.25, 1.5, 1.75}) {
    for (double b : {1.0, a, 2.0}) {
      MlfParams p{a, b};
      for (double x : {0.5, 0.75, 1.0, 1.25, 1.5}) {
        INFO("series/contour alpha=" << a << " beta=" << b << " x=" << x);
        CHECK(rel(mlf_series(p, -x), mlf_contour(p, -x)) < 1e-9);
      }
      // the asymptotic route is taken once its remainder is below 1e-16 relative
      for (double x : {3e2, 1e3, 1e4, 1e5}) {
        INFO("asymptotic/contour alpha=" << a << " beta=" << b << " x=" << x);
        CHECK(rel(mlf(p, -x), mlf_contour(p, -x)) < 1e-9);
      }
    }
  }
}

TEST_CASE("decay bound check") {
  std::vector<double> grid;
  for (int i = 0; i <= 80; ++i) grid.push_back(-std::pow(10.0, 4.0 * i / 80));
  double m = mlf_decay_bound_check({0.5, 1}, grid);
  CHECK(std::isfinite(m));
  // no growth trend: the tail ratio settles near 1/Gamma(1/2)
  std::vector<double> tail(grid.end() - 10, grid.end());
  double mt = mlf_decay_bound_check({0.5, 1}, tail);
  CHECK(mt == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(0.01));
  std::vector<double> g1{-1.0};
  CHECK(mlf_decay_bound_check({1, 1}, g1) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
  std::vector<double> g0{0.0};
  CHECK(mlf_decay_bound_check({1.5, 1.5}, g0) == doctest::Approx(1.1283791671).epsilon(1e-10));
  std::vector<double> bad{1.0};
  CHECK_THROWS(mlf_decay_bound_check({0.5, 1}, bad));
}

TEST_CASE("monotone decay on the negative axis for subdiffusion orders") {
  for (double a : {0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    double prev = mlf({a, 1}, 0.0);
    for (int i = 1; i <= 400; ++i) {
      double z = -std::pow(10.0, -2.0 + 7.0 * i / 400);
      double v = mlf({a, 1}, z);
      INFO("alpha=" << a << " z=" << z);
      CHECK(v <= prev);
      CHECK(v > 0.0);
      prev = v;
    }
  }
}
