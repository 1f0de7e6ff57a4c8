#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fracorder/soe.hpp"

using namespace fracorder;

namespace {

void check_shape(const SoeApprox& a) {
  REQUIRE(a.nodes.size() == a.weights.size());
  REQUIRE(a.size() > 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.nodes[i] > 0.0);
    CHECK(a.weights[i] > 0.0);
    if (i) CHECK(a.nodes[i] > a.nodes[i - 1]);
  }
}

}  // namespace

TEST_CASE("soe: beta 0.5 over [1e-4, 100] at 1e-8") {
  SoeApprox a = build_soe(0.5, 1e-4, 100.0, 1e-8);
  check_shape(a);
  CHECK(a.certified_error <= 1e-8);
  CHECK(soe_sup_error(a) <= 1e-8);
  MESSAGE("nodes: " << a.size());
  CHECK(a.size() < 400);
}

TEST_CASE("soe: beta 1.5 over [1e-3, 100] at 1e-7") {
  SoeApprox a = build_soe(1.5, 1e-3, 100.0, 1e-7);
  check_shape(a);
  CHECK(a.certified_error <= 1e-7);
}

TEST_CASE("soe: easier problem needs fewer nodes") {
  SoeApprox hard = build_soe(0.5, 1e-4, 100.0, 1e-8);
  SoeApprox easy = build_soe(0.5, 1e-2, 1.0, 1e-4);
  CHECK(easy.size() < hard.size());
  CHECK(easy.certified_error <= 1e-4);
}

TEST_CASE("soe: every kernel used by the steppers certifies") {
  for (double beta : {0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 1.999}) {
    CAPTURE(beta);
    SoeApprox a = build_soe(beta, 1e-3, 30.0, 1e-9);
    check_shape(a);
    CHECK(a.certified_error <= 1e-9);
  }
}

TEST_CASE("soe: evaluation at the interval ends and geometric midpoint") {
  const double beta = 0.5, d = 1e-4, T = 100.0, tol = 1e-8;
  SoeApprox a = build_soe(beta, d, T, tol);
  CHECK(std::abs(eval_soe(a, d) - std::pow(d, -beta)) <= tol);
  CHECK(std::abs(eval_soe(a, T) - std::pow(T, -beta)) <= tol);
  CHECK(std::abs(eval_soe(a, std::sqrt(d * T)) - std::pow(d * T, -beta / 2)) <= tol);
}

TEST_CASE("soe: out-of-range evaluation") {
  SoeApprox a = build_soe(0.5, 1e-2, 1.0, 1e-4);
  CHECK_NOTHROW(eval_soe(a, 0.5e-2));
  CHECK_NOTHROW(eval_soe(a, 2.0));
  CHECK_THROWS_AS(eval_soe(a, 0.4e-2), std::out_of_range);
  CHECK_THROWS_AS(eval_soe(a, 2.1), std::out_of_range);
}

TEST_CASE("soe: bad parameters") {
  CHECK_THROWS_AS(build_soe(0.0, 1e-3, 1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(build_soe(2.0, 1e-3, 1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(build_soe(0.5, 1.0, 1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(build_soe(0.5, -1.0, 1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(build_soe(0.5, 1e-3, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_soe(0.5, 1e-3, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("soe: verification grid is dense enough") {
  for (double beta : {0.5, 1.5}) {
    SoeApprox a = build_soe(beta, 1e-4, 100.0, 1e-8);
    const double e1 = soe_sup_error(a, 10000), e2 = soe_sup_error(a, 20000);
    CAPTURE(beta);
    CHECK(std::abs(e2 - e1) <= 0.1 * e1);
  }
}

TEST_CASE("soe: text round trip") {
  SoeApprox a = build_soe(0.75, 1e-3, 10.0, 1e-7);
  std::stringstream ss;
  write_soe(a, ss);
  SoeApprox b = read_soe(ss);
  CHECK(b.beta == a.beta);
  CHECK(b.delta == a.delta);
  CHECK(b.horizon == a.horizon);
  CHECK(b.tol == a.tol);
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.nodes[i] == a.nodes[i]);
    CHECK(b.weights[i] == a.weights[i]);
  }
}
