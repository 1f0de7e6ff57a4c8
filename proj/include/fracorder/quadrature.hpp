#pragma once

#include <vector>

namespace fracorder {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre on [-1, 1].
QuadRule gauss_legendre(int n);

// n-point Gauss-Jacobi on [0, 1] for the weight v^(a-1), a > 0.
QuadRule gauss_jacobi01(int n, double a);

}  // namespace fracorder
