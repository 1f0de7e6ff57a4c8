#include "fracorder/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fracorder {

QuadRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  return q;
}

QuadRule gauss_jacobi01(int n, double a) {
  if (n < 1 || !(a > 0.0)) throw std::invalid_argument("gauss_jacobi01: bad arguments");
  // Jacobi (0, b) on [-1, 1] with b = a - 1, then mapped to [0, 1].
  const double al = 0.0, b = a - 1.0, ab = al + b;
  Eigen::VectorXd diag(n), sub(n > 1 ? n - 1 : 1);
  for (int k = 0; k < n; ++k) {
    double s = 2.0 * k + ab;
    diag[k] = (k == 0) ? (b - al) / (ab + 2.0) : (b * b - al * al) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    double s = 2.0 * k + ab;
    double num = 4.0 * k * (k + al) * (k + b) * (k + ab);
    double den = s * s * (s + 1.0) * (s - 1.0);
    sub[k - 1] = std::sqrt(num / den);
  }
  QuadRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double mu0 = std::pow(2.0, b + 1.0) / (b + 1.0);
  const double scale = std::pow(2.0, -b - 1.0);
  if (n == 1) {
    q.nodes[0] = 0.5 * (diag[0] + 1.0);
    q.weights[0] = mu0 * scale;
    return q;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  for (int k = 0; k < n; ++k) {
    double v0 = es.eigenvectors()(0, k);
    q.nodes[k] = 0.5 * (es.eigenvalues()[k] + 1.0);
    q.weights[k] = mu0 * v0 * v0 * scale;
  }
  return q;
}

}  // namespace fracorder
