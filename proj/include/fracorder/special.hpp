#pragma once

#include <span>

namespace fracorder {

// Two-parameter Mittag-Leffler E_{alpha,beta}. alpha in (0, 2].
struct MlfParams {
  double alpha;
  double beta;
};

// 1/Gamma(x), exactly 0 at x = 0, -1, -2, ...
double gamma_recip(double x);

// E_{alpha,beta}(z) on the real axis. Throws std::domain_error for alpha outside (0, 2]
// or for positive z too large for the power series.
double mlf(MlfParams p, double z);

// Individual evaluation routes, exposed for cross-checking.
double mlf_series(MlfParams p, double z);                 // Taylor sum, cap 500 terms
double mlf_asymptotic(MlfParams p, double z, int terms);  // -sum_{k=1}^{terms} z^{-k}/Gamma(beta - k alpha), z < 0
double mlf_contour(MlfParams p, double z);                // Hankel cut integral plus poles, z < 0

// max over grid of |E(z)| (1 + |z|); grid must be non-positive.
double mlf_decay_bound_check(MlfParams p, std::span<const double> z_grid);

}  // namespace fracorder
