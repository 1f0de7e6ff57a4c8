#pragma once

#include <iosfwd>
#include <vector>

namespace fracorder {

// sum_i w_i exp(-s_i t) ~ t^{-beta} on [delta, horizon]
struct SoeApprox {
  double beta = 0.0;
  double delta = 0.0;
  double horizon = 0.0;
  double tol = 0.0;
  std::vector<double> nodes;    // s_i, strictly increasing
  std::vector<double> weights;  // w_i > 0
  double certified_error = 0.0;  // sup error on the 1e4-point log grid

  std::size_t size() const { return nodes.size(); }
};

// Throws std::invalid_argument on bad parameters and NumericError if the
// certificate cannot be met.
SoeApprox build_soe(double beta, double delta, double horizon, double tol);

// Throws std::out_of_range outside [delta/2, 2 horizon].
double eval_soe(const SoeApprox& a, double t);

// sup |t^{-beta} - soe(t)| over n log-spaced points in [delta, horizon].
double soe_sup_error(const SoeApprox& a, int n_points = 10000);

void write_soe(const SoeApprox& a, std::ostream& os);
SoeApprox read_soe(std::istream& is);

}  // namespace fracorder
