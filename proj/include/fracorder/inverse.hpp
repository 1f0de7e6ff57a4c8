#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracorder/forward.hpp"

namespace fracorder {

// initial_condition: exponents k*alpha; zero_initial: 1 + k*alpha (k = 1..K).
enum class FitMode { initial_condition, zero_initial };
FitMode parse_fit_mode(const std::string& s);
std::string to_string(FitMode m);

struct ObservationSet {
  std::vector<double> t;
  std::vector<double> h;
  double window_start = 0.0;
  double window_end = 0.0;
  FitMode mode = FitMode::initial_condition;
  int n_terms = 1;
  double noise = 0.0;
  long long seed = -1;
};

// h_i (1 + eps xi_i), xi standard normal from mt19937_64(seed).
FluxSeries add_noise(const FluxSeries& series, double epsilon, std::uint64_t seed);

// n equally spaced targets in [t_start, t_end], each snapped to the nearest stored time.
// Throws std::out_of_range if the window leaves the series or collapses to one grid cell.
ObservationSet sample_window(const FluxSeries& series, double t_start, double t_end, int n,
                             FitMode mode = FitMode::initial_condition, int n_terms = 1);

double model_exponent(FitMode mode, int k, double alpha);

struct LinearFit {
  std::vector<double> c;
  double residual = 0.0;   // sum of squares
  double condition = 1.0;  // of the column-scaled design matrix
  bool rank_deficient = false;
};
constexpr double kRankConditionLimit = 1e12;

LinearFit fit_coeffs_given_alpha(const ObservationSet& obs, double alpha);

struct RecoveryResult {
  double alpha_star = 0.0;
  std::vector<double> coefficients;
  double residual = 0.0;
  double warm_start_alpha = 0.0;
  int iterations = 0;
  bool failed = false;            // alpha* on the search boundary, or inconsistent signs with K = 1
  bool sign_inconsistent = false;  // warm start used |h|
  bool rank_deficient = false;
};

constexpr double kAlphaMin = 0.01;
constexpr double kAlphaMax = 1.99;

// Variable projection: golden-section on the projected residual, warm-started by a
// log-log regression. Throws NumericError if every sample is zero.
RecoveryResult recover_order(const ObservationSet& obs, int k_terms);

struct Window {
  double start, end;
};

struct GridRequest {
  std::string case_label;
  std::vector<double> alphas;
  std::vector<double> noise_levels;  // empty: {0}
  std::vector<Window> windows;
  std::vector<std::uint64_t> seeds;  // empty: {0}
  FitMode mode = FitMode::initial_condition;
  int n_terms = 1;
  int n_samples = 11;
  int workers = 1;
};

struct GridRow {
  std::string case_label;
  double alpha_true;
  Window window;
  double noise;
  std::uint64_t seed;
  RecoveryResult result;
};

// One forward solve per alpha (via `forward`), reused for every noise level, window and seed.
// Rows are ordered by (alpha, window, noise, seed) regardless of scheduling.
std::vector<GridRow> run_experiment_grid(const GridRequest& req, const std::function<FluxSeries(double)>& forward);

void write_results_csv(const std::vector<GridRow>& rows, std::ostream& os);
// One block per window: rows noise level, columns alpha; failed cells print "--".
// Multiple seeds are averaged.
void write_markdown_table(const std::vector<GridRow>& rows, std::ostream& os);

}  // namespace fracorder
