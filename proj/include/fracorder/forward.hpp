#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fracorder/fem.hpp"
#include "fracorder/soe.hpp"

namespace fracorder {

using SpaceTimeField = std::function<double(const Point&, double)>;

struct TimeGrid {
  double tau = 1e-3;
  int n_steps = 0;
  double horizon = 0.0;

  // n_steps = round(T / tau); throws ConfigError unless T is an integer multiple of tau.
  static TimeGrid from_horizon(double tau, double horizon);
  double t(int n) const { return n * tau; }
};

// Dirichlet data g(x, t), applied on nodes whose marker is listed (empty list: every
// outer-boundary node). Obstacle nodes and unlisted boundary nodes stay at 0.
struct DirichletData {
  SpaceTimeField g;
  std::vector<int> markers;
};

struct ProblemSpec {
  double alpha = 0.5;
  std::shared_ptr<const FemSystem> sys;
  Vec u0;                             // nodal values; empty means zero
  SpaceTimeField source;              // F(x, t); empty means zero
  std::optional<DirichletData> dirichlet;
  double source_cutoff = std::numeric_limits<double>::infinity();  // F and g vanish for t >= cutoff
  TimeGrid grid;
};

struct FluxSeries {
  std::vector<double> times;
  std::vector<double> values;
  double alpha = 0.0;
  double tau = 0.0;
  std::string mesh_id;
  double noise = 0.0;
  long long seed = -1;  // -1: exact data
};

// Dirichlet DOFs that receive g (the rest of the Dirichlet DOFs are held at 0).
std::vector<int> dirichlet_data_dofs(const ProblemSpec& spec);

// Called after every step with the full nodal vector (n = 0 is the initial state).
using StepObserver = std::function<void(int n, double t, const Vec& u)>;

struct StepOptions {
  StepObserver observer;
  // Replace the SOE history by the exact O(n) convolution of the same interpolants.
  // Reference mode for testing; cost grows quadratically with the step count.
  bool exact_history = false;
};

FluxSeries step_subdiffusion(const ProblemSpec& spec, const SoeApprox& soe, const StepOptions& opt = {});
FluxSeries step_diffusion_wave(const ProblemSpec& spec, const SoeApprox& soe, const StepOptions& opt = {});
FluxSeries step_classical(const ProblemSpec& spec, const StepOptions& opt = {});

// Dispatches on alpha; builds the matching SOE when alpha != 1.
FluxSeries simulate(const ProblemSpec& spec, double soe_tol, const StepOptions& opt = {});

// SOE parameters each scheme expects: (beta, delta).
std::pair<double, double> soe_params_subdiffusion(double alpha, double tau);
std::pair<double, double> soe_params_diffusion_wave(double alpha, double tau);

// History weights for one SOE node. Closed forms for s*tau >= 1e-3, Taylor below.
struct HistoryWeights {
  double w1, w2;  // subdiffusion recursion weights
  double phi_a;   // 2 (1 - e^{-x/2}) / x
  double phi_b;   // (1 - e^{-x}) / x
};
constexpr double kTaylorThreshold = 1e-3;
HistoryWeights taylor_safe_weights(double s, double tau);
HistoryWeights exact_weights(double s, double tau);   // closed forms only
HistoryWeights series_weights(double s, double tau);  // Taylor polynomials only

// CSV "t,flux" with '#' metadata lines.
void write_flux_csv(const FluxSeries& f, std::ostream& os);
FluxSeries read_flux_csv(std::istream& is);
// At most max_rows samples, thinned uniformly in log t; keeps t = 0 out.
FluxSeries thin_log(const FluxSeries& f, std::size_t max_rows);

}  // namespace fracorder
