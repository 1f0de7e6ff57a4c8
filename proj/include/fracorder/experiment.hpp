#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fracorder/config.hpp"
#include "fracorder/inverse.hpp"
#include "fracorder/oracle.hpp"

namespace fracorder {

struct RunOutputs {
  std::string config_hash;
  std::vector<double> alphas;
  std::vector<FluxSeries> series;  // full resolution, one per alpha
  std::vector<AsymptotePrediction> predictions;
  std::vector<GridRow> rows;
  std::vector<std::string> artifacts;  // relative to out_dir
};

// Meshes and assembles once, runs one forward solve per alpha (SOE cached by
// (beta, delta, T, tol)), then the recovery grid. With a non-empty out_dir writes
// flux CSVs, |h| profiles, results.csv, table.md and manifest.json.
RunOutputs run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int workers = 1,
                          std::ostream* log = nullptr);

// Shared SOE cache (thread-safe).
const SoeApprox& cached_soe(double beta, double delta, double horizon, double tol);

}  // namespace fracorder
