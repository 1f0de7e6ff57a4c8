#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracorder/expression.hpp"
#include "fracorder/forward.hpp"
#include "fracorder/inverse.hpp"

namespace fracorder {

enum class DomainType { interval, square, mesh_file };

struct ExperimentConfig {
  std::string case_label;
  std::string preset;  // name of the preset the file started from, if any
  // [domain]
  DomainType domain = DomainType::interval;
  int cells = 200;       // interval
  int n_per_side = 64;   // square
  std::string mesh;      // mesh file, resolved at load time
  Point x0{0.0, 0.0};
  // [coefficients]
  Expression a, q, rho;
  // [data]
  Expression u0, F, g;
  std::vector<int> g_markers;  // empty: every outer-boundary node
  double cutoff = std::numeric_limits<double>::infinity();
  // [time]
  std::vector<double> alphas;
  double tau = 1e-3;
  double T = 100.0;
  double soe_tol = 1e-9;
  bool full_res = false;
  // [recovery]
  FitMode mode = FitMode::initial_condition;
  int K = 1;
  int samples = 11;
  std::vector<Window> windows;
  std::vector<double> noise;
  std::vector<std::uint64_t> seeds;
  // [output]
  bool dense_csv = false;
  int profile_rows = 10000;

  std::string base_dir;  // directory of the config file, for relative mesh paths
};

// Sections [domain] [coefficients] [data] [time] [recovery] [output] with "key = value"
// lines; top-level keys "case" and "preset". A preset supplies defaults that the file
// overrides. Errors are ConfigError/ParseError naming the key path.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");

std::vector<std::string> preset_names();
const std::string& preset_text(const std::string& name);  // throws ConfigError for unknown names
ExperimentConfig preset_config(const std::string& name);

// Applies the paper-resolution switch (tau = 1e-4, T = 100).
void apply_full_resolution(ExperimentConfig& cfg);

// Checks that need the mesh (x0 on the outer boundary, finite fields, vanishing data past
// the cutoff). Called by the run driver after meshing.
void validate_against_mesh(const ExperimentConfig& cfg, const Mesh& mesh);

// Canonical text of all semantically meaningful fields, and its FNV-1a hash.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Mesh lookup order for relative paths: the config directory, the built-in data
// directory, then $FRACORDER_DATA.
std::string resolve_data_path(const std::string& name, const std::string& base_dir);
Mesh build_mesh(const ExperimentConfig& cfg);
Coefficients build_coefficients(const ExperimentConfig& cfg);
// ProblemSpec for one alpha on an assembled system.
ProblemSpec build_problem(const ExperimentConfig& cfg, double alpha, std::shared_ptr<const FemSystem> sys);

}  // namespace fracorder
