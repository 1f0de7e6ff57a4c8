#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "fracorder/experiment.hpp"

using namespace fracorder;

namespace {

int run_cmd(const std::string& config, const std::string& preset, const std::string& out, int workers, bool full_res) {
  ExperimentConfig cfg;
  if (!config.empty()) {
    cfg = parse_config(config);
    if (!preset.empty() && preset != cfg.preset)
      throw ConfigError("--preset " + preset + " conflicts with the config file (use 'preset =' inside it)");
  } else if (!preset.empty()) {
    cfg = preset_config(preset);
  } else {
    throw ConfigError("run: give a config file or --preset NAME");
  }
  if (full_res) apply_full_resolution(cfg);
  RunOutputs r = run_experiment(cfg, out, workers, &std::cerr);
  std::cerr << "config hash " << r.config_hash << ", " << r.artifacts.size() << " artifacts in " << out << "\n";
  return 0;
}

int soe_cmd(double beta, double delta, double horizon, double tol, const std::string& out) {
  SoeApprox a;
  try {
    a = build_soe(beta, delta, horizon, tol);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot write " + out);
  write_soe(a, os);
  std::printf("nodes=%zu certified_error=%.3e\n", a.size(), a.certified_error);
  return 0;
}

int fit_cmd(const std::string& path, const std::string& mode, const std::vector<double>& window, int k, int samples,
            double noise, std::uint64_t seed) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  FluxSeries f = read_flux_csv(is);
  if (window.size() != 2) throw ConfigError("--window expects A,B");
  if (noise > 0.0) f = add_noise(f, noise, seed);
  ObservationSet obs;
  try {
    obs = sample_window(f, window[0], window[1], samples, parse_fit_mode(mode), k);
  } catch (const std::out_of_range& e) {
    throw ConfigError(e.what());
  }
  RecoveryResult r = recover_order(obs, k);
  std::printf("alpha_rec=%.6f\nresidual=%.6e\nwarm_start=%.6f\niterations=%d\nfailed=%d\n", r.alpha_star, r.residual,
              r.warm_start_alpha, r.iterations, r.failed ? 1 : 0);
  for (std::size_t i = 0; i < r.coefficients.size(); ++i) std::printf("c%zu=%.10g\n", i + 1, r.coefficients[i]);
  if (r.rank_deficient) std::fprintf(stderr, "warning: design matrix is nearly rank deficient\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-fractional diffusion forward solver and order recovery"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a config file or preset");
  std::string config, preset, out = "out";
  int workers = 1;
  bool full_res = false;
  run->add_option("config", config, "Config file");
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--preset", preset, "Built-in preset (ex4.1i ... ex4.3iii)");
  run->add_option("--workers", workers, "Parallel forward solves")->check(CLI::PositiveNumber);
  run->add_flag("--full-res", full_res, "tau = 1e-4, T = 100");

  auto* soe = app.add_subcommand("soe", "Build and certify a sum-of-exponentials kernel");
  double beta = 0, delta = 0, horizon = 0, tol = 0;
  std::string soe_out;
  soe->add_option("--beta", beta)->required();
  soe->add_option("--delta", delta)->required();
  soe->add_option("--horizon", horizon)->required();
  soe->add_option("--tol", tol)->required();
  soe->add_option("--out", soe_out)->required();

  auto* fit = app.add_subcommand("fit", "Recover the order from a flux CSV");
  std::string flux, mode = "initial_condition";
  std::vector<double> window;
  int k = 1, samples = 11;
  double noise = 0.0;
  std::uint64_t seed = 0;
  fit->add_option("flux", flux, "Flux CSV (t,flux)")->required();
  fit->add_option("--mode", mode, "initial_condition or zero_initial");
  fit->add_option("--window", window, "A,B")->delimiter(',')->required();
  fit->add_option("--k", k, "Number of terms")->check(CLI::Range(1, 3));
  fit->add_option("--samples", samples, "Samples in the window")->check(CLI::Range(2, 100000));
  fit->add_option("--noise", noise, "Relative noise level");
  fit->add_option("--seed", seed, "Noise seed");

  auto* list = app.add_subcommand("presets", "List presets, or print one");
  std::string show;
  list->add_option("name", show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (*run) return run_cmd(config, preset, out, workers, full_res);
    if (*soe) return soe_cmd(beta, delta, horizon, tol, soe_out);
    if (*fit) return fit_cmd(flux, mode, window, k, samples, noise, seed);
    if (*list) {
      if (show.empty())
        for (const auto& n : preset_names()) std::cout << n << "\n";
      else
        std::cout << preset_text(show);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
