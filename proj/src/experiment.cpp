#include "fracorder/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace fracorder {

const SoeApprox& cached_soe(double beta, double delta, double horizon, double tol) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double, double>, std::unique_ptr<SoeApprox>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{beta, delta, horizon, tol}];
  if (!slot) slot = std::make_unique<SoeApprox>(build_soe(beta, delta, horizon, tol));
  return *slot;
}

namespace {

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%g", a);
  return buf;
}

FluxSeries forward_solve(const ProblemSpec& spec, double tol) {
  const double a = spec.alpha, tau = spec.grid.tau, T = spec.grid.horizon;
  if (a == 1.0) return step_classical(spec);
  if (a < 1.0) {
    auto [b, d] = soe_params_subdiffusion(a, tau);
    return step_subdiffusion(spec, cached_soe(b, d, T, tol));
  }
  auto [b, d] = soe_params_diffusion_wave(a, tau);
  return step_diffusion_wave(spec, cached_soe(b, d, T, tol));
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << s;
  if (!os) throw ConfigError("write failed for " + p.string());
}

}  // namespace

RunOutputs run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int workers, std::ostream* log) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  auto say = [&](const std::string& s) {
    if (log) *log << s << std::endl;
  };
  if (cfg.full_res) say("warning: full resolution (tau = 1e-4, T = 100) is slow at desk scale");

  RunOutputs out;
  out.config_hash = config_hash(cfg);
  out.alphas = cfg.alphas;

  const Mesh mesh = build_mesh(cfg);
  validate_against_mesh(cfg, mesh);
  auto sys = std::make_shared<const FemSystem>(assemble(mesh, build_coefficients(cfg), cfg.x0));
  say("mesh " + mesh.id + ": " + std::to_string(mesh.nodes.size()) + " nodes, " +
      std::to_string(mesh.elements.size()) + " elements");
  if (sys->q_min < 0.0) say("note: q takes negative values (min " + std::to_string(sys->q_min) + ")");

  std::vector<FluxSeries> series(cfg.alphas.size());
  std::mutex mu;
  auto forward = [&](double a) {
    const auto t0 = clock::now();
    FluxSeries f = forward_solve(build_problem(cfg, a, sys), cfg.soe_tol);
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    std::lock_guard<std::mutex> lock(mu);
    char buf[96];
    std::snprintf(buf, sizeof buf, "alpha=%g: %d steps in %.1f s", a, static_cast<int>(f.times.size()) - 1, secs);
    say(buf);
    for (std::size_t i = 0; i < cfg.alphas.size(); ++i)
      if (cfg.alphas[i] == a) series[i] = f;
    return f;
  };

  GridRequest req;
  req.case_label = cfg.case_label;
  req.alphas = cfg.alphas;
  req.noise_levels = cfg.noise;
  req.windows = cfg.windows;
  req.seeds = cfg.seeds;
  req.mode = cfg.mode;
  req.n_terms = cfg.K;
  req.n_samples = cfg.samples;
  req.workers = workers;
  out.rows = run_experiment_grid(req, forward);
  out.series = std::move(series);

  for (double a : cfg.alphas) {
    try {
      out.predictions.push_back(asymptote_prediction(*sys, build_problem(cfg, a, sys)));
    } catch (const std::invalid_argument&) {
      out.predictions.push_back(AsymptotePrediction{});  // all data zero
    }
  }

  if (out_dir.empty()) return out;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["case"] = cfg.case_label;
  manifest["preset"] = cfg.preset;
  manifest["config_hash"] = out.config_hash;
  manifest["mesh"] = {{"id", mesh.id}, {"nodes", mesh.nodes.size()}, {"elements", mesh.elements.size()}};
  auto artifacts = nlohmann::ordered_json::array();
  auto add = [&](const std::string& name, const std::string& kind, const std::string& text, double alpha) {
    write_text(dir / name, text);
    out.artifacts.push_back(name);
    nlohmann::ordered_json a{{"path", name}, {"kind", kind}};
    if (!std::isnan(alpha)) a["alpha"] = alpha;
    artifacts.push_back(a);
  };
  auto soe_list = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < cfg.alphas.size(); ++i) {
    const double a = cfg.alphas[i];
    const FluxSeries& f = out.series[i];
    const AsymptotePrediction& p = out.predictions[i];
    std::ostringstream meta;
    char buf[160];
    std::snprintf(buf, sizeof buf, "# case=%s\n# prediction_case=%s\n# prediction_coefficient=%.17g\n# prediction_exponent=%.17g\n",
                  cfg.case_label.c_str(), to_string(p.source_case).c_str(), p.leading_coefficient, p.exponent);
    meta << buf;
    std::ostringstream fl;
    fl << meta.str();
    const FluxSeries thin = thin_log(f, static_cast<std::size_t>(cfg.profile_rows));
    write_flux_csv(thin, fl);
    add("flux_" + alpha_tag(a) + ".csv", "flux", fl.str(), a);
    std::ostringstream pr;
    pr << "t,abs_flux\n";
    for (std::size_t k = 0; k < thin.times.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", thin.times[k], std::abs(thin.values[k]));
      pr << buf;
    }
    add("profile_" + alpha_tag(a) + ".csv", "profile", pr.str(), a);
    if (cfg.dense_csv) {
      std::ostringstream dn;
      dn << meta.str();
      write_flux_csv(f, dn);
      add("flux_dense_" + alpha_tag(a) + ".csv", "flux_dense", dn.str(), a);
    }
    if (a != 1.0) {
      auto [b, d] = a < 1.0 ? soe_params_subdiffusion(a, cfg.tau) : soe_params_diffusion_wave(a, cfg.tau);
      const SoeApprox& s = cached_soe(b, d, cfg.T, cfg.soe_tol);
      soe_list.push_back({{"alpha", a}, {"beta", s.beta}, {"delta", s.delta}, {"horizon", s.horizon}, {"tol", s.tol},
                          {"nodes", s.size()}, {"certified_error", s.certified_error}});
    }
  }
  std::ostringstream rc, md;
  write_results_csv(out.rows, rc);
  add("results.csv", "results", rc.str(), NAN);
  write_markdown_table(out.rows, md);
  add("table.md", "table", md.str(), NAN);
  manifest["soe"] = soe_list;
  manifest["artifacts"] = artifacts;
  manifest["config"] = canonical_config(cfg);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  out.artifacts.push_back("manifest.json");
  return out;
}

}  // namespace fracorder
