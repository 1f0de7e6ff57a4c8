#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "fracorder/config.hpp"
#include "fracorder/experiment.hpp"
#include "fracorder/oracle.hpp"
#include "fracorder/special.hpp"

namespace py = pybind11;
using namespace fracorder;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

ExperimentConfig load(const std::string& config) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), config) != names.end()) return preset_config(config);
  return parse_config(config);
}

ExperimentConfig preset_with(const std::string& name, std::optional<double> tau, std::optional<double> T) {
  ExperimentConfig cfg = preset_config(name);
  if (tau) cfg.tau = *tau;
  if (T) cfg.T = *T;
  TimeGrid::from_horizon(cfg.tau, cfg.T);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-fractional diffusion: forward solver, asymptotics and order recovery";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  m.def("mlf", py::vectorize([](double alpha, double beta, double z) { return mlf({alpha, beta}, z); }),
        py::arg("alpha"), py::arg("beta"), py::arg("z"), "Mittag-Leffler function E_{alpha,beta}(z) for real z");
  m.def("gamma_recip", py::vectorize(gamma_recip), py::arg("x"), "1/Gamma(x), zero at the poles");

  py::class_<SoeApprox>(m, "Soe")
      .def_readonly("beta", &SoeApprox::beta)
      .def_readonly("delta", &SoeApprox::delta)
      .def_readonly("horizon", &SoeApprox::horizon)
      .def_readonly("tol", &SoeApprox::tol)
      .def_readonly("certified_error", &SoeApprox::certified_error)
      .def_property_readonly("nodes", [](const SoeApprox& a) { return to_array(a.nodes); })
      .def_property_readonly("weights", [](const SoeApprox& a) { return to_array(a.weights); })
      .def("__len__", &SoeApprox::size)
      .def("__call__",
           [](const SoeApprox& a, const py::array_t<double, py::array::c_style | py::array::forcecast>& t) {
             py::array_t<double> out(t.request().shape);
             for (py::ssize_t i = 0; i < t.size(); ++i) out.mutable_data()[i] = eval_soe(a, t.data()[i]);
             return out;
           })
      .def("sup_error", [](const SoeApprox& a, int n) { return soe_sup_error(a, n); }, py::arg("n_points") = 10000);
  m.def("build_soe", &build_soe, py::arg("beta"), py::arg("delta"), py::arg("horizon"), py::arg("tol"),
        py::call_guard<py::gil_scoped_release>(), "Certified sum-of-exponentials approximation of t^-beta");

  m.def("preset_names", &preset_names);
  m.def("preset_text", &preset_text, py::arg("name"));

  m.def(
      "simulate_preset",
      [](const std::string& name, double alpha, std::optional<double> tau, std::optional<double> T) {
        ExperimentConfig cfg = preset_with(name, tau, T);
        FluxSeries f;
        {
          py::gil_scoped_release nogil;
          auto sys = std::make_shared<const FemSystem>(assemble(build_mesh(cfg), build_coefficients(cfg), cfg.x0));
          f = simulate(build_problem(cfg, alpha, sys), cfg.soe_tol);
        }
        return py::make_tuple(to_array(f.times), to_array(f.values));
      },
      py::arg("name"), py::arg("alpha"), py::arg("tau") = py::none(), py::arg("T") = py::none(),
      "Boundary flux of a preset problem; returns (t, h)");

  m.def(
      "asymptote",
      [](const std::string& name, double alpha, std::optional<double> tau, std::optional<double> T) {
        ExperimentConfig cfg = preset_with(name, tau, T);
        auto sys = std::make_shared<const FemSystem>(assemble(build_mesh(cfg), build_coefficients(cfg), cfg.x0));
        AsymptotePrediction p = asymptote_prediction(*sys, build_problem(cfg, alpha, sys));
        py::dict d;
        d["coefficient"] = p.leading_coefficient;
        d["exponent"] = p.exponent;
        d["case"] = to_string(p.source_case);
        d["elliptic_flux"] = p.elliptic_flux;
        return d;
      },
      py::arg("name"), py::arg("alpha"), py::arg("tau") = py::none(), py::arg("T") = py::none(),
      "Leading large-time term h(t) ~ coefficient * t^-exponent");

  m.def(
      "add_noise",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& h, double eps, std::uint64_t seed) {
        FluxSeries f;
        f.values = to_vector(h);
        f.times.resize(f.values.size());
        return to_array(add_noise(f, eps, seed).values);
      },
      py::arg("h"), py::arg("epsilon"), py::arg("seed"), "h * (1 + epsilon * xi), xi standard normal");

  py::class_<RecoveryResult>(m, "FitResult")
      .def_readonly("alpha", &RecoveryResult::alpha_star)
      .def_readonly("coefficients", &RecoveryResult::coefficients)
      .def_readonly("residual", &RecoveryResult::residual)
      .def_readonly("warm_start", &RecoveryResult::warm_start_alpha)
      .def_readonly("iterations", &RecoveryResult::iterations)
      .def_readonly("failed", &RecoveryResult::failed)
      .def_readonly("sign_inconsistent", &RecoveryResult::sign_inconsistent)
      .def_readonly("rank_deficient", &RecoveryResult::rank_deficient)
      .def("__repr__", [](const RecoveryResult& r) {
        return "FitResult(alpha=" + std::to_string(r.alpha_star) + ", failed=" + (r.failed ? "True" : "False") + ")";
      });

  m.def(
      "recover_order",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& h, const std::string& mode, int k) {
        ObservationSet o;
        o.t = to_vector(t);
        o.h = to_vector(h);
        if (o.t.size() != o.h.size()) throw std::invalid_argument("t and h differ in length");
        if (!o.t.empty()) o.window_start = o.t.front(), o.window_end = o.t.back();
        o.mode = parse_fit_mode(mode);
        o.n_terms = k;
        return recover_order(o, k);
      },
      py::arg("t"), py::arg("h"), py::arg("mode") = "initial_condition", py::arg("k") = 1,
      "Least-squares fit of h ~ sum_k c_k t^-alpha_k");

  m.def(
      "run",
      [](const std::string& config, const std::string& out_dir, int workers) {
        ExperimentConfig cfg = load(config);
        RunOutputs r;
        {
          py::gil_scoped_release nogil;
          r = run_experiment(cfg, out_dir, workers);
        }
        py::list rows;
        for (const GridRow& g : r.rows) {
          py::dict d;
          d["case"] = g.case_label;
          d["alpha_true"] = g.alpha_true;
          d["window"] = py::make_tuple(g.window.start, g.window.end);
          d["noise"] = g.noise;
          d["seed"] = g.seed;
          d["alpha_rec"] = g.result.alpha_star;
          d["residual"] = g.result.residual;
          d["failed"] = g.result.failed;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("out_dir") = "", py::arg("workers") = 1,
      "Run a preset name or config file; returns the recovery rows");
}
