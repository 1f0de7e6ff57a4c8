#include "fracorder/forward.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fracorder/errors.hpp"
#include "fracorder/special.hpp"

namespace fracorder {

TimeGrid TimeGrid::from_horizon(double tau, double horizon) {
  if (!(tau > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon))
    throw ConfigError("time grid: need tau > 0 and T > 0");
  const double r = horizon / tau;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw ConfigError("time grid: T must be an integer multiple of tau");
  if (n > 2e9) throw ConfigError("time grid: too many steps");
  return TimeGrid{tau, static_cast<int>(n), horizon};
}

std::pair<double, double> soe_params_subdiffusion(double alpha, double tau) { return {1.0 + alpha, tau}; }
std::pair<double, double> soe_params_diffusion_wave(double alpha, double tau) { return {alpha - 1.0, 0.5 * tau}; }

HistoryWeights exact_weights(double s, double tau) {
  const double x = s * tau, e = std::exp(-x);
  const double em1 = -std::expm1(-x);  // 1 - e^{-x}
  HistoryWeights w;
  w.w1 = e * tau * (x - em1) / (x * x);
  w.w2 = e * tau * (em1 - x * e) / (x * x);
  w.phi_a = -2.0 * std::expm1(-0.5 * x) / x;
  w.phi_b = em1 / x;
  return w;
}

HistoryWeights series_weights(double s, double tau) {
  const double x = s * tau, e = std::exp(-x);
  HistoryWeights w;
  w.w1 = e * tau * (0.5 - x / 6.0 + x * x / 24.0);
  w.w2 = e * tau * (0.5 - x / 3.0 + x * x / 8.0);
  w.phi_a = 1.0 - x / 4.0 + x * x / 24.0;
  w.phi_b = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
  return w;
}

HistoryWeights taylor_safe_weights(double s, double tau) {
  if (!(s > 0.0) || !(tau > 0.0)) throw std::invalid_argument("taylor_safe_weights: need s > 0, tau > 0");
  return s * tau < kTaylorThreshold ? series_weights(s, tau) : exact_weights(s, tau);
}

std::vector<int> dirichlet_data_dofs(const ProblemSpec& spec) {
  std::vector<int> out;
  if (!spec.sys || !spec.dirichlet || !spec.dirichlet->g) return out;
  const Mesh& m = *spec.sys->mesh;
  const auto& ms = spec.dirichlet->markers;
  for (int k : spec.sys->dirichlet_dofs) {
    const int mk = m.markers[k];
    if (mk == marker::obstacle) continue;
    if (ms.empty() ? is_outer_marker(mk) : std::find(ms.begin(), ms.end(), mk) != ms.end()) out.push_back(k);
  }
  return out;
}

namespace {

// Shared per-run data: boundary values, load vectors, flux recording.
class Driver {
 public:
  Driver(const ProblemSpec& spec, const char* who) : spec_(spec) {
    if (!spec.sys) throw std::invalid_argument(std::string(who) + ": missing FemSystem");
    if (spec.grid.n_steps < 1 || !(spec.grid.tau > 0.0)) throw std::invalid_argument(std::string(who) + ": bad time grid");
    sys_ = spec.sys.get();
    const int n = sys_->n_dofs();
    if (spec.u0.size() != 0 && spec.u0.size() != n) throw std::invalid_argument(std::string(who) + ": u0 has wrong length");
    const Mesh& m = *sys_->mesh;
    g_dofs_ = dirichlet_data_dofs(spec);
    series_.alpha = spec.alpha;
    series_.tau = spec.grid.tau;
    series_.mesh_id = m.id;
    series_.times.reserve(spec.grid.n_steps + 1);
    series_.values.reserve(spec.grid.n_steps + 1);
  }

  const FemSystem& sys() const { return *sys_; }
  int n() const { return sys_->n_dofs(); }

  // The u0 interpolant everywhere, Dirichlet nodes included. Writing g(0) there instead
  // leaves a net jump in the boundary history and a spurious t^-alpha tail.
  Vec initial() const { return spec_.u0.size() ? spec_.u0 : Vec::Zero(n()); }

  // Data at t_n > 0 are sampled just before t_n: a step covers (t_{n-1}, t_n], so a
  // switch-off on a grid point (chi is half-open) acts from the following step.
  double left_limit(double t) const { return t > 0.0 ? t - 1e-6 * spec_.grid.tau : t; }

  // Dirichlet entries of u set to g(t) (0 off the listed segments).
  void set_boundary(Vec& u, double t) const {
    for (int k : sys_->dirichlet_dofs) u[k] = 0.0;
    t = left_limit(t);
    if (g_dofs_.empty() || !(t < spec_.source_cutoff)) return;
    const Mesh& m = *sys_->mesh;
    for (int k : g_dofs_) u[k] = spec_.dirichlet->g(m.nodes[k], t);
  }

  // M F(., t), or zero past the cutoff.
  Vec load(double t) const {
    t = left_limit(t);
    if (!spec_.source || !(t < spec_.source_cutoff)) return Vec::Zero(n());
    const Mesh& m = *sys_->mesh;
    Vec f(n());
    for (int i = 0; i < n(); ++i) f[i] = spec_.source(m.nodes[i], t);
    return sys_->mass * f;
  }

  void record(int step, const Vec& u, const StepOptions& opt) {
    const double t = spec_.grid.t(step);
    series_.times.push_back(t);
    const double h = boundary_flux(*sys_, u);
    if (!std::isfinite(h)) throw NumericError("stepper: non-finite flux at t=" + std::to_string(t));
    series_.values.push_back(h);
    if (opt.observer) opt.observer(step, t, u);
  }

  FluxSeries take() { return std::move(series_); }

 private:
  const ProblemSpec& spec_;
  const FemSystem* sys_;
  std::vector<int> g_dofs_;
  FluxSeries series_;
};

void check_soe(const SoeApprox& soe, double beta, double delta, double horizon, const char* who) {
  if (std::abs(soe.beta - beta) > 1e-12 || soe.delta > delta * (1.0 + 1e-12) || soe.horizon < horizon * (1.0 - 1e-12))
    throw std::invalid_argument(std::string(who) + ": SOE mismatch (need beta=" + std::to_string(beta) +
                                ", delta<=" + std::to_string(delta) + ", horizon>=" + std::to_string(horizon) + ")");
}

}  // namespace

FluxSeries step_subdiffusion(const ProblemSpec& spec, const SoeApprox& soe, const StepOptions& opt) {
  const double a = spec.alpha;
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("step_subdiffusion: alpha must lie in (0, 1)");
  Driver d(spec, "step_subdiffusion");
  const double tau = spec.grid.tau;
  const int N = spec.grid.n_steps;
  if (!opt.exact_history) check_soe(soe, 1.0 + a, tau, spec.grid.horizon, "step_subdiffusion");

  const FemSystem& sys = d.sys();
  const double ct = std::tgamma(2.0 - a) * std::pow(tau, a);
  const SpMat K = sys.mass_rho + ct * sys.stiffness;
  DirichletSolver solver(sys, K);

  const int ne = static_cast<int>(soe.size());
  std::vector<double> decay(ne), w1(ne), w2(ne);
  for (int i = 0; i < ne; ++i) {
    HistoryWeights w = taylor_safe_weights(soe.nodes[i], tau);
    decay[i] = std::exp(-soe.nodes[i] * tau);
    w1[i] = w.w1;
    w2[i] = w.w2;
  }
  Eigen::MatrixXd hist = opt.exact_history ? Eigen::MatrixXd() : Eigen::MatrixXd::Zero(d.n(), ne);
  std::vector<Vec> all;  // exact_history only

  const Vec u0 = d.initial();
  d.record(0, u0, opt);
  Vec um2 = u0, um1(d.n());
  {
    Vec rhs = sys.mass_rho * u0 + ct * (d.load(tau) + 0.5 * d.load(0.0) - 0.5 * (sys.stiffness * u0));
    d.set_boundary(um1, tau);
    solver.solve(rhs, um1);
    d.record(1, um1, opt);
  }
  if (opt.exact_history) all = {u0, um1};

  Vec hsum(d.n()), u(d.n());
  for (int n = 2; n <= N; ++n) {
    const double tn = spec.grid.t(n);
    hsum.setZero();
    if (opt.exact_history) {
      // sum_k int_{t_{k-1}}^{t_k} (t_n - s)^{-1-a} u_lin(s) ds
      for (int k = 1; k <= n - 1; ++k) {
        const double lo = (n - k) * tau, hi = lo + tau;
        const double i0 = (std::pow(lo, -a) - std::pow(hi, -a)) / a;
        const double i1 = (std::pow(hi, 1.0 - a) - std::pow(lo, 1.0 - a)) / (1.0 - a);
        hsum += ((i1 - lo * i0) / tau) * all[k - 1] + ((hi * i0 - i1) / tau) * all[k];
      }
    } else {
      for (int i = 0; i < ne; ++i) {
        hist.col(i) = decay[i] * hist.col(i) + w1[i] * um1 + w2[i] * um2;
        hsum += soe.weights[i] * hist.col(i);
      }
    }
    Vec rhs = sys.mass_rho * (a * um1 + (1.0 - a) * (std::pow(n, -a) * u0 + a * std::pow(tau, a) * hsum)) + ct * d.load(tn);
    d.set_boundary(u, tn);
    solver.solve(rhs, u);
    d.record(n, u, opt);
    if (opt.exact_history) all.push_back(u);
    std::swap(um2, um1);
    std::swap(um1, u);
  }
  return d.take();
}

FluxSeries step_diffusion_wave(const ProblemSpec& spec, const SoeApprox& soe, const StepOptions& opt) {
  const double a = spec.alpha;
  if (!(a > 1.0 && a < 2.0)) throw std::invalid_argument("step_diffusion_wave: alpha must lie in (1, 2)");
  Driver d(spec, "step_diffusion_wave");
  const double tau = spec.grid.tau;
  const int N = spec.grid.n_steps;
  if (!opt.exact_history) check_soe(soe, a - 1.0, 0.5 * tau, spec.grid.horizon, "step_diffusion_wave");

  const FemSystem& sys = d.sys();
  const double cp = std::tgamma(3.0 - a), ta = std::pow(tau, a);
  const double c1 = cp / std::pow(2.0, a) * ta;  // first step
  const double c2 = 0.5 * cp * ta;               // general step
  DirichletSolver solver1(sys, SpMat(sys.mass_rho + c1 * sys.stiffness));
  DirichletSolver solver(sys, SpMat(sys.mass_rho + c2 * sys.stiffness));

  const int ne = static_cast<int>(soe.size());
  std::vector<double> decay(ne), fa(ne), fb(ne);
  for (int i = 0; i < ne; ++i) {
    HistoryWeights w = taylor_safe_weights(soe.nodes[i], tau);
    decay[i] = std::exp(-soe.nodes[i] * tau);
    fa[i] = decay[i] * w.phi_a;
    fb[i] = decay[i] * tau * w.phi_b;
  }
  Eigen::MatrixXd hist = opt.exact_history ? Eigen::MatrixXd() : Eigen::MatrixXd::Zero(d.n(), ne);
  std::vector<Vec> d2;  // exact_history: second differences delta_t^2 u^k, k >= 1

  const Vec u0 = d.initial();  // u'(0) = 0
  d.record(0, u0, opt);
  Vec um2 = u0, um1(d.n());
  {
    Vec rhs = sys.mass_rho * u0 - c1 * (sys.stiffness * u0) + 2.0 * c1 * d.load(0.5 * tau);
    d.set_boundary(um1, tau);
    solver1.solve(rhs, um1);
    d.record(1, um1, opt);
  }
  const Vec dt_half = (um1 - u0) / tau;  // delta_t u^{1/2} - u'(0)
  auto J = [a](double lo, double hi) { return (std::pow(hi, 2.0 - a) - std::pow(lo, 2.0 - a)) / (2.0 - a); };

  Vec hsum(d.n()), u(d.n()), um3(d.n());
  for (int n = 2; n <= N; ++n) {
    const double tmid = (n - 0.5) * tau;
    hsum.setZero();
    if (opt.exact_history) {
      hsum += (2.0 / tau * J(tmid - 0.5 * tau, tmid)) * dt_half;
      if (n >= 3) d2.push_back((um1 - 2.0 * um2 + um3) / (tau * tau));
      for (int k = 1; k <= n - 2; ++k) hsum += J(tmid - (k + 0.5) * tau, tmid - (k - 0.5) * tau) * d2[k - 1];
    } else if (n == 2) {
      for (int i = 0; i < ne; ++i) {
        hist.col(i) = fa[i] * dt_half;
        hsum += soe.weights[i] * hist.col(i);
      }
    } else {
      const Vec dd = (um1 - 2.0 * um2 + um3) / (tau * tau);
      for (int i = 0; i < ne; ++i) {
        hist.col(i) = decay[i] * hist.col(i) + fb[i] * dd;
        hsum += soe.weights[i] * hist.col(i);
      }
    }
    Vec rhs = sys.mass_rho * (2.0 * um1 - um2 - (2.0 - a) * ta * hsum) - c2 * (sys.stiffness * um1) +
              cp * ta * d.load(tmid);
    d.set_boundary(u, n * tau);
    solver.solve(rhs, u);
    d.record(n, u, opt);
    std::swap(um3, um2);
    std::swap(um2, um1);
    std::swap(um1, u);
  }
  return d.take();
}

FluxSeries step_classical(const ProblemSpec& spec, const StepOptions& opt) {
  Driver d(spec, "step_classical");
  const double tau = spec.grid.tau;
  const FemSystem& sys = d.sys();
  DirichletSolver solver(sys, SpMat(sys.mass_rho + tau * sys.stiffness));
  Vec um1 = d.initial(), u(d.n());
  d.record(0, um1, opt);
  for (int n = 1; n <= spec.grid.n_steps; ++n) {
    const double tn = spec.grid.t(n);
    Vec rhs = sys.mass_rho * um1 + tau * d.load(tn);
    d.set_boundary(u, tn);
    solver.solve(rhs, u);
    d.record(n, u, opt);
    std::swap(um1, u);
  }
  return d.take();
}

FluxSeries simulate(const ProblemSpec& spec, double soe_tol, const StepOptions& opt) {
  const double a = spec.alpha, tau = spec.grid.tau, T = spec.grid.horizon;
  if (a == 1.0) return step_classical(spec, opt);
  if (a > 0.0 && a < 1.0) {
    auto [b, dl] = soe_params_subdiffusion(a, tau);
    return step_subdiffusion(spec, build_soe(b, dl, T, soe_tol), opt);
  }
  if (a > 1.0 && a < 2.0) {
    auto [b, dl] = soe_params_diffusion_wave(a, tau);
    return step_diffusion_wave(spec, build_soe(b, dl, T, soe_tol), opt);
  }
  throw std::invalid_argument("simulate: alpha must lie in (0, 2)");
}

void write_flux_csv(const FluxSeries& f, std::ostream& os) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# alpha=%.17g\n# tau=%.17g\n", f.alpha, f.tau);
  os << buf << "# mesh=" << f.mesh_id << '\n';
  if (f.seed >= 0) {
    std::snprintf(buf, sizeof buf, "# noise=%.17g\n# seed=%lld\n", f.noise, f.seed);
    os << buf;
  }
  os << "t,flux\n";
  for (std::size_t i = 0; i < f.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.times[i], f.values[i]);
    os << buf;
  }
}

FluxSeries read_flux_csv(std::istream& is) {
  FluxSeries f;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string k = line.substr(1, eq - 1), v = line.substr(eq + 1);
      k.erase(0, k.find_first_not_of(' '));
      try {
        if (k == "alpha") f.alpha = std::stod(v);
        else if (k == "tau") f.tau = std::stod(v);
        else if (k == "mesh") f.mesh_id = v;
        else if (k == "noise") f.noise = std::stod(v);
        else if (k == "seed") f.seed = std::stoll(v);
      } catch (const std::exception&) {
        throw ParseError("flux csv: bad metadata value for '" + k + "'", lineno);
      }
      continue;
    }
    if (!header) {
      if (line != "t,flux") throw ParseError("flux csv: expected header 't,flux'", lineno);
      header = true;
      continue;
    }
    double t, h;
    char comma;
    std::istringstream ss(line);
    if (!(ss >> t >> comma >> h) || comma != ',') throw ParseError("flux csv: expected 't,flux' row", lineno);
    if (!f.times.empty() && !(t > f.times.back())) throw ParseError("flux csv: times not increasing", lineno);
    f.times.push_back(t);
    f.values.push_back(h);
  }
  if (!header) throw ParseError("flux csv: missing header", lineno);
  return f;
}

FluxSeries thin_log(const FluxSeries& f, std::size_t max_rows) {
  FluxSeries out = f;
  out.times.clear();
  out.values.clear();
  std::size_t first = 0;
  while (first < f.times.size() && !(f.times[first] > 0.0)) ++first;
  const std::size_t n = f.times.size() - first;
  if (n <= max_rows) {
    out.times.assign(f.times.begin() + first, f.times.end());
    out.values.assign(f.values.begin() + first, f.values.end());
    return out;
  }
  if (max_rows < 2) throw std::invalid_argument("thin_log: max_rows must be >= 2");
  const double la = std::log(f.times[first]), lb = std::log(f.times.back());
  std::size_t last = static_cast<std::size_t>(-1);
  for (std::size_t j = 0; j < max_rows; ++j) {
    const double target = std::exp(la + (lb - la) * j / (max_rows - 1));
    auto it = std::lower_bound(f.times.begin() + first, f.times.end(), target);
    std::size_t i = std::min<std::size_t>(it - f.times.begin(), f.times.size() - 1);
    if (i > first && target - f.times[i - 1] < f.times[i] - target) --i;
    if (i == last) continue;
    last = i;
    out.times.push_back(f.times[i]);
    out.values.push_back(f.values[i]);
  }
  return out;
}

}  // namespace fracorder
