#include "fracorder/soe.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fracorder/errors.hpp"
#include "fracorder/quadrature.hpp"
#include "fracorder/special.hpp"

namespace fracorder {

namespace {

constexpr int kProbes = 256;
constexpr int kMaxOrder = 160;

// A panel of the integral t^{-beta} = (1/Gamma(beta)) int_0^inf e^{-st} s^{beta-1} ds.
struct Panel {
  double lo, hi;
  bool jacobi;  // [0, hi] with the s^{beta-1} weight built into the rule
};

void panel_rule(const Panel& p, double beta, int m, std::vector<double>& s, std::vector<double>& w) {
  const double g = gamma_recip(beta);
  s.resize(m);
  w.resize(m);
  if (p.jacobi) {
    QuadRule q = gauss_jacobi01(m, beta);
    const double scale = std::pow(p.hi, beta) * g;
    for (int k = 0; k < m; ++k) {
      s[k] = p.hi * q.nodes[k];
      w[k] = q.weights[k] * scale;
    }
  } else {
    QuadRule q = gauss_legendre(m);
    const double mid = 0.5 * (p.lo + p.hi), half = 0.5 * (p.hi - p.lo);
    for (int k = 0; k < m; ++k) {
      s[k] = mid + half * q.nodes[k];
      w[k] = half * q.weights[k] * std::pow(s[k], beta - 1.0) * g;
    }
  }
}

long double sum_exp(const std::vector<double>& s, const std::vector<double>& w, double t) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < s.size(); ++k) acc += static_cast<long double>(w[k]) * std::exp(-static_cast<long double>(s[k]) * t);
  return acc;
}

std::vector<double> log_grid(double a, double b, int n) {
  std::vector<double> t(n);
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i) t[i] = std::exp(la + (lb - la) * i / (n - 1));
  t.front() = a;
  t.back() = b;
  return t;
}

}  // namespace

SoeApprox build_soe(double beta, double delta, double horizon, double tol) {
  if (!(beta > 0.0 && beta < 2.0)) throw std::invalid_argument("build_soe: beta must lie in (0, 2)");
  if (!(delta > 0.0 && delta < horizon && std::isfinite(horizon)))
    throw std::invalid_argument("build_soe: need 0 < delta < horizon");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("build_soe: tol must lie in (0, 1)");

  // lower panel [0, 2^j0] with 2^j0 * horizon <= 1
  const int j0 = static_cast<int>(std::floor(std::log2(1.0 / horizon)));
  // upper cut: tail of the integral at t = delta below tol/4
  int jmax = j0 + 1;
  while (std::pow(delta, -beta) * boost::math::gamma_q(beta, std::ldexp(1.0, jmax) * delta) > 0.25 * tol) ++jmax;

  std::vector<Panel> panels{{0.0, std::ldexp(1.0, j0), true}};
  for (int j = j0; j < jmax; ++j) panels.push_back({std::ldexp(1.0, j), std::ldexp(1.0, j + 1), false});

  const std::vector<double> probes = log_grid(delta, horizon, kProbes);
  double target = 0.25 * tol;
  std::vector<double> s1, w1, s2, w2;
  for (int attempt = 0; attempt < 8; ++attempt, target *= 0.25) {
    SoeApprox a;
    a.beta = beta;
    a.delta = delta;
    a.horizon = horizon;
    a.tol = tol;
    for (const Panel& p : panels) {
      int m = 4;
      for (;; m += 2) {
        if (m + 2 > kMaxOrder) throw NumericError("build_soe: panel quadrature order limit reached");
        panel_rule(p, beta, m, s1, w1);
        panel_rule(p, beta, m + 2, s2, w2);
        long double err = 0.0L;
        for (double t : probes) err = std::max(err, std::abs(sum_exp(s1, w1, t) - sum_exp(s2, w2, t)));
        if (err <= target) break;
      }
      a.nodes.insert(a.nodes.end(), s2.begin(), s2.end());
      a.weights.insert(a.weights.end(), w2.begin(), w2.end());
    }
    a.certified_error = soe_sup_error(a, 10000);
    if (a.certified_error <= tol) return a;
  }
  throw NumericError("build_soe: verification failed after maximum refinement");
}

double eval_soe(const SoeApprox& a, double t) {
  if (!(t >= 0.5 * a.delta && t <= 2.0 * a.horizon))
    throw std::out_of_range("eval_soe: t outside [delta/2, 2T]");
  return static_cast<double>(sum_exp(a.nodes, a.weights, t));
}

double soe_sup_error(const SoeApprox& a, int n_points) {
  double e = 0.0;
  for (double t : log_grid(a.delta, a.horizon, n_points)) {
    long double exact = std::pow(static_cast<long double>(t), -static_cast<long double>(a.beta));
    e = std::max(e, static_cast<double>(std::abs(exact - sum_exp(a.nodes, a.weights, t))));
  }
  return e;
}

void write_soe(const SoeApprox& a, std::ostream& os) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "# soe beta=%.17g delta=%.17g horizon=%.17g tol=%.17g certified_error=%.17g n=%zu\n",
                a.beta, a.delta, a.horizon, a.tol, a.certified_error, a.size());
  os << buf;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", a.nodes[i], a.weights[i]);
    os << buf;
  }
}

SoeApprox read_soe(std::istream& is) {
  SoeApprox a;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# soe", 0) != 0) throw ParseError("read_soe: missing header", 1);
  std::istringstream hs(line.substr(5));
  std::string kv;
  std::size_t n = 0;
  bool seen[6] = {};
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("read_soe: bad header field '" + kv + "'", 1);
    std::string k = kv.substr(0, eq);
    double v;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("read_soe: bad number in '" + kv + "'", 1);
    }
    if (k == "beta") a.beta = v, seen[0] = true;
    else if (k == "delta") a.delta = v, seen[1] = true;
    else if (k == "horizon") a.horizon = v, seen[2] = true;
    else if (k == "tol") a.tol = v, seen[3] = true;
    else if (k == "certified_error") a.certified_error = v, seen[4] = true;
    else if (k == "n") n = static_cast<std::size_t>(v), seen[5] = true;
  }
  for (bool b : seen)
    if (!b) throw ParseError("read_soe: incomplete header", 1);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double s, w;
    if (!(ls >> s >> w)) throw ParseError("read_soe: expected 's w'", lineno);
    if (!a.nodes.empty() && !(s > a.nodes.back())) throw ParseError("read_soe: nodes not increasing", lineno);
    if (!(s > 0.0 && w > 0.0)) throw ParseError("read_soe: nodes and weights must be positive", lineno);
    a.nodes.push_back(s);
    a.weights.push_back(w);
  }
  if (a.size() != n) throw ParseError("read_soe: node count does not match header");
  return a;
}

}  // namespace fracorder
