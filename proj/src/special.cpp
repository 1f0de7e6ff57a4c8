#include "fracorder/special.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fracorder {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSeriesCap = 500;
constexpr int kAsymTerms = 8;
constexpr double kQuadTol = 1e-14;

void check_params(MlfParams p) {
  if (!(p.alpha > 0.0 && p.alpha <= 2.0))
    throw std::domain_error("mlf: alpha must lie in (0, 2]");
  if (!std::isfinite(p.beta)) throw std::domain_error("mlf: beta must be finite");
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Coefficients 1/Gamma(n alpha + beta), cached per thread for the last (alpha, beta).
const std::vector<double>& series_coeffs(MlfParams p) {
  thread_local double ca = std::numeric_limits<double>::quiet_NaN(), cb = ca;
  thread_local std::vector<double> c;
  if (p.alpha != ca || p.beta != cb) {
    c.resize(kSeriesCap);
    for (int n = 0; n < kSeriesCap; ++n) c[n] = gamma_recip(n * p.alpha + p.beta);
    ca = p.alpha;
    cb = p.beta;
  }
  return c;
}

// log|1/Gamma(x)| route for large terms, used when the plain coefficient underflows.
double series_term(MlfParams p, int n, double z, double coeff) {
  double arg = n * p.alpha + p.beta;
  if (coeff != 0.0 || arg <= 0.0) return coeff == 0.0 ? 0.0 : coeff * std::pow(z, n);
  double lg = boost::math::lgamma(arg);
  double mag = std::exp(n * std::log(std::abs(z)) - lg);
  return (z < 0.0 && (n % 2 == 1)) ? -mag : mag;
}

// Residues 2 Re[(1/alpha) s^{1-beta} e^s], s = x^{1/alpha} e^{i pi/alpha}; nonzero for alpha > 1.
double pole_terms(MlfParams p, double x) {
  if (p.alpha <= 1.0) return 0.0;
  std::complex<double> s = std::polar(std::pow(x, 1.0 / p.alpha), kPi / p.alpha);
  std::complex<double> v = std::pow(s, 1.0 - p.beta) * std::exp(s);
  return 2.0 * v.real() / p.alpha;
}

double asym_error_estimate(MlfParams p, double z, int terms) {
  double e1 = std::abs(std::pow(z, -(terms + 1)) * gamma_recip(p.beta - (terms + 1) * p.alpha));
  double e2 = std::abs(std::pow(z, -(terms + 2)) * gamma_recip(p.beta - (terms + 2) * p.alpha));
  return std::max(e1, e2);
}

// alpha == 1 on the negative axis.
double mlf_alpha_one(double beta, double z) {
  if (beta == 1.0) return std::exp(z);
  if (beta == 2.0) return std::expm1(z) / z;
  if (beta > 1.0) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    auto g = [&](double u, double uc) {
      // uc = 1 - u computed without cancellation near u = 1
      double om = (u > 0.5) ? uc : 1.0 - u;
      if (om <= 0.0) return 0.0;
      return std::exp(z * u) * std::pow(om, beta - 2.0);
    };
    return ts.integrate(g, 0.0, 1.0, kQuadTol) * gamma_recip(beta - 1.0);
  }
  return gamma_recip(beta) + z * mlf_alpha_one(beta + 1.0, z);
}

}  // namespace

double gamma_recip(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 171.0) return 0.0;
  return 1.0 / std::tgamma(x);
}

double mlf_series(MlfParams p, double z) {
  check_params(p);
  if (z == 0.0) return gamma_recip(p.beta);
  const auto& c = series_coeffs(p);
  // Kahan-compensated sum
  double sum = 0.0, comp = 0.0, prev = std::numeric_limits<double>::infinity();
  int small_run = 0;
  for (int n = 0; n < kSeriesCap; ++n) {
    double term = series_term(p, n, z, c[n]);
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    double at = std::abs(term);
    if (n * p.alpha + p.beta > 1.0 && at <= prev && at <= 1e-17 * std::abs(sum)) {
      if (++small_run >= 2) return sum;
    } else {
      small_run = 0;
    }
    if (at != 0.0 || n * p.alpha + p.beta > 1.0) prev = at;
  }
  throw std::domain_error("mlf_series: series did not converge within 500 terms");
}

double mlf_asymptotic(MlfParams p, double z, int terms) {
  check_params(p);
  if (!(z < 0.0)) throw std::domain_error("mlf_asymptotic: requires z < 0");
  double s = 0.0;
  for (int k = 1; k <= terms; ++k) s -= std::pow(z, -k) * gamma_recip(p.beta - k * p.alpha);
  return s;
}

double mlf_contour(MlfParams p, double z) {
  check_params(p);
  if (!(z < 0.0)) throw std::domain_error("mlf_contour: requires z < 0");
  if (p.alpha == 1.0) return mlf_alpha_one(p.beta, z);
  if (p.beta > 0.9 + p.alpha) {  // keeps 1 + alpha - beta away from 0
    MlfParams q{p.alpha, p.beta - p.alpha};
    return (mlf_contour(q, z) - gamma_recip(q.beta)) / z;
  }
  const double x = -z, a = p.alpha, b = p.beta;
  using boost::math::cos_pi;
  using boost::math::sin_pi;
  const double sb = sin_pi(b), sab = sin_pi(a - b), ca = cos_pi(a), sa = sin_pi(a);
  // smooth factor of the cut integrand; the full integrand is r^(a-b) h(r)
  auto h = [=](double r) {
    double ra = std::pow(r, a);
    double num = ra * sb - x * sab;
    double u = ra + x * ca, v = x * sa;  // den = |r^a + x e^{i pi a}|^2 without cancellation
    return std::exp(-r) * num / (u * u + v * v);
  };
  auto f = [=](double r) { return r <= 0.0 ? 0.0 : std::pow(r, a - b) * h(r); };
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  thread_local boost::math::quadrature::exp_sinh<double> es;
  // Breakpoints for the cut integral. For alpha near 1 the integrand has a
  // Lorentzian peak of relative width |tan(pi a)|/a at r_c = (-x cos(pi a))^(1/a);
  // it is bracketed by geometrically graded points.
  std::vector<double> br{0.0};
  const double c = -ca, wrel = std::abs(sa / ca) / a;
  const double rc = c > 0.0 ? std::pow(x * c, 1.0 / a) : 0.0;
  if (c > 0.0 && wrel < 0.1 && rc < 60.0) {
    std::vector<double> d;
    for (double dk = rc * wrel; dk < 0.5 * rc; dk *= 4.0) d.push_back(dk);
    for (auto it = d.rbegin(); it != d.rend(); ++it) br.push_back(rc - *it);
    br.push_back(rc);
    for (double dk : d) br.push_back(rc + dk);
    br.push_back(1.5 * rc);
  } else {
    br.push_back(std::min(std::pow(x, 1.0 / a), 50.0));
  }
  // on the first piece substitute v = r^g, g = 1 + a - b > 0, removing the endpoint singularity
  const double g = 1.0 + a - b;
  auto fv = [=](double v) { return v <= 0.0 ? h(0.0) : h(std::pow(v, 1.0 / g)); };
  double integral = ts.integrate(fv, 0.0, std::pow(br[1], g), kQuadTol) / g;
  auto f2 = [&](double r, double) { return f(r); };
  for (std::size_t k = 2; k < br.size(); ++k) integral += ts.integrate(f2, br[k - 1], br[k], kQuadTol);
  integral += es.integrate(f, br.back(), std::numeric_limits<double>::infinity(), kQuadTol);
  return integral / kPi + pole_terms(p, x);
}

double mlf(MlfParams p, double z) {
  check_params(p);
  if (!std::isfinite(z)) throw std::domain_error("mlf: z must be finite");
  if (z == 0.0) return gamma_recip(p.beta);
  if (p.alpha == 1.0 && p.beta == 1.0) return std::exp(z);
  if (p.alpha == 1.0 && p.beta == 2.0) return std::expm1(z) / z;
  if (z >= -1.0) return mlf_series(p, z);
  const double x = -z;
  if (p.alpha != 1.0 || !is_nonpositive_integer(p.beta - 1.0)) {
    double s = mlf_asymptotic(p, z, kAsymTerms);
    double poles = pole_terms(p, x);
    double total = s + poles;
    double err = asym_error_estimate(p, z, kAsymTerms);
    if (total != 0.0 && err <= 1e-16 * std::abs(total)) return total;
  }
  return mlf_contour(p, z);
}

double mlf_decay_bound_check(MlfParams p, std::span<const double> z_grid) {
  double m = 0.0;
  for (double z : z_grid) {
    if (z > 0.0) throw std::domain_error("mlf_decay_bound_check: grid must be non-positive");
    m = std::max(m, std::abs(mlf(p, z)) * (1.0 + std::abs(z)));
  }
  return m;
}

}  // namespace fracorder
