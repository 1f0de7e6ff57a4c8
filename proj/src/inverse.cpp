#include "fracorder/inverse.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <ostream>
#include <random>
#include <thread>

#include "fracorder/errors.hpp"

namespace fracorder {

FitMode parse_fit_mode(const std::string& s) {
  if (s == "initial_condition") return FitMode::initial_condition;
  if (s == "zero_initial") return FitMode::zero_initial;
  throw ConfigError("unknown fit mode '" + s + "' (expected initial_condition or zero_initial)");
}

std::string to_string(FitMode m) { return m == FitMode::initial_condition ? "initial_condition" : "zero_initial"; }

double model_exponent(FitMode mode, int k, double alpha) {
  return mode == FitMode::initial_condition ? k * alpha : 1.0 + k * alpha;
}

FluxSeries add_noise(const FluxSeries& series, double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("add_noise: epsilon must be non-negative");
  FluxSeries out = series;
  out.noise = epsilon;
  out.seed = static_cast<long long>(seed);
  if (epsilon == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> xi(0.0, 1.0);
  for (double& h : out.values) h *= 1.0 + epsilon * xi(rng);
  return out;
}

ObservationSet sample_window(const FluxSeries& s, double t_start, double t_end, int n, FitMode mode, int n_terms) {
  if (n < 2) throw std::invalid_argument("sample_window: n must be >= 2");
  if (n_terms < 1) throw std::invalid_argument("sample_window: K must be >= 1");
  if (s.times.size() < 2) throw std::out_of_range("sample_window: series too short");
  const double slack = 1e-9 * std::max(1.0, std::abs(s.times.back()));
  if (!(t_start < t_end) || t_start < s.times.front() - slack || t_end > s.times.back() + slack)
    throw std::out_of_range("sample_window: window [" + std::to_string(t_start) + ", " + std::to_string(t_end) +
                            "] not inside the series range");
  auto nearest = [&](double x) {
    auto it = std::lower_bound(s.times.begin(), s.times.end(), x);
    std::size_t i = std::min<std::size_t>(it - s.times.begin(), s.times.size() - 1);
    if (i > 0 && x - s.times[i - 1] <= s.times[i] - x) --i;
    return i;
  };
  if (nearest(t_end) < nearest(t_start) + 2)
    throw std::out_of_range("sample_window: window spans a single grid cell");
  ObservationSet o;
  o.window_start = t_start;
  o.window_end = t_end;
  o.mode = mode;
  o.n_terms = n_terms;
  o.noise = s.noise;
  o.seed = s.seed;
  std::size_t last = 0;
  for (int j = 0; j < n; ++j) {
    const double target = t_start + (t_end - t_start) * j / (n - 1);
    const std::size_t i = nearest(target);
    if (j > 0 && i <= last) throw std::out_of_range("sample_window: window too narrow for the requested sample count");
    last = i;
    o.t.push_back(s.times[i]);
    o.h.push_back(s.values[i]);
  }
  return o;
}

LinearFit fit_coeffs_given_alpha(const ObservationSet& obs, double alpha) {
  const int m = static_cast<int>(obs.t.size()), K = obs.n_terms;
  if (m < K) throw std::invalid_argument("fit_coeffs_given_alpha: fewer samples than terms");
  Eigen::MatrixXd A(m, K);
  Eigen::VectorXd h(m);
  for (int i = 0; i < m; ++i) {
    h[i] = obs.h[i];
    for (int k = 0; k < K; ++k) A(i, k) = std::pow(obs.t[i], -model_exponent(obs.mode, k + 1, alpha));
  }
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (int k = 0; k < K; ++k) A.col(k) /= scale[k];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LinearFit f;
  f.condition = sv[K - 1] > 0.0 ? sv[0] / sv[K - 1] : std::numeric_limits<double>::infinity();
  f.rank_deficient = !(f.condition <= kRankConditionLimit);
  Eigen::VectorXd cs = svd.solve(h);
  Eigen::VectorXd r = h - A * cs;
  f.residual = r.squaredNorm();
  f.c.resize(K);
  for (int k = 0; k < K; ++k) f.c[k] = cs[k] / scale[k];
  return f;
}

namespace {

constexpr int kBracketSamples = 41;
constexpr double kGoldenTol = 1e-10;
constexpr double kScanStep = 0.02;
constexpr double kBoundaryTol = 1e-4;

}  // namespace

RecoveryResult recover_order(const ObservationSet& obs, int k_terms) {
  if (k_terms < 1 || k_terms > 3) throw std::invalid_argument("recover_order: K must lie in [1, 3]");
  const int m = static_cast<int>(obs.t.size());
  if (m < k_terms + 1 || static_cast<int>(obs.h.size()) != m)
    throw std::invalid_argument("recover_order: need at least K + 1 samples");
  double hmax = 0.0;
  for (double v : obs.h) hmax = std::max(hmax, std::abs(v));
  if (!(hmax > 0.0) || !std::isfinite(hmax)) throw NumericError("recover_order: all samples are zero");

  // Work in units where max|h| = 1 and the last sample time is 1.
  ObservationSet o = obs;
  o.n_terms = k_terms;
  const double tmax = obs.t.back();
  for (int i = 0; i < m; ++i) {
    o.t[i] /= tmax;
    o.h[i] /= hmax;
  }

  RecoveryResult res;
  // warm start: log|h| = log c - p log t
  {
    int pos = 0, neg = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = 0; i < m; ++i) {
      if (o.h[i] > 0) ++pos;
      if (o.h[i] < 0) ++neg;
      if (o.h[i] == 0.0) continue;
      const double x = std::log(o.t[i]), y = std::log(std::abs(o.h[i]));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++cnt;
    }
    res.sign_inconsistent = pos > 0 && neg > 0;
    double a0 = 1.0;
    const double den = cnt * sxx - sx * sx;
    if (cnt >= 2 && den > 0.0) {
      const double p = -(cnt * sxy - sx * sy) / den;
      a0 = o.mode == FitMode::initial_condition ? p : p - 1.0;
    }
    res.warm_start_alpha = std::clamp(std::isfinite(a0) ? a0 : 1.0, kAlphaMin, kAlphaMax);
  }

  int evals = 0;
  auto objective = [&](double a) {
    ++evals;
    return fit_coeffs_given_alpha(o, a).residual;
  };

  const double lo = std::max(kAlphaMin, res.warm_start_alpha - 0.5);
  const double hi = std::min(kAlphaMax, res.warm_start_alpha + 0.5);
  std::vector<double> grid(kBracketSamples), val(kBracketSamples);
  for (int j = 0; j < kBracketSamples; ++j) {
    grid[j] = lo + (hi - lo) * j / (kBracketSamples - 1);
    val[j] = objective(grid[j]);
  }
  int jb = static_cast<int>(std::min_element(val.begin(), val.end()) - val.begin());
  double a_lo, a_hi;
  const bool edge = (jb == 0 && lo > kAlphaMin) || (jb == kBracketSamples - 1 && hi < kAlphaMax);
  if (!edge) {
    a_lo = grid[std::max(jb - 1, 0)];
    a_hi = grid[std::min(jb + 1, kBracketSamples - 1)];
  } else {
    // no interior descent point: coarse scan of the full range
    double best = val[jb], ab = grid[jb];
    for (int j = 1; j * kScanStep < kAlphaMax - 1e-12; ++j) {
      const double a = j * kScanStep;
      const double v = objective(a);
      if (v < best) best = v, ab = a;
    }
    for (double a : {kAlphaMin, kAlphaMax}) {
      const double v = objective(a);
      if (v < best) best = v, ab = a;
    }
    a_lo = std::max(kAlphaMin, ab - kScanStep);
    a_hi = std::min(kAlphaMax, ab + kScanStep);
  }

  // golden-section on [a_lo, a_hi]
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = a_hi - g * (a_hi - a_lo), x2 = a_lo + g * (a_hi - a_lo);
  double f1 = objective(x1), f2 = objective(x2);
  int it = 0;
  while (a_hi - a_lo > kGoldenTol && it < 200) {
    ++it;
    if (f1 <= f2) {
      a_hi = x2;
      x2 = x1, f2 = f1;
      x1 = a_hi - g * (a_hi - a_lo);
      f1 = objective(x1);
    } else {
      a_lo = x1;
      x1 = x2, f1 = f2;
      x2 = a_lo + g * (a_hi - a_lo);
      f2 = objective(x2);
    }
  }
  if (a_hi - a_lo > kGoldenTol) throw NumericError("recover_order: golden-section did not converge");
  double a_star = 0.5 * (a_lo + a_hi);
  // the interval endpoints may beat the interior (minimum on the boundary)
  double f_star = objective(a_star);
  for (double a : {a_lo, a_hi}) {
    const double v = objective(a);
    if (v < f_star) f_star = v, a_star = a;
  }
  res.alpha_star = a_star;
  res.iterations = it;

  LinearFit fit = fit_coeffs_given_alpha(o, a_star);
  res.rank_deficient = fit.rank_deficient;
  res.residual = fit.residual * hmax * hmax;
  res.coefficients.resize(k_terms);
  for (int k = 0; k < k_terms; ++k)
    res.coefficients[k] = fit.c[k] * hmax * std::pow(tmax, model_exponent(o.mode, k + 1, a_star));
  res.failed = a_star - kAlphaMin < kBoundaryTol || kAlphaMax - a_star < kBoundaryTol ||
               (k_terms == 1 && res.sign_inconsistent);
  return res;
}

std::vector<GridRow> run_experiment_grid(const GridRequest& req, const std::function<FluxSeries(double)>& forward) {
  if (req.alphas.empty()) throw ConfigError("experiment grid: empty alpha list");
  if (req.windows.empty()) throw ConfigError("experiment grid: empty window list");
  const std::vector<double> noises = req.noise_levels.empty() ? std::vector<double>{0.0} : req.noise_levels;
  const std::vector<std::uint64_t> seeds = req.seeds.empty() ? std::vector<std::uint64_t>{0} : req.seeds;

  const int na = static_cast<int>(req.alphas.size());
  std::vector<FluxSeries> series(na);
  std::vector<std::exception_ptr> errors(na);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i; (i = next++) < na;) {
      try {
        series[i] = forward(req.alphas[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nw = std::clamp(req.workers, 1, na);
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<GridRow> rows;
  for (int i = 0; i < na; ++i)
    for (const Window& w : req.windows)
      for (double eps : noises)
        for (std::uint64_t seed : seeds) {
          FluxSeries noisy = add_noise(series[i], eps, seed);
          ObservationSet obs = sample_window(noisy, w.start, w.end, req.n_samples, req.mode, req.n_terms);
          rows.push_back({req.case_label, req.alphas[i], w, eps, seed, recover_order(obs, req.n_terms)});
        }
  return rows;
}

void write_results_csv(const std::vector<GridRow>& rows, std::ostream& os) {
  os << "case,alpha_true,window_start,window_end,noise,seed,alpha_rec,residual,warm_start,failed\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%llu,%.10g,%.6e,%.10g,%d\n", r.case_label.c_str(),
                  r.alpha_true, r.window.start, r.window.end, r.noise, static_cast<unsigned long long>(r.seed),
                  r.result.alpha_star, r.result.residual, r.result.warm_start_alpha, r.result.failed ? 1 : 0);
    os << buf;
  }
}

void write_markdown_table(const std::vector<GridRow>& rows, std::ostream& os) {
  std::vector<double> alphas, noises;
  std::vector<std::pair<double, double>> windows;
  auto add = [](auto& v, auto x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& r : rows) {
    add(alphas, r.alpha_true);
    add(noises, r.noise);
    add(windows, std::make_pair(r.window.start, r.window.end));
  }
  std::string label = rows.empty() ? "" : rows.front().case_label;
  char buf[64];
  for (const auto& [ws, we] : windows) {
    std::snprintf(buf, sizeof buf, "[%g, %g]", ws, we);
    os << "### " << label << " window " << buf << "\n\n| eps \\ alpha |";
    for (double a : alphas) {
      std::snprintf(buf, sizeof buf, " %.2f |", a);
      os << buf;
    }
    os << "\n|---|";
    for (std::size_t k = 0; k < alphas.size(); ++k) os << "---|";
    os << '\n';
    for (double eps : noises) {
      std::snprintf(buf, sizeof buf, "| %g%% |", 100.0 * eps);
      os << buf;
      for (double a : alphas) {
        double sum = 0.0;
        int n = 0;
        bool failed = false;
        for (const auto& r : rows)
          if (r.alpha_true == a && r.noise == eps && r.window.start == ws && r.window.end == we) {
            sum += r.result.alpha_star;
            ++n;
            failed = failed || r.result.failed;
          }
        if (n == 0) os << " |";
        else if (failed) os << " -- |";
        else {
          std::snprintf(buf, sizeof buf, " %.3f |", sum / n);
          os << buf;
        }
      }
      os << '\n';
    }
    os << '\n';
  }
}

}  // namespace fracorder
