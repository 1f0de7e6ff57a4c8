#include "fracorder/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fracorder {

namespace {

const std::map<std::string, std::string>& presets() {
  static const std::string ex41_common =
      "[domain]\n"
      "type = interval\n"
      "cells = 200\n"
      "x0 = 0\n"
      "[time]\n"
      "alphas = 0.25, 0.5, 0.75\n"
      "tau = 1e-3\n"
      "T = 100\n"
      "soe_tol = 1e-9\n"
      "[recovery]\n"
      "K = 1\n"
      "samples = 11\n"
      "windows = 1:2, 1:10, 10:20\n"
      "noise = 0, 0.01, 0.05\n"
      "seeds = 1\n";
  static const std::string hole = "[domain]\ntype = mesh\nmesh = square_hole_64.mesh\nx0 = 0, 0.5\n";
  static const std::string square = "[domain]\ntype = square\nn_per_side = 64\nx0 = 0, 0.5\n";
  // diffusion-wave: the scheme is first order, so a finer step on a coarser mesh
  static const std::string hole32 = "[domain]\ntype = mesh\nmesh = square_hole_32.mesh\nx0 = 0, 0.5\n";
  static const std::string square32 = "[domain]\ntype = square\nn_per_side = 32\nx0 = 0, 0.5\n";
  static const std::string sub2d =
      "[time]\nalphas = 0.25, 0.5, 0.75\ntau = 1e-3\nT = 20\nsoe_tol = 1e-9\n"
      "[recovery]\nK = 1\nsamples = 11\nwindows = 1:2, 1:10, 10:20\nnoise = 0, 0.01, 0.05\nseeds = 1\n";
  static const std::string dw2d =
      "[time]\nalphas = 1.25, 1.5, 1.75\ntau = 1e-4\nT = 30\nsoe_tol = 1e-9\n"
      "[recovery]\nK = 1\nsamples = 11\nwindows = 1:10, 20:30, 20:23\nnoise = 0, 0.01, 0.05\nseeds = 1\n";
  static const std::string d2i =
      "[coefficients]\na = 1 + sin(pi*x1)*x2*(1-x2)\nq = 1\nrho = 1\n"
      "[data]\nu0 = x1*(1-x1)*sin(pi*x2)\nF = x1*(1-x1)*x2*(1-x2)*t*chi(t,0,0.1)\ng = 0\ncutoff = 0.1\n"
      "[recovery]\nmode = initial_condition\n";
  static const std::string d2ii =
      "[coefficients]\na = 1\nq = 1\nrho = 1\n"
      "[data]\nu0 = 0\nF = sin(pi*x1)*x2^2*(1-x2)*chi(t,0,0.1)\ng = 0\ncutoff = 0.1\n"
      "[recovery]\nmode = zero_initial\n";
  static const std::string d2iii =
      "[coefficients]\na = 1 + sin(pi*x1)*sin(pi*x2)\nq = 1\nrho = 1\n"
      "[data]\nu0 = 0\nF = 0\ng = x1*(1-x1)*exp(t)*chi(t,0,0.1)\ng_markers = 3\ncutoff = 0.1\n"
      "[recovery]\nmode = zero_initial\n";
  static const std::map<std::string, std::string> p = {
      {"ex4.1i", "case = ex4.1i\n" + ex41_common +
                     "[coefficients]\na = 1 + x^2\nq = 1\nrho = 1\n"
                     "[data]\nu0 = x^2*(1-x)\nF = exp(x*(1-x))*x*(1-x)*t*chi(t,0,0.1)\ng = 0\ncutoff = 0.1\n"
                     "[recovery]\nmode = initial_condition\n"},
      {"ex4.1ii", "case = ex4.1ii\n" + ex41_common +
                      "[coefficients]\na = 1\nq = 1 + sin(x)\nrho = 1\n"
                      "[data]\nu0 = 0\nF = exp(x^2)*sin(pi*x)*chi(t,0,0.1)\ng = 0\ncutoff = 0.1\n"
                      "[recovery]\nmode = zero_initial\n"},
      {"ex4.1iii", "case = ex4.1iii\n" + ex41_common +
                       "[coefficients]\na = 1 + sin(pi*x)\nq = cos(pi*x)\nrho = 1\n"
                       "[data]\nu0 = 0\nF = 0\ng = exp(t)*chi(t,0,0.1)\ng_markers = 3\ncutoff = 0.1\n"
                       "[recovery]\nmode = zero_initial\n"},
      {"ex4.2i", "case = ex4.2i\n" + hole + sub2d + d2i},
      {"ex4.2ii", "case = ex4.2ii\n" + square + sub2d + d2ii},
      {"ex4.2iii", "case = ex4.2iii\n" + hole + sub2d + d2iii},
      {"ex4.3i", "case = ex4.3i\n" + hole32 + dw2d + d2i},
      {"ex4.3ii", "case = ex4.3ii\n" + square32 + dw2d + d2ii},
      {"ex4.3iii", "case = ex4.3iii\n" + hole32 + dw2d + d2iii},
  };
  return p;
}

struct Entry {
  std::string section, key, value;
  int line;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Entry> tokenize(const std::string& text) {
  std::vector<Entry> out;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("config: malformed section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"domain", "coefficients", "data", "time", "recovery", "output"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known))
        throw ParseError("config: unknown section [" + section + "]", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", lineno);
    Entry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (e.key.empty()) throw ParseError("config: empty key", lineno);
    out.push_back(e);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(v);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

class Applier {
 public:
  explicit Applier(ExperimentConfig& c) : c_(c) {}

  void apply(const Entry& e) {
    e_ = &e;
    const std::string& s = e.section;
    const std::string& k = e.key;
    const std::string& v = e.value;
    if (s.empty()) {
      if (k == "case") c_.case_label = v;
      else if (k == "preset") c_.preset = v;
      else bad_key();
    } else if (s == "domain") {
      if (k == "type") {
        if (v == "interval") c_.domain = DomainType::interval;
        else if (v == "square") c_.domain = DomainType::square;
        else if (v == "mesh") c_.domain = DomainType::mesh_file;
        else fail("expected interval, square or mesh");
      } else if (k == "cells") c_.cells = integer(v);
      else if (k == "n_per_side") c_.n_per_side = integer(v);
      else if (k == "mesh") c_.mesh = v;
      else if (k == "x0") {
        auto xs = numbers(v);
        if (xs.empty() || xs.size() > 2) fail("expected one or two coordinates");
        c_.x0 = {xs[0], xs.size() > 1 ? xs[1] : 0.0};
      } else bad_key();
    } else if (s == "coefficients") {
      if (k == "a") c_.a = expr(v);
      else if (k == "q") c_.q = expr(v);
      else if (k == "rho") c_.rho = expr(v);
      else bad_key();
    } else if (s == "data") {
      if (k == "u0") c_.u0 = expr(v);
      else if (k == "F") c_.F = expr(v);
      else if (k == "g") c_.g = expr(v);
      else if (k == "g_markers") {
        c_.g_markers.clear();
        if (v != "all")
          for (double m : numbers(v)) {
            if (m != std::floor(m) || m < 1 || m == marker::obstacle) fail("markers must be outer-boundary tags");
            c_.g_markers.push_back(static_cast<int>(m));
          }
      } else if (k == "cutoff") c_.cutoff = v == "none" ? std::numeric_limits<double>::infinity() : number(v);
      else bad_key();
    } else if (s == "time") {
      if (k == "alphas") c_.alphas = numbers(v);
      else if (k == "tau") c_.tau = number(v);
      else if (k == "T") c_.T = number(v);
      else if (k == "soe_tol") c_.soe_tol = number(v);
      else if (k == "full_res") c_.full_res = boolean(v);
      else bad_key();
    } else if (s == "recovery") {
      if (k == "mode") {
        try {
          c_.mode = parse_fit_mode(v);
        } catch (const ConfigError& ex) {
          fail(ex.what());
        }
      } else if (k == "K") c_.K = integer(v);
      else if (k == "samples") c_.samples = integer(v);
      else if (k == "windows") {
        c_.windows.clear();
        for (const auto& w : split_list(v)) {
          const auto colon = w.find(':');
          if (colon == std::string::npos) fail("windows are written start:end");
          c_.windows.push_back({number(w.substr(0, colon)), number(w.substr(colon + 1))});
        }
      } else if (k == "noise") c_.noise = numbers(v);
      else if (k == "seeds") {
        c_.seeds.clear();
        for (double x : numbers(v)) {
          if (x < 0 || x != std::floor(x) || x > 9.007199254740992e15) fail("seeds are non-negative integers");
          c_.seeds.push_back(static_cast<std::uint64_t>(x));
        }
      } else bad_key();
    } else if (s == "output") {
      if (k == "dense_csv") c_.dense_csv = boolean(v);
      else if (k == "profile_rows") c_.profile_rows = integer(v);
      else bad_key();
    }
  }

 private:
  std::string path() const { return e_->section.empty() ? e_->key : e_->section + "." + e_->key; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("config: " + path() + ": " + msg, e_->line); }
  [[noreturn]] void bad_key() const { throw ParseError("config: unknown key '" + path() + "'", e_->line); }

  double number(const std::string& v) const {
    const std::string s = trim(v);
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(x)) fail("expected a number, got '" + v + "'");
    return x;
  }
  std::vector<double> numbers(const std::string& v) const {
    std::vector<double> out;
    for (const auto& p : split_list(v)) out.push_back(number(p));
    return out;
  }
  int integer(const std::string& v) const {
    const double x = number(v);
    if (x != std::floor(x) || std::abs(x) > 1e9) fail("expected an integer");
    return static_cast<int>(x);
  }
  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("expected true or false");
  }
  Expression expr(const std::string& v) const {
    try {
      return Expression::parse(v);
    } catch (const ParseError& ex) {
      fail(ex.what());
    }
  }

  ExperimentConfig& c_;
  const Entry* e_ = nullptr;
};

void validate(const ExperimentConfig& c) {
  auto err = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (c.alphas.empty()) err("time.alphas: empty alpha list");
  for (double a : c.alphas)
    if (!(a > 0.0 && a < 2.0)) err("time.alphas: each alpha must lie in (0, 2)");
  TimeGrid::from_horizon(c.tau, c.T);
  if (!(c.soe_tol > 0.0 && c.soe_tol < 1.0)) err("time.soe_tol must lie in (0, 1)");
  if (c.domain == DomainType::interval && c.cells < 2) err("domain.cells must be >= 2");
  if (c.domain == DomainType::square && c.n_per_side < 2) err("domain.n_per_side must be >= 2");
  if (c.domain == DomainType::mesh_file && c.mesh.empty()) err("domain.mesh: missing mesh file");
  if (c.K < 1 || c.K > 3) err("recovery.K must lie in [1, 3]");
  if (c.samples < c.K + 1) err("recovery.samples must exceed K");
  if (c.windows.empty()) err("recovery.windows: empty window list");
  const bool forcing = !c.F.is_zero_literal() || !c.g.is_zero_literal();
  if (forcing && !std::isfinite(c.cutoff)) err("data.cutoff: required when F or g is nonzero");
  if (!(c.cutoff > 0.0)) err("data.cutoff must be positive");
  for (const Window& w : c.windows) {
    if (!(w.start < w.end)) err("recovery.windows: start must be below end");
    if (w.end > c.T * (1.0 + 1e-12)) err("recovery.windows: window ends after T");
    if (forcing && !(w.start > c.cutoff)) err("recovery.windows: window starts before the data cutoff ends");
    if (!(w.start > 0.0)) err("recovery.windows: window must start after t = 0");
  }
  for (double e : c.noise)
    if (!(e >= 0.0)) err("recovery.noise: levels must be non-negative");
  if (c.profile_rows < 2) err("output.profile_rows must be >= 2");
}

ExperimentConfig defaults() {
  ExperimentConfig c;
  c.a = Expression::parse("1");
  c.q = Expression::parse("0");
  c.rho = Expression::parse("1");
  c.u0 = Expression::parse("0");
  c.F = Expression::parse("0");
  c.g = Expression::parse("0");
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

const std::string& preset_text(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  const std::vector<Entry> entries = tokenize(text);
  ExperimentConfig c = defaults();
  for (const Entry& e : entries)
    if (e.section.empty() && e.key == "preset") {
      for (const Entry& pe : tokenize(preset_text(e.value))) Applier(c).apply(pe);
      c.preset = e.value;
    }
  Applier ap(c);
  for (const Entry& e : entries) ap.apply(e);
  c.base_dir = base_dir;
  if (c.full_res) apply_full_resolution(c);
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config_text(ss.str(), dir.empty() ? "." : dir);
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c = parse_config_text(preset_text(name));
  c.preset = name;
  return c;
}

void apply_full_resolution(ExperimentConfig& cfg) {
  cfg.full_res = true;
  cfg.tau = 1e-4;
  cfg.T = 100.0;
}

std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  auto ex = [](const Expression& e) {
    std::string s = e.text();
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
    return s;
  };
  os << "case=" << c.case_label << '\n';
  os << "domain=" << static_cast<int>(c.domain) << '\n';
  if (c.domain == DomainType::interval) os << "cells=" << c.cells << '\n';
  if (c.domain == DomainType::square) os << "n_per_side=" << c.n_per_side << '\n';
  if (c.domain == DomainType::mesh_file) os << "mesh=" << c.mesh << '\n';
  os << "x0=" << num(c.x0[0]) << ',' << num(c.x0[1]) << '\n';
  os << "a=" << ex(c.a) << "\nq=" << ex(c.q) << "\nrho=" << ex(c.rho) << '\n';
  os << "u0=" << ex(c.u0) << "\nF=" << ex(c.F) << "\ng=" << ex(c.g) << "\ng_markers=";
  for (int m : c.g_markers) os << m << ',';
  os << "\ncutoff=" << num(c.cutoff) << "\nalphas=";
  for (double a : c.alphas) os << num(a) << ',';
  os << "\ntau=" << num(c.tau) << "\nT=" << num(c.T) << "\nsoe_tol=" << num(c.soe_tol) << '\n';
  os << "mode=" << to_string(c.mode) << "\nK=" << c.K << "\nsamples=" << c.samples << "\nwindows=";
  for (const Window& w : c.windows) os << num(w.start) << ':' << num(w.end) << ',';
  os << "\nnoise=";
  for (double e : c.noise) os << num(e) << ',';
  os << "\nseeds=";
  for (auto s : c.seeds) os << s << ',';
  os << "\ndense_csv=" << c.dense_csv << "\nprofile_rows=" << c.profile_rows << '\n';
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string resolve_data_path(const std::string& name, const std::string& base_dir) {
  namespace fs = std::filesystem;
  if (fs::path(name).is_absolute()) {
    if (fs::exists(name)) return name;
    throw ConfigError("mesh file not found: " + name);
  }
  std::vector<fs::path> dirs{base_dir.empty() ? fs::path(".") : fs::path(base_dir)};
#ifdef FRACORDER_DATA_DIR
  dirs.emplace_back(FRACORDER_DATA_DIR);
#endif
  if (const char* env = std::getenv("FRACORDER_DATA")) dirs.emplace_back(env);
  for (const auto& d : dirs)
    if (fs::exists(d / name)) return (d / name).string();
  throw ConfigError("mesh file not found: " + name);
}

Mesh build_mesh(const ExperimentConfig& cfg) {
  switch (cfg.domain) {
    case DomainType::interval: return make_interval_mesh(cfg.cells);
    case DomainType::square: return make_square_mesh(cfg.n_per_side);
    case DomainType::mesh_file: return load_mesh(resolve_data_path(cfg.mesh, cfg.base_dir));
  }
  throw ConfigError("unknown domain type");
}

Coefficients build_coefficients(const ExperimentConfig& cfg) {
  Coefficients c;
  c.a = [e = cfg.a](const Point& x) { return e(x, 0.0); };
  c.q = [e = cfg.q](const Point& x) { return e(x, 0.0); };
  c.rho = [e = cfg.rho](const Point& x) { return e(x, 0.0); };
  return c;
}

void validate_against_mesh(const ExperimentConfig& cfg, const Mesh& mesh) {
  const struct {
    const char* name;
    const Expression* e;
    bool time;
  } fields[] = {{"coefficients.a", &cfg.a, false}, {"coefficients.q", &cfg.q, false},
                {"coefficients.rho", &cfg.rho, false}, {"data.u0", &cfg.u0, false},
                {"data.F", &cfg.F, true}, {"data.g", &cfg.g, true}};
  for (const auto& f : fields) {
    if (mesh.dim == 1 && f.e->uses_x2()) throw ConfigError("config: " + std::string(f.name) + " uses x2 on a 1D domain");
    if (!f.time && f.e->uses_t()) throw ConfigError("config: " + std::string(f.name) + " must not depend on t");
  }
  const int node = find_node(mesh, cfg.x0, 1e-8);
  if (node < 0 || !is_outer_marker(mesh.markers[node]))
    throw ConfigError("config: domain.x0 is not an outer-boundary mesh node");
  // finiteness on the nodes (throws ExpressionError otherwise)
  const std::size_t stride = std::max<std::size_t>(1, mesh.nodes.size() / 400);
  for (std::size_t i = 0; i < mesh.nodes.size(); i += stride)
    for (const auto& f : fields) (*f.e)(mesh.nodes[i], 0.0);
  if (!std::isfinite(cfg.cutoff)) return;
  for (double frac : {0.0, 0.01, 0.25, 0.5, 1.0}) {
    const double t = cfg.cutoff + frac * (cfg.T - cfg.cutoff);
    if (t > cfg.T) continue;
    for (std::size_t i = 0; i < mesh.nodes.size(); i += stride) {
      if (cfg.F(mesh.nodes[i], t) != 0.0) throw ConfigError("config: data.F does not vanish for t >= data.cutoff");
      if (cfg.g(mesh.nodes[i], t) != 0.0) throw ConfigError("config: data.g does not vanish for t >= data.cutoff");
    }
  }
}

ProblemSpec build_problem(const ExperimentConfig& cfg, double alpha, std::shared_ptr<const FemSystem> sys) {
  ProblemSpec s;
  s.alpha = alpha;
  s.sys = std::move(sys);
  if (!cfg.u0.is_zero_literal()) s.u0 = interpolate(*s.sys->mesh, [e = cfg.u0](const Point& x) { return e(x, 0.0); });
  if (!cfg.F.is_zero_literal()) s.source = [e = cfg.F](const Point& x, double t) { return e(x, t); };
  if (!cfg.g.is_zero_literal()) s.dirichlet = DirichletData{[e = cfg.g](const Point& x, double t) { return e(x, t); }, cfg.g_markers};
  s.source_cutoff = cfg.cutoff;
  s.grid = TimeGrid::from_horizon(cfg.tau, cfg.T);
  return s;
}

}  // namespace fracorder
