#include "fracorder/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace fracorder {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

// Reads the next non-empty, non-comment line; returns false at EOF.
bool next_line(std::istream& is, std::string& line, int& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

double Mesh::element_measure(std::size_t e) const {
  const auto& el = elements[e];
  if (dim == 1) return std::abs(nodes[el[1]][0] - nodes[el[0]][0]);
  return std::abs(signed_area(nodes[el[0]], nodes[el[1]], nodes[el[2]]));
}

Mesh make_interval_mesh(int n_cells) {
  if (n_cells < 2) throw std::invalid_argument("make_interval_mesh: n_cells must be >= 2");
  Mesh m;
  m.dim = 1;
  m.id = "interval-" + std::to_string(n_cells);
  for (int i = 0; i <= n_cells; ++i) m.nodes.push_back({static_cast<double>(i) / n_cells, 0.0});
  for (int i = 0; i < n_cells; ++i) m.elements.push_back({i, i + 1, -1});
  m.markers.assign(n_cells + 1, marker::interior);
  m.markers.front() = marker::left_end;
  m.markers.back() = marker::right_end;
  return m;
}

Mesh make_square_mesh(int n) {
  if (n < 2) throw std::invalid_argument("make_square_mesh: n_per_side must be >= 2");
  Mesh m;
  m.dim = 2;
  m.id = "square-" + std::to_string(n);
  auto idx = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      m.nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
      int mk = marker::interior;
      if (j == 0) mk = marker::bottom;
      else if (j == n) mk = marker::top;
      else if (i == 0) mk = marker::left;
      else if (i == n) mk = marker::right;
      m.markers.push_back(mk);
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1), d = idx(i, j + 1);
      m.elements.push_back({a, b, c});
      m.elements.push_back({a, c, d});
    }
  return m;
}

void validate_mesh(Mesh& m) {
  if (m.dim != 1 && m.dim != 2) throw MeshError("mesh: dim must be 1 or 2");
  const int nv = m.verts_per_element();
  const int nn = static_cast<int>(m.nodes.size());
  if (static_cast<int>(m.markers.size()) != nn) throw MeshError("mesh: marker array size mismatch");
  double scale = 0.0;
  for (const auto& p : m.nodes) scale = std::max({scale, std::abs(p[0]), std::abs(p[1])});
  scale = std::max(scale, 1.0);
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    auto& el = m.elements[e];
    for (int k = 0; k < nv; ++k) {
      if (el[k] < 0 || el[k] >= nn) throw MeshError("mesh: element " + std::to_string(e) + " references a missing node");
      for (int l = 0; l < k; ++l)
        if (el[k] == el[l]) throw MeshError("mesh: element " + std::to_string(e) + " repeats a node index");
    }
    if (m.dim == 1) {
      if (!(m.element_measure(e) > 1e-14 * scale)) throw MeshError("mesh: degenerate element " + std::to_string(e));
    } else {
      double a = signed_area(m.nodes[el[0]], m.nodes[el[1]], m.nodes[el[2]]);
      if (!(std::abs(a) > 1e-14 * scale * scale)) throw MeshError("mesh: degenerate element " + std::to_string(e));
      if (a < 0) std::swap(el[1], el[2]);
    }
  }
  // boundary facets: 1D nodes in one element, 2D edges in one triangle
  if (m.dim == 1) {
    std::vector<int> count(nn, 0);
    for (const auto& el : m.elements) ++count[el[0]], ++count[el[1]];
    for (int i = 0; i < nn; ++i) {
      if (count[i] > 2) throw MeshError("mesh: non-conforming 1D mesh at node " + std::to_string(i));
      if (count[i] == 1 && m.markers[i] == marker::interior)
        throw MeshError("mesh: boundary node " + std::to_string(i) + " has no marker");
    }
  } else {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& el : m.elements)
      for (int k = 0; k < 3; ++k) {
        int a = el[k], b = el[(k + 1) % 3];
        ++edges[{std::min(a, b), std::max(a, b)}];
      }
    for (const auto& [e, c] : edges) {
      if (c > 2) throw MeshError("mesh: edge shared by more than two triangles");
      if (c == 1 && (m.markers[e.first] == marker::interior || m.markers[e.second] == marker::interior))
        throw MeshError("mesh: boundary node without marker on edge " + std::to_string(e.first) + "-" +
                        std::to_string(e.second));
    }
  }
}

Mesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("load_mesh: cannot open " + path);
  Mesh m;
  m.id = path.substr(path.find_last_of('/') + 1);
  std::string line;
  int lineno = 0;
  if (!next_line(is, line, lineno)) throw ParseError("load_mesh: empty file", lineno);
  long nn, ne, nb;
  {
    std::istringstream ss(line);
    if (!(ss >> m.dim >> nn >> ne >> nb) || nn < 0 || ne < 0 || nb < 0)
      throw ParseError("load_mesh: bad header", lineno);
    if (m.dim != 1 && m.dim != 2) throw ParseError("load_mesh: dim must be 1 or 2", lineno);
  }
  std::unordered_map<long, int> id_to_index;
  for (long i = 0; i < nn; ++i) {
    if (!next_line(is, line, lineno)) throw ParseError("load_mesh: unexpected end of file in node block", lineno);
    std::istringstream ss(line);
    long id;
    Point p{0.0, 0.0};
    if (!(ss >> id >> p[0]) || (m.dim == 2 && !(ss >> p[1]))) throw ParseError("load_mesh: bad node line", lineno);
    if (!id_to_index.emplace(id, static_cast<int>(m.nodes.size())).second)
      throw ParseError("load_mesh: duplicate node id", lineno);
    m.nodes.push_back(p);
  }
  auto lookup = [&](long id) {
    auto it = id_to_index.find(id);
    if (it == id_to_index.end()) throw ParseError("load_mesh: unknown node id " + std::to_string(id), lineno);
    return it->second;
  };
  for (long i = 0; i < ne; ++i) {
    if (!next_line(is, line, lineno)) throw ParseError("load_mesh: unexpected end of file in element block", lineno);
    std::istringstream ss(line);
    long id, v[3] = {0, 0, 0};
    if (!(ss >> id)) throw ParseError("load_mesh: bad element line", lineno);
    for (int k = 0; k <= m.dim; ++k)
      if (!(ss >> v[k])) throw ParseError("load_mesh: bad element line", lineno);
    std::array<int, 3> el{lookup(v[0]), lookup(v[1]), m.dim == 2 ? lookup(v[2]) : -1};
    m.elements.push_back(el);
  }
  m.markers.assign(m.nodes.size(), marker::interior);
  for (long i = 0; i < nb; ++i) {
    if (!next_line(is, line, lineno)) throw ParseError("load_mesh: unexpected end of file in boundary block", lineno);
    std::istringstream ss(line);
    long id;
    int mk;
    if (!(ss >> id >> mk) || mk < 1) throw ParseError("load_mesh: bad boundary line", lineno);
    int k = lookup(id);
    if (m.markers[k] != marker::interior) throw ParseError("load_mesh: node marked twice", lineno);
    m.markers[k] = mk;
  }
  if (next_line(is, line, lineno)) throw ParseError("load_mesh: trailing content", lineno);
  validate_mesh(m);
  return m;
}

void save_mesh(const Mesh& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw MeshError("save_mesh: cannot write " + path);
  long nb = std::count_if(m.markers.begin(), m.markers.end(), [](int k) { return k != marker::interior; });
  os << m.dim << ' ' << m.nodes.size() << ' ' << m.elements.size() << ' ' << nb << '\n';
  char buf[96];
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (m.dim == 1) std::snprintf(buf, sizeof buf, "%zu %.17g\n", i, m.nodes[i][0]);
    else std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i, m.nodes[i][0], m.nodes[i][1]);
    os << buf;
  }
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    os << e;
    for (int k = 0; k <= m.dim; ++k) os << ' ' << m.elements[e][k];
    os << '\n';
  }
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    if (m.markers[i] != marker::interior) os << i << ' ' << m.markers[i] << '\n';
}

int find_node(const Mesh& m, const Point& p, double tol) {
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    double dx = m.nodes[i][0] - p[0], dy = m.dim == 2 ? m.nodes[i][1] - p[1] : 0.0;
    if (std::hypot(dx, dy) <= tol) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace fracorder
