#pragma once

#include <array>
#include <string>
#include <vector>

#include "fracorder/errors.hpp"

namespace fracorder {

using Point = std::array<double, 2>;

// Per-node boundary markers. Values >= 3 tag segments of the outer boundary.
namespace marker {
constexpr int interior = 0;
constexpr int outer = 1;
constexpr int obstacle = 2;
// interval meshes
constexpr int left_end = 3;
constexpr int right_end = 4;
// square meshes; a corner takes the first of bottom, top, left, right that contains it
constexpr int bottom = 3;
constexpr int right = 4;
constexpr int top = 5;
constexpr int left = 6;
}  // namespace marker

inline bool is_outer_marker(int m) { return m == marker::outer || m >= 3; }

struct MeshError : ConfigError {
  using ConfigError::ConfigError;
};

struct Mesh {
  int dim = 1;
  std::vector<Point> nodes;                  // 1D meshes use x only
  std::vector<std::array<int, 3>> elements;  // 1D meshes use the first two entries
  std::vector<int> markers;                  // one per node, marker::interior off the boundary
  std::string id;

  int verts_per_element() const { return dim + 1; }
  double element_measure(std::size_t e) const;  // length or area, positive
};

Mesh make_interval_mesh(int n_cells);
Mesh make_square_mesh(int n_per_side);

// ASCII format: "dim n_nodes n_elements n_boundary", then node lines "id x [y]",
// element lines "id n1 n2 [n3]", boundary lines "node_id marker". '#' starts a comment.
Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

// Throws MeshError on degenerate or non-conforming input. Reorients 2D elements counter-clockwise.
void validate_mesh(Mesh& mesh);

// Index of the node at p (within tol), or -1.
int find_node(const Mesh& mesh, const Point& p, double tol = 1e-10);

}  // namespace fracorder
