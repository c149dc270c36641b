#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace strb::mesh {

using Point = Eigen::Vector2d;

enum class EdgeKind { Wall, Outflow, Dirichlet };

/// A boundary edge. Dirichlet edges carry the 0-based boundary index and
/// whether the prescribed profile points into the domain (inlet) or out of it
/// (flow-rate constrained outlet).
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  EdgeKind kind = EdgeKind::Wall;
  int boundary = -1;
  bool inflow = true;
};

/// Text tag: WALL, OUT, IN<k> (inlet) or FR<k> (flow-rate outlet), k >= 1.
std::string edge_tag(const BoundaryEdge& e);
BoundaryEdge parse_edge_tag(int a, int b, const std::string& tag);

struct Mesh2D {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;

  [[nodiscard]] int dirichlet_count() const;
  [[nodiscard]] double area() const;
};

/// Checks positive areas, conformity and complete, unique boundary tagging.
void validate(const Mesh2D& m);

/// [0,L]x[0,H] cut into nx*ny cells, two triangles each. Left side is the
/// inlet, right side the outflow, top and bottom are walls.
Mesh2D make_channel(double length, double height, int nx, int ny);

/// T-shaped bifurcation on a structured grid of spacing h: an inlet arm
/// x in [0,2], y in [1.5,2.5] joining a vertical branch x in [2,3], y in [0,4].
/// The left end is an inlet, the top a flow-rate outlet, the bottom a free outflow.
Mesh2D make_tbifurcation(double h);

Mesh2D read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const Mesh2D& m);
std::string mesh_to_text(const Mesh2D& m);
Mesh2D mesh_from_text(const std::string& text);

/// P2 node numbering: vertices first, then one node per edge midpoint.
struct P2Space {
  int vertex_count = 0;
  std::vector<Point> nodes;
  std::vector<std::array<int, 6>> element_nodes;  // v0 v1 v2 m01 m12 m20
  std::map<std::pair<int, int>, int> edge_node;   // sorted vertex pair -> node

  [[nodiscard]] int node_count() const { return static_cast<int>(nodes.size()); }
  [[nodiscard]] int midpoint(int a, int b) const;
};

P2Space build_p2(const Mesh2D& m);

}  // namespace strb::mesh
