#include "strb/mesh.hpp"

#include "strb/error.hpp"
#include "strb/io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace strb::mesh {

namespace {

std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

double signed_area(const Mesh2D& m, const std::array<int, 3>& t) {
  const Point& p0 = m.vertices[static_cast<std::size_t>(t[0])];
  const Point& p1 = m.vertices[static_cast<std::size_t>(t[1])];
  const Point& p2 = m.vertices[static_cast<std::size_t>(t[2])];
  return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
}

}  // namespace

std::string edge_tag(const BoundaryEdge& e) {
  switch (e.kind) {
    case EdgeKind::Wall: return "WALL";
    case EdgeKind::Outflow: return "OUT";
    case EdgeKind::Dirichlet: return (e.inflow ? "IN" : "FR") + std::to_string(e.boundary + 1);
  }
  return "WALL";
}

BoundaryEdge parse_edge_tag(int a, int b, const std::string& tag) {
  BoundaryEdge e;
  e.a = a;
  e.b = b;
  if (tag == "WALL") {
    e.kind = EdgeKind::Wall;
  } else if (tag == "OUT") {
    e.kind = EdgeKind::Outflow;
  } else if ((tag.rfind("IN", 0) == 0 || tag.rfind("FR", 0) == 0) && tag.size() > 2) {
    e.kind = EdgeKind::Dirichlet;
    e.inflow = tag[0] == 'I';
    try {
      e.boundary = std::stoi(tag.substr(2)) - 1;
    } catch (const std::exception&) {
      throw ConfigError("bad boundary tag: " + tag);
    }
    if (e.boundary < 0) throw ConfigError("boundary index must be >= 1: " + tag);
  } else {
    throw ConfigError("unknown boundary tag: " + tag);
  }
  return e;
}

int Mesh2D::dirichlet_count() const {
  int n = 0;
  for (const auto& e : boundary_edges)
    if (e.kind == EdgeKind::Dirichlet) n = std::max(n, e.boundary + 1);
  return n;
}

double Mesh2D::area() const {
  double s = 0.0;
  for (const auto& t : triangles) s += signed_area(*this, t);
  return s;
}

void validate(const Mesh2D& m) {
  const int nv = static_cast<int>(m.vertices.size());
  std::map<std::pair<int, int>, int> count;
  for (std::size_t i = 0; i < m.triangles.size(); ++i) {
    const auto& t = m.triangles[i];
    for (int v : t)
      if (v < 0 || v >= nv) throw ConfigError("triangle " + std::to_string(i) + " references a missing vertex");
    if (!(signed_area(m, t) > 0.0))
      throw ConfigError("degenerate or clockwise triangle " + std::to_string(i));
    for (int k = 0; k < 3; ++k) ++count[key(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)])];
  }
  std::set<std::pair<int, int>> boundary;
  for (const auto& [e, c] : count) {
    if (c > 2) throw ConfigError("non-conforming mesh: edge shared by more than two triangles");
    if (c == 1) boundary.insert(e);
  }
  std::set<std::pair<int, int>> tagged;
  for (const auto& e : m.boundary_edges) {
    const auto k = key(e.a, e.b);
    if (!boundary.count(k)) throw ConfigError("tagged edge is not on the boundary");
    if (!tagged.insert(k).second) throw ConfigError("boundary edge tagged twice");
  }
  if (tagged.size() != boundary.size()) throw ConfigError("untagged boundary edge");
  const int nd = m.dirichlet_count();
  for (int k = 0; k < nd; ++k) {
    const bool present = std::any_of(m.boundary_edges.begin(), m.boundary_edges.end(), [&](const auto& e) {
      return e.kind == EdgeKind::Dirichlet && e.boundary == k;
    });
    if (!present) throw ConfigError("Dirichlet boundary indices must be contiguous");
  }
}

Mesh2D make_channel(double length, double height, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(length > 0.0) || !(height > 0.0))
    throw ConfigError("channel: invalid size or resolution");
  Mesh2D m;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.vertices.emplace_back(length * i / nx, height * j / ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  for (int i = 0; i < nx; ++i) {
    m.boundary_edges.push_back({id(i, 0), id(i + 1, 0), EdgeKind::Wall, -1, true});
    m.boundary_edges.push_back({id(i + 1, ny), id(i, ny), EdgeKind::Wall, -1, true});
  }
  for (int j = 0; j < ny; ++j) {
    m.boundary_edges.push_back({id(0, j + 1), id(0, j), EdgeKind::Dirichlet, 0, true});
    m.boundary_edges.push_back({id(nx, j), id(nx, j + 1), EdgeKind::Outflow, -1, true});
  }
  validate(m);
  return m;
}

Mesh2D make_tbifurcation(double h) {
  if (!(h > 0.0)) throw ConfigError("bifurcation: spacing must be positive");
  const int nx = static_cast<int>(std::lround(3.0 / h));
  const int ny = static_cast<int>(std::lround(4.0 / h));
  if (std::abs(nx * h - 3.0) > 1e-9 || std::abs(ny * h - 4.0) > 1e-9 ||
      std::abs(std::lround(1.5 / h) * h - 1.5) > 1e-9)
    throw ConfigError("bifurcation: spacing must divide 0.5");
  auto inside = [&](int i, int j) {
    const double cx = (i + 0.5) * h, cy = (j + 0.5) * h;
    if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
    return (cx < 2.0 && cy > 1.5 && cy < 2.5) || (cx > 2.0 && cx < 3.0);
  };
  Mesh2D m;
  std::map<std::pair<int, int>, int> vid;
  auto vertex = [&](int i, int j) {
    auto [it, fresh] = vid.try_emplace({i, j}, static_cast<int>(m.vertices.size()));
    if (fresh) m.vertices.emplace_back(i * h, j * h);
    return it->second;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!inside(i, j)) continue;
      const int a = vertex(i, j), b = vertex(i + 1, j), c = vertex(i + 1, j + 1), d = vertex(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  const double eps = 1e-9;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!inside(i, j)) continue;
      // Counterclockwise orientation of each exposed cell side.
      struct Side {
        int di, dj;
        std::array<int, 4> ab;
      };
      const Side sides[4] = {{0, -1, {i, j, i + 1, j}},
                             {1, 0, {i + 1, j, i + 1, j + 1}},
                             {0, 1, {i + 1, j + 1, i, j + 1}},
                             {-1, 0, {i, j + 1, i, j}}};
      for (const auto& s : sides) {
        if (inside(i + s.di, j + s.dj)) continue;
        BoundaryEdge e;
        e.a = vertex(s.ab[0], s.ab[1]);
        e.b = vertex(s.ab[2], s.ab[3]);
        const Point& pa = m.vertices[static_cast<std::size_t>(e.a)];
        const Point& pb = m.vertices[static_cast<std::size_t>(e.b)];
        if (std::abs(pa.x()) < eps && std::abs(pb.x()) < eps) {
          e.kind = EdgeKind::Dirichlet;
          e.boundary = 0;
          e.inflow = true;
        } else if (std::abs(pa.y() - 4.0) < eps && std::abs(pb.y() - 4.0) < eps) {
          e.kind = EdgeKind::Dirichlet;
          e.boundary = 1;
          e.inflow = false;
        } else if (std::abs(pa.y()) < eps && std::abs(pb.y()) < eps) {
          e.kind = EdgeKind::Outflow;
        } else {
          e.kind = EdgeKind::Wall;
        }
        m.boundary_edges.push_back(e);
      }
    }
  validate(m);
  return m;
}

std::string mesh_to_text(const Mesh2D& m) {
  std::ostringstream os;
  os.precision(17);
  os << "vertices " << m.vertices.size() << '\n';
  for (const auto& p : m.vertices) os << p.x() << ' ' << p.y() << '\n';
  os << "triangles " << m.triangles.size() << '\n';
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary_edges " << m.boundary_edges.size() << '\n';
  for (const auto& e : m.boundary_edges) os << e.a << ' ' << e.b << ' ' << edge_tag(e) << '\n';
  return os.str();
}

Mesh2D mesh_from_text(const std::string& text) {
  std::istringstream is(text);
  Mesh2D m;
  std::string word;
  std::size_t n = 0;
  auto header = [&](const char* expected) {
    if (!(is >> word >> n) || word != expected)
      throw ConfigError(std::string("mesh file: expected section '") + expected + "'");
  };
  header("vertices");
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0, y = 0;
    if (!(is >> x >> y)) throw ConfigError("mesh file: truncated vertex list");
    m.vertices.emplace_back(x, y);
  }
  header("triangles");
  for (std::size_t i = 0; i < n; ++i) {
    std::array<int, 3> t{};
    if (!(is >> t[0] >> t[1] >> t[2])) throw ConfigError("mesh file: truncated triangle list");
    m.triangles.push_back(t);
  }
  header("boundary_edges");
  for (std::size_t i = 0; i < n; ++i) {
    int a = 0, b = 0;
    std::string tag;
    if (!(is >> a >> b >> tag)) throw ConfigError("mesh file: truncated boundary list");
    m.boundary_edges.push_back(parse_edge_tag(a, b, tag));
  }
  validate(m);
  return m;
}

Mesh2D read_mesh(const std::filesystem::path& path) { return mesh_from_text(io::read_text(path)); }

void write_mesh(const std::filesystem::path& path, const Mesh2D& m) { io::write_text(path, mesh_to_text(m)); }

int P2Space::midpoint(int a, int b) const {
  const auto it = edge_node.find(key(a, b));
  if (it == edge_node.end()) throw DimensionError("P2Space: unknown edge");
  return it->second;
}

P2Space build_p2(const Mesh2D& m) {
  P2Space s;
  s.vertex_count = static_cast<int>(m.vertices.size());
  s.nodes = m.vertices;
  for (const auto& t : m.triangles) {
    std::array<int, 6> en{t[0], t[1], t[2], 0, 0, 0};
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      auto [it, fresh] = s.edge_node.try_emplace(key(a, b), static_cast<int>(s.nodes.size()));
      if (fresh)
        s.nodes.push_back(0.5 * (m.vertices[static_cast<std::size_t>(a)] + m.vertices[static_cast<std::size_t>(b)]));
      en[static_cast<std::size_t>(3 + k)] = it->second;
    }
    s.element_nodes.push_back(en);
  }
  return s;
}

}  // namespace strb::mesh
