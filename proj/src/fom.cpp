#include "strb/fom.hpp"

#include "strb/error.hpp"
#include "strb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace strb::fom {

using linalg::Triplet;
using mesh::Point;

double chebyshev_u(int n, double x) {
  if (n == 0) return 1.0;
  double u0 = 1.0, u1 = 2.0 * x;
  for (int k = 2; k <= n; ++k) {
    const double u2 = 2.0 * x * u1 - u0;
    u0 = u1;
    u1 = u2;
  }
  return u1;
}

double MultiplierBasis::eval(int m, double s) const {
  const double x = 2.0 * s / length - 1.0;
  double v = 0.0;
  for (int l = 0; l <= degree; ++l) v += coefficients(m, l) * chebyshev_u(l, x);
  return v;
}

MultiplierBasis make_multiplier_basis(int degree, double length) {
  if (degree < 0) throw ConfigError("multiplier degree must be >= 0");
  if (!(length > 0.0)) throw ConfigError("multiplier segment has zero length");
  const int n = degree + 1;
  // Gram matrix of U_0..U_degree in L2(0, length), exact with n+1 Gauss points.
  const auto rule = quad::gauss_legendre(n + 1);
  Matrix g = Matrix::Zero(n, n);
  for (const auto& q : rule) {
    const double w = q.weight * 0.5 * length;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) g(a, b) += w * chebyshev_u(a, q.x) * chebyshev_u(b, q.x);
  }
  // Modified Gram-Schmidt on coefficient vectors in the g inner product.
  Matrix c = Matrix::Identity(n, n);
  for (int pass = 0; pass < 2; ++pass)
    for (int m = 0; m < n; ++m) {
      for (int l = 0; l < m; ++l) {
        const double r = c.row(l) * g * c.row(m).transpose();
        c.row(m) -= r * c.row(l);
      }
      c.row(m) /= std::sqrt(double(c.row(m) * g * c.row(m).transpose()));
    }
  return {degree, length, c};
}

double parabolic_profile(double s, double length) {
  return 6.0 / (length * length * length) * s * (length - s);
}

Point DirichletBoundary::profile(double s) const {
  const double v = parabolic_profile(s, length);
  return (inflow ? -v : v) * outward_normal;
}

double DirichletBoundary::arclength(const Point& p) const { return (p - origin).dot(tangent); }

Index FomSpatialBlocks::n_lambda() const {
  Index n = 0;
  for (const auto& b : boundaries) n += b.n_lambda;
  return n;
}

namespace {

struct Element {
  std::array<double, 3> lam;
  std::array<Point, 3> glam;
  double area;
};

// Values and gradients of the six P2 shape functions.
void p2_shape(const std::array<double, 3>& l, const std::array<Point, 3>& gl, std::array<double, 6>& n,
              std::array<Point, 6>& gn) {
  for (int i = 0; i < 3; ++i) {
    n[static_cast<std::size_t>(i)] = l[static_cast<std::size_t>(i)] * (2.0 * l[static_cast<std::size_t>(i)] - 1.0);
    gn[static_cast<std::size_t>(i)] = (4.0 * l[static_cast<std::size_t>(i)] - 1.0) * gl[static_cast<std::size_t>(i)];
  }
  const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
  for (int e = 0; e < 3; ++e) {
    const auto a = static_cast<std::size_t>(ea[e]), b = static_cast<std::size_t>(eb[e]);
    n[static_cast<std::size_t>(3 + e)] = 4.0 * l[a] * l[b];
    gn[static_cast<std::size_t>(3 + e)] = 4.0 * (l[b] * gl[a] + l[a] * gl[b]);
  }
}

std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

SparseMatrix replace_rows_by_diagonal(const SparseMatrix& s, const std::vector<char>& wall) {
  std::vector<Triplet> t;
  for (Index k = 0; k < s.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
      if (!wall[static_cast<std::size_t>(it.row())]) t.emplace_back(it.row(), it.col(), it.value());
      else if (it.row() == it.col()) t.emplace_back(it.row(), it.col(), it.value());
    }
  return linalg::from_triplets(s.rows(), s.cols(), t);
}

SparseMatrix zero_rows(const SparseMatrix& s, const std::vector<char>& wall) {
  std::vector<Triplet> t;
  for (Index k = 0; k < s.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s, k); it; ++it)
      if (!wall[static_cast<std::size_t>(it.row())]) t.emplace_back(it.row(), it.col(), it.value());
  return linalg::from_triplets(s.rows(), s.cols(), t);
}

// Zero wall rows and columns, keeping the diagonal (stays symmetric).
SparseMatrix decouple_symmetric(const SparseMatrix& s, const std::vector<char>& wall) {
  std::vector<Triplet> t;
  for (Index k = 0; k < s.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
      const bool wr = wall[static_cast<std::size_t>(it.row())], wc = wall[static_cast<std::size_t>(it.col())];
      if ((!wr && !wc) || it.row() == it.col()) t.emplace_back(it.row(), it.col(), it.value());
    }
  return linalg::from_triplets(s.rows(), s.cols(), t);
}

}  // namespace

FomSpatialBlocks assemble_fom(const mesh::Mesh2D& m, const FomOptions& opts) {
  if (!(opts.rho > 0.0) || !(opts.mu > 0.0)) throw ConfigError("rho and mu must be positive");
  if (opts.n_in < 0 || opts.n_out < 0) throw ConfigError("multiplier degrees must be >= 0");
  mesh::validate(m);
  const mesh::P2Space space = mesh::build_p2(m);

  FomSpatialBlocks f;
  f.rho = opts.rho;
  f.mu = opts.mu;
  f.n_nodes = space.node_count();
  f.n_u = 2 * f.n_nodes;
  f.n_p = static_cast<Index>(m.vertices.size());
  const Index nn = f.n_nodes;

  std::vector<Triplet> tm, ta, tb, tmp;
  const auto& rule = quad::triangle_rule();
  for (std::size_t e = 0; e < m.triangles.size(); ++e) {
    const auto& tri = m.triangles[e];
    const auto& nodes = space.element_nodes[e];
    const Point& p0 = m.vertices[static_cast<std::size_t>(tri[0])];
    const Point& p1 = m.vertices[static_cast<std::size_t>(tri[1])];
    const Point& p2 = m.vertices[static_cast<std::size_t>(tri[2])];
    const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    const double area = 0.5 * det;
    const std::array<Point, 3> gl{Point((p1.y() - p2.y()) / det, (p2.x() - p1.x()) / det),
                                  Point((p2.y() - p0.y()) / det, (p0.x() - p2.x()) / det),
                                  Point((p0.y() - p1.y()) / det, (p1.x() - p0.x()) / det)};
    double me[6][6] = {}, ge[6][6] = {}, de[6][6][2][2] = {}, be[3][6][2] = {}, pe[3][3] = {};
    for (const auto& q : rule) {
      std::array<double, 6> n{};
      std::array<Point, 6> gn{};
      p2_shape(q.bary, gl, n, gn);
      const double w = q.weight * area;
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          me[a][b] += w * n[static_cast<std::size_t>(a)] * n[static_cast<std::size_t>(b)];
          ge[a][b] += w * gn[static_cast<std::size_t>(a)].dot(gn[static_cast<std::size_t>(b)]);
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d)
              de[a][b][c][d] += w * gn[static_cast<std::size_t>(a)][d] * gn[static_cast<std::size_t>(b)][c];
        }
      for (int qp = 0; qp < 3; ++qp) {
        for (int b = 0; b < 6; ++b)
          for (int d = 0; d < 2; ++d) be[qp][b][d] -= w * q.bary[static_cast<std::size_t>(qp)] * gn[static_cast<std::size_t>(b)][d];
        for (int r = 0; r < 3; ++r) pe[qp][r] += w * q.bary[static_cast<std::size_t>(qp)] * q.bary[static_cast<std::size_t>(r)];
      }
    }
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c) {
          const Index ra = c * nn + nodes[static_cast<std::size_t>(a)];
          tm.emplace_back(ra, c * nn + nodes[static_cast<std::size_t>(b)], opts.rho * me[a][b]);
          for (int d = 0; d < 2; ++d) {
            const double v = opts.mu * ((c == d ? ge[a][b] : 0.0) + de[a][b][c][d]);
            ta.emplace_back(ra, d * nn + nodes[static_cast<std::size_t>(b)], v);
          }
        }
    for (int qp = 0; qp < 3; ++qp) {
      for (int b = 0; b < 6; ++b)
        for (int d = 0; d < 2; ++d)
          tb.emplace_back(tri[static_cast<std::size_t>(qp)], d * nn + nodes[static_cast<std::size_t>(b)], be[qp][b][d]);
      for (int r = 0; r < 3; ++r) tmp.emplace_back(tri[static_cast<std::size_t>(qp)], tri[static_cast<std::size_t>(r)], pe[qp][r]);
    }
  }
  f.M_raw = linalg::from_triplets(f.n_u, f.n_u, tm);
  f.A_raw = linalg::from_triplets(f.n_u, f.n_u, ta);
  f.B = linalg::from_triplets(f.n_p, f.n_u, tb);
  f.X_p = linalg::from_triplets(f.n_p, f.n_p, tmp);

  // Wall dofs: every P2 node on a wall edge, both components.
  std::vector<char> wall(static_cast<std::size_t>(f.n_u), 0);
  for (const auto& be : m.boundary_edges) {
    if (be.kind != mesh::EdgeKind::Wall) continue;
    for (int node : {be.a, be.b, space.midpoint(be.a, be.b)})
      for (int c = 0; c < 2; ++c) wall[static_cast<std::size_t>(c * nn + node)] = 1;
  }
  for (Index i = 0; i < f.n_u; ++i)
    if (wall[static_cast<std::size_t>(i)]) f.wall_dofs.push_back(i);

  // Triangle owning each boundary edge, to orient normals.
  std::map<std::pair<int, int>, int> third;
  for (const auto& t : m.triangles)
    for (std::size_t k = 0; k < 3; ++k) third[key(t[k], t[(k + 1) % 3])] = t[(k + 2) % 3];

  const int nd = m.dirichlet_count();
  const auto seg_rule = quad::gauss_legendre(6);
  Index offset = 0;
  for (int k = 0; k < nd; ++k) {
    DirichletBoundary db;
    db.index = k;
    std::set<int> verts;
    for (const auto& be : m.boundary_edges)
      if (be.kind == mesh::EdgeKind::Dirichlet && be.boundary == k) {
        db.edges.emplace_back(be.a, be.b);
        db.inflow = be.inflow;
        verts.insert(be.a);
        verts.insert(be.b);
      }
    const auto [ea, eb] = db.edges.front();
    const Point pa = m.vertices[static_cast<std::size_t>(ea)], pb = m.vertices[static_cast<std::size_t>(eb)];
    db.tangent = (pb - pa).normalized();
    const Point nrm(db.tangent.y(), -db.tangent.x());
    double smin = 1e300, smax = -1e300;
    for (int v : verts) {
      const Point& p = m.vertices[static_cast<std::size_t>(v)];
      if (std::abs((p - pa).dot(nrm)) > 1e-10 * (1.0 + (pb - pa).norm() * 1e3))
        throw ConfigError("Dirichlet boundary " + std::to_string(k + 1) + " is not a straight segment");
      const double s = (p - pa).dot(db.tangent);
      if (s < smin) {
        smin = s;
        db.origin = p;
      }
      smax = std::max(smax, s);
    }
    db.length = smax - smin;
    const Point& opp = m.vertices[static_cast<std::size_t>(third.at(key(ea, eb)))];
    db.outward_normal = (opp - pa).dot(nrm) > 0.0 ? Point(-nrm) : nrm;
    db.basis = make_multiplier_basis(db.inflow ? opts.n_in : opts.n_out, db.length);
    const int nb = db.basis.degree + 1;
    db.n_lambda = 2 * nb;
    db.offset = offset;
    offset += db.n_lambda;

    std::vector<Triplet> tc;
    Vector g = Vector::Zero(db.n_lambda);
    for (const auto& [a, b] : db.edges) {
      const int mid = space.midpoint(a, b);
      const Point& qa = m.vertices[static_cast<std::size_t>(a)];
      const Point& qb = m.vertices[static_cast<std::size_t>(b)];
      const double len = (qb - qa).norm();
      for (const auto& q : seg_rule) {
        const double t = 0.5 * (q.x + 1.0);
        const double w = 0.5 * q.weight * len;
        const Point x = qa + t * (qb - qa);
        const double s = db.arclength(x);
        const double shape[3] = {(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)};
        const int node[3] = {a, mid, b};
        const Point gs = db.profile(s);
        for (int mm = 0; mm < nb; ++mm) {
          const double eta = db.basis.eval(mm, s);
          for (int c = 0; c < 2; ++c) {
            const Index row = c * nb + mm;
            for (int l = 0; l < 3; ++l) tc.emplace_back(row, c * nn + node[l], w * eta * shape[l]);
            g[row] += w * eta * gs[c];
          }
        }
      }
    }
    SparseMatrix ck = linalg::from_triplets(db.n_lambda, f.n_u, tc);
    f.C.push_back(ck);
    f.Ct_bc.push_back(zero_rows(SparseMatrix(ck.transpose()), wall));
    f.g_space.push_back(g);
    f.boundaries.push_back(std::move(db));
  }

  std::vector<Triplet> tall;
  for (int k = 0; k < nd; ++k) {
    const auto& ck = f.C[static_cast<std::size_t>(k)];
    const Index off = f.boundaries[static_cast<std::size_t>(k)].offset;
    for (Index j = 0; j < ck.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(ck, j); it; ++it) tall.emplace_back(off + it.row(), it.col(), it.value());
  }
  f.C_all = linalg::from_triplets(offset, f.n_u, tall);
  f.Ct_all_bc = zero_rows(SparseMatrix(f.C_all.transpose()), wall);

  f.M = replace_rows_by_diagonal(f.M_raw, wall);
  f.A = replace_rows_by_diagonal(f.A_raw, wall);
  f.Bt_bc = zero_rows(SparseMatrix(f.B.transpose()), wall);
  const SparseMatrix xu = (1.0 / opts.rho) * f.M_raw + (1.0 / (2.0 * opts.mu)) * f.A_raw;
  f.X_u = decouple_symmetric(xu, wall);
  return f;
}

}  // namespace strb::fom
