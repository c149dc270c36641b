#pragma once

#include "strb/linalg.hpp"
#include "strb/mesh.hpp"

#include <string>
#include <vector>

namespace strb::fom {

using linalg::Index;
using linalg::Matrix;
using linalg::SparseMatrix;
using linalg::Vector;

struct FomOptions {
  double rho = 1.06;   // g/cm^3
  double mu = 3.5e-3;  // g/(cm s)
  int n_in = 5;        // multiplier degree on inlets
  int n_out = 0;       // multiplier degree on flow-rate outlets
};

/// L2(Gamma)-orthonormal polynomials on a straight boundary segment, built by
/// Gram-Schmidt on Chebyshev polynomials of the second kind.
struct MultiplierBasis {
  int degree = 0;
  double length = 1.0;
  Matrix coefficients;  // row m: coefficients of eta_m in U_0..U_degree

  /// eta_m at arclength s in [0, length].
  [[nodiscard]] double eval(int m, double s) const;
};

MultiplierBasis make_multiplier_basis(int degree, double length);

/// Chebyshev polynomial of the second kind U_n(x).
double chebyshev_u(int n, double x);

struct DirichletBoundary {
  int index = 0;
  bool inflow = true;
  mesh::Point origin;
  mesh::Point tangent;
  mesh::Point outward_normal;
  double length = 0.0;
  std::vector<std::pair<int, int>> edges;
  MultiplierBasis basis;
  Index n_lambda = 0;  // 2 * (degree + 1)
  Index offset = 0;    // position in the stacked multiplier vector

  /// Unit-flow parabolic profile: (6 / l^3) s (l - s) along the inward
  /// (inlet) or outward (outlet) normal.
  [[nodiscard]] mesh::Point profile(double s) const;
  [[nodiscard]] double arclength(const mesh::Point& p) const;
};

struct FomSpatialBlocks {
  double rho = 1.0;
  double mu = 1.0;
  Index n_nodes = 0;  // P2 nodes; velocity dof c * n_nodes + node
  Index n_u = 0;
  Index n_p = 0;
  std::vector<DirichletBoundary> boundaries;

  SparseMatrix M, A;          // wall rows replaced by their diagonal
  SparseMatrix M_raw, A_raw;  // before any boundary modification
  SparseMatrix B;             // n_p x n_u
  SparseMatrix Bt_bc;         // n_u x n_p, wall rows zeroed
  std::vector<SparseMatrix> C;      // per boundary, N_lambda^k x n_u
  std::vector<SparseMatrix> Ct_bc;  // per boundary, wall rows zeroed
  SparseMatrix C_all;               // stacked over boundaries
  SparseMatrix Ct_all_bc;
  SparseMatrix X_u;  // (1/rho) M + (1/(2 mu)) A, walls decoupled symmetrically
  SparseMatrix X_p;  // P1 mass
  std::vector<Index> wall_dofs;
  std::vector<Vector> g_space;  // projected unit-flow profile per boundary

  [[nodiscard]] Index n_lambda() const;
  [[nodiscard]] Index n_lambda(int k) const { return boundaries[static_cast<std::size_t>(k)].n_lambda; }
  [[nodiscard]] Index n_space() const { return n_u + n_p + n_lambda(); }
  [[nodiscard]] int n_boundaries() const { return static_cast<int>(boundaries.size()); }
};

FomSpatialBlocks assemble_fom(const mesh::Mesh2D& m, const FomOptions& opts);

/// (6 / l^3) s (l - s)
double parabolic_profile(double s, double length);

}  // namespace strb::fom
