#pragma once

#include "strb/galerkin.hpp"

#include <Eigen/Cholesky>

namespace strb::rom {

/// Norm surrogate P for the residual: diagonal of X_u and X_p, identity on the
/// multipliers. With exact = true the full X_u, X_p are used instead (oracle
/// comparisons only).
struct NormSurrogate {
  Vector p_u, p_p;
  bool exact = false;
  SparseMatrix x_u, x_p;

  static NormSurrogate diagonal(const fom::FomSpatialBlocks& f);
  static NormSurrogate exact_norm(const fom::FomSpatialBlocks& f);

  /// X^T P_u^{-1} Y and X^T P_p^{-1} Y
  [[nodiscard]] Matrix kernel_u(const Matrix& x, const Matrix& y) const;
  [[nodiscard]] Matrix kernel_p(const Matrix& x, const Matrix& y) const;
};

struct ReducedPGSystem {
  Index n_us = 0, n_ut = 0, n_ps = 0, n_pt = 0;
  std::vector<Index> n_ls, n_lt;
  int steps = 0;

  Matrix psi_u;                     // velocity temporal basis, for the rhs
  std::vector<Vector> rhs_kernel;   // (C_k Phi_u)^T g~^s_k per boundary

  Matrix matrix;
  Eigen::LLT<Matrix> llt;
  DenseFactor lu;  // fallback when the normal matrix is not numerically SPD
  bool use_llt = true;

  [[nodiscard]] Index size() const { return matrix.rows(); }
  [[nodiscard]] Index n_u_st() const { return n_us * n_ut; }
  [[nodiscard]] Index n_p_st() const { return n_ps * n_pt; }
};

ReducedPGSystem assemble_stpgrb(const pod::SpaceTimeBasis& b, const fom::FomSpatialBlocks& f,
                                const fom::TimeGrid& grid, const NormSurrogate& p);

void factorize(ReducedPGSystem& s);

/// Only the velocity block is nonzero.
Vector online_rhs_stpgrb(const ReducedPGSystem& s, const fom::DirichletDatum& datum, const fom::TimeGrid& grid,
                         const fom::Parameter& mu);

RomSolution solve_stpgrb(const ReducedPGSystem& s, const Vector& rhs);

}  // namespace strb::rom
