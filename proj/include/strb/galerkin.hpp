#pragma once

#include "strb/march.hpp"
#include "strb/pod.hpp"

#include <Eigen/LU>

namespace strb::rom {

using linalg::Index;
using linalg::Matrix;
using linalg::SparseMatrix;
using linalg::Vector;

/// Reduced coefficients [u; p; lambda_1; ...], each block with time fastest.
struct RomSolution {
  Vector w;
  Index n_u = 0, n_p = 0;
  std::vector<Index> n_l;

  /// Block reshaped to (space modes x time modes).
  [[nodiscard]] Matrix velocity_matrix(Index n_space) const;
  [[nodiscard]] Matrix pressure_matrix(Index n_space) const;
};

/// Phi W Psi^T per field; never forms Pi.
fom::Trajectory reconstruct(const RomSolution& s, const pod::SpaceTimeBasis& b);

/// Dense LU held with its reciprocal condition estimate.
struct DenseFactor {
  Eigen::PartialPivLU<Matrix> lu;
  double rcond = 0.0;

  void compute(const Matrix& a);
  [[nodiscard]] double condition() const { return rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity(); }
};

struct ReducedGalerkinSystem {
  Index n_us = 0, n_ut = 0, n_ps = 0, n_pt = 0;
  std::vector<Index> n_ls, n_lt;
  double dt = 0.0;
  int steps = 0;

  // Space-reduced blocks and temporal couplings.
  Matrix M, A, Bt, B;
  std::vector<Matrix> C, Ct;
  Matrix G1, G2, psi_up;
  std::vector<Matrix> psi_ul;

  // Online data: multiplier temporal bases and projected profiles.
  std::vector<Matrix> psi_l;
  std::vector<Vector> g_space;

  Matrix matrix;  // assembled reduced space-time operator
  DenseFactor factor;

  [[nodiscard]] Index size() const { return matrix.rows(); }
  [[nodiscard]] Index n_u_st() const { return n_us * n_ut; }
  [[nodiscard]] Index n_p_st() const { return n_ps * n_pt; }
};

ReducedGalerkinSystem assemble_stgrb(const pod::SpaceTimeBasis& b, const fom::FomSpatialBlocks& f,
                                     const fom::TimeGrid& grid);

/// Rebuilds the LU after loading a stored operator.
void factorize(ReducedGalerkinSystem& s);

/// Only the multiplier block is nonzero: g~^s_k[i] (psi^{lambda_k}_j . g^t_k).
Vector online_rhs_stgrb(const ReducedGalerkinSystem& s, const fom::DirichletDatum& datum,
                        const fom::TimeGrid& grid, const fom::Parameter& mu);

/// Throws NumericalError when the operator is numerically singular.
RomSolution solve_stgrb(const ReducedGalerkinSystem& s, const Vector& rhs);

/// Space-only Galerkin ROM marched with BDF2.
class SrbTfo {
 public:
  SrbTfo(const Matrix& phi_u, const Matrix& phi_p, const fom::FomSpatialBlocks& f, const fom::TimeGrid& grid);
  /// Restores a stored operator: reduced mass and step matrices.
  SrbTfo(const Matrix& phi_u, const Matrix& phi_p, const Matrix& mass, const Matrix& step, const fom::TimeGrid& grid);

  struct Coefficients {
    Matrix u, p, lambda;  // columns are time steps
  };

  [[nodiscard]] Coefficients march(const fom::DirichletDatum& datum, const fom::Parameter& mu) const;
  [[nodiscard]] fom::Trajectory reconstruct(const Coefficients& c) const;
  [[nodiscard]] Index size() const { return step_.rows(); }
  [[nodiscard]] double condition() const { return factor_.condition(); }
  [[nodiscard]] const Matrix& step_matrix() const { return step_; }
  [[nodiscard]] const Matrix& mass_matrix() const { return m_; }

 private:
  void factor();

  Matrix phi_u_, phi_p_;
  fom::TimeGrid grid_;
  Matrix m_, step_;
  Index nu_, np_, nl_;
  DenseFactor factor_;
};

}  // namespace strb::rom
