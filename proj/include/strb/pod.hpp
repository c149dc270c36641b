#pragma once

#include "strb/linalg.hpp"
#include "strb/march.hpp"

#include <optional>
#include <string>
#include <vector>

namespace strb::pod {

using linalg::Index;
using linalg::Matrix;
using linalg::SparseMatrix;
using linalg::Tensor3;
using linalg::TruncationCriterion;
using linalg::Vector;

enum class Field { Velocity, Pressure, Multiplier };
enum class NormTag { Velocity, Pressure, Identity };

std::string to_string(Field f);
std::string to_string(NormTag n);

/// Trajectories of one field over a parameter set: (N^s, N^t, N_mu).
struct SnapshotTensor {
  Field field = Field::Velocity;
  int boundary = -1;  // multiplier boundary, -1 otherwise
  Tensor3 data;
  std::vector<fom::Parameter> parameters;
};

struct SnapshotSet {
  SnapshotTensor velocity;
  SnapshotTensor pressure;
  std::vector<SnapshotTensor> multipliers;  // one per Dirichlet boundary
};

/// Splits trajectories into per-field tensors; multiplier rows are cut by
/// boundary offsets.
SnapshotSet collect_snapshots(const fom::FomSpatialBlocks& f, const std::vector<fom::Trajectory>& runs,
                              const std::vector<fom::Parameter>& params);

/// Orthonormal in the X inner product: phi^T X phi = I.
struct SpaceBasis {
  Matrix phi;
  Vector sigma;
  NormTag norm = NormTag::Identity;
  double tolerance = 0.0;
};

/// Euclidean-orthonormal temporal basis: psi^T psi = I.
struct TimeBasis {
  Matrix psi;
  Vector sigma;
  double tolerance = 0.0;
};

/// POD of the mode-1 unfolding in the X norm. An empty X means the identity.
SpaceBasis spatial_pod(const SnapshotTensor& s, const SparseMatrix& x, NormTag tag,
                       const TruncationCriterion& criterion);
/// Euclidean POD of the mode-2 unfolding.
TimeBasis temporal_pod(const SnapshotTensor& s, const TruncationCriterion& criterion);

/// Factored space-time basis. Reduced unknowns are [u; p; lambda_1; ...] with
/// index F(i,j) = i * n_t + j (time fastest) inside each block. Multipliers
/// use the identity in space and a per-boundary temporal basis.
struct SpaceTimeBasis {
  SpaceBasis u, p;
  TimeBasis tu, tp;
  std::vector<TimeBasis> tl;
  std::vector<Index> n_lambda;  // N_lambda^k

  [[nodiscard]] Index n_u_st() const { return u.phi.cols() * tu.psi.cols(); }
  [[nodiscard]] Index n_p_st() const { return p.phi.cols() * tp.psi.cols(); }
  [[nodiscard]] Index n_lambda_st(int k) const;
  [[nodiscard]] Index n_lambda_st() const;
  [[nodiscard]] Index size() const { return n_u_st() + n_p_st() + n_lambda_st(); }
  [[nodiscard]] Index lambda_offset(int k) const;  // within the multiplier block
  [[nodiscard]] int boundaries() const { return static_cast<int>(tl.size()); }
  [[nodiscard]] Index steps() const { return tu.psi.rows(); }

  /// Column F(i,j) of the velocity block, vec(phi_i psi_j^T).
  [[nodiscard]] Vector velocity_column(Index i, Index j) const;
  /// Dense Pi (FOM space-time size x n_st); small instances only.
  [[nodiscard]] Matrix materialize() const;
};

struct FieldBases {
  std::optional<SpaceBasis> u, p;
  std::optional<TimeBasis> tu, tp;
  std::vector<TimeBasis> tl;
  std::vector<Index> n_lambda;
};

SpaceTimeBasis assemble_space_time_basis(const FieldBases& b);

/// ||w||^2 = sum_n w_n^T X w_n for a trajectory matrix with time in columns.
double space_time_norm_squared(const Matrix& w, const SparseMatrix& x);

}  // namespace strb::pod
