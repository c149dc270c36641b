#pragma once

#include "strb/fom.hpp"
#include "strb/pod.hpp"

#include <string>
#include <vector>

namespace strb::stability {

using linalg::Index;
using linalg::Matrix;
using linalg::SparseMatrix;
using linalg::Vector;

enum class SupremizerKind { Pressure, Multiplier };

struct SupremizerSet {
  SupremizerKind kind = SupremizerKind::Pressure;
  int boundary = -1;
  Matrix vectors;  // one supremizer per column
};

/// Solves [X_u, C^T; C, 0][s; l] = [B^T phi_p; 0] for every pressure mode.
SupremizerSet pressure_supremizers(const fom::FomSpatialBlocks& f, const Matrix& phi_p);

/// Solves X_u s = C_k^T e_j for every multiplier dof of boundary k.
SupremizerSet multiplier_supremizers(const fom::FomSpatialBlocks& f, int k);

enum class ColumnOrigin { Pod, PressureSupremizer, MultiplierSupremizer };

struct EnrichedSpaceBasis {
  Matrix phi;
  std::vector<ColumnOrigin> origin;
  int dropped = 0;
};

/// Modified Gram-Schmidt with one re-orthogonalization pass in the X_u inner
/// product, columns in the order POD, then each supremizer set as given.
/// Columns whose norm falls below 1e-12 of their original after projection
/// are dropped.
EnrichedSpaceBasis enrich_space_basis(const Matrix& phi_u, const SparseMatrix& x_u,
                                      const std::vector<SupremizerSet>& sets);

struct TemporalEnrichmentStep {
  std::string dual;  // "pressure" or "multiplier<k>"
  int added = 0;
  double sigma_min = 0.0;  // of Psi^{u,d} after enrichment
};

struct TemporalEnrichmentReport {
  double eps_t = 0.5;
  std::vector<TemporalEnrichmentStep> steps;
  [[nodiscard]] int total_added() const;
};

/// Temporal supremizer enrichment of psi_u against a dual basis. At l = 1 the
/// trigger is ||xi_1|| <= eps_t; afterwards xi_l is compared with its
/// projection on the span of the earlier xi. After each enrichment the
/// coupling matrix is recomputed and the scan restarts at l = 1.
Matrix temporal_enrich(const Matrix& psi_u, const Matrix& psi_d, double eps_t, int* added = nullptr);

/// Dual fields in processing order.
enum class DualOrder { PressureFirst, MultipliersFirst };

/// Enriches basis.tu against the pressure and every multiplier temporal basis.
TemporalEnrichmentReport temporal_enrich_all(pod::SpaceTimeBasis& basis, double eps_t,
                                             DualOrder order = DualOrder::PressureFirst);

struct RankReport {
  double sigma_up = 0.0;
  std::vector<double> sigma_ul;
  bool violation = false;  // any value below 1e-10
};

RankReport rank_diagnostics(const Matrix& psi_u, const Matrix& psi_p, const std::vector<Matrix>& psi_l);
RankReport rank_diagnostics(const pod::SpaceTimeBasis& basis);

/// Smallest singular value of X_u^{-1/2} B^T X_p^{-1/2} restricted to free
/// velocity dofs (discrete inf-sup constant).
double fom_infsup_constant(const fom::FomSpatialBlocks& f);

}  // namespace strb::stability
