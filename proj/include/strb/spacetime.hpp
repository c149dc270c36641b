#pragma once

#include "strb/march.hpp"

namespace strb::fom {

/// Monolithic BDF2 space-time operator. Unknowns are [u; p; lambda], each
/// block time-major with space fastest (the column-major vec of the
/// trajectory matrices). Applied block-structurally; materialization is
/// offered for small instances.
class SpaceTimeSystem {
 public:
  SpaceTimeSystem(const FomSpatialBlocks& f, const TimeGrid& grid);

  [[nodiscard]] Index size() const { return steps_ * (n_u_ + n_p_ + n_l_); }
  [[nodiscard]] Index velocity_size() const { return steps_ * n_u_; }
  [[nodiscard]] Index pressure_size() const { return steps_ * n_p_; }
  [[nodiscard]] Index multiplier_size() const { return steps_ * n_l_; }
  [[nodiscard]] const TimeGrid& grid() const { return grid_; }

  [[nodiscard]] Vector apply(const Vector& w) const;
  [[nodiscard]] SparseMatrix materialize() const;
  /// Right-hand side: only the multiplier block is nonzero.
  [[nodiscard]] Vector rhs(const DirichletDatum& datum, const Parameter& mu) const;

  [[nodiscard]] Vector pack(const Trajectory& tr) const;
  [[nodiscard]] Trajectory unpack(const Vector& w) const;

 private:
  const FomSpatialBlocks* f_;
  TimeGrid grid_;
  int steps_;
  Index n_u_, n_p_, n_l_;
};

}  // namespace strb::fom
