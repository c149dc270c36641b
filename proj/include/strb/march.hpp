#pragma once

#include "strb/fom.hpp"

#include <Eigen/SparseLU>

#include <array>
#include <functional>
#include <memory>

namespace strb::fom {

/// Uniform grid t_k = k * dt, k = 0..Nt, with BDF2 coefficients.
struct TimeGrid {
  double period = 1.0;
  int steps = 50;

  static constexpr double alpha1 = 4.0 / 3.0;
  static constexpr double alpha2 = -1.0 / 3.0;
  static constexpr double beta = 2.0 / 3.0;

  [[nodiscard]] double dt() const { return period / steps; }
  [[nodiscard]] double t(int k) const { return k * period / steps; }
};

/// mu0: frequency multiplier, mu1: amplitude, mu2: flow split.
struct Parameter {
  double mu0 = 6.0;
  double mu1 = 0.2;
  double mu2 = 0.5;
};

struct ParameterDomain {
  std::array<double, 3> lower{4.0, 0.1, 0.2};
  std::array<double, 3> upper{8.0, 0.3, 0.8};

  [[nodiscard]] bool contains(const Parameter& p) const;
};

/// Per-boundary weights of the reference profile: (1, mu2) or (mu2, 1 - mu2).
enum class FlowSplit { UnitAndMu2, Mu2AndComplement };

/// 1 - cos(2 pi t / T) + mu1 sin(2 pi mu0 t / T)
double temporal_profile(double t, const Parameter& mu, double period);

/// Boundary data factorized as g_k(x, t; mu) = g^s_k(x) g^t_k(t; mu).
struct DirichletDatum {
  std::vector<Vector> g_space;
  FlowSplit split = FlowSplit::UnitAndMu2;
  double period = 1.0;
  /// Replaces the reference profile when set.
  std::function<double(double, const Parameter&)> law;

  static DirichletDatum from_blocks(const FomSpatialBlocks& f, FlowSplit split, double period);

  [[nodiscard]] int boundaries() const { return static_cast<int>(g_space.size()); }
  [[nodiscard]] double weight(int k, const Parameter& mu) const;
  [[nodiscard]] double profile(double t, const Parameter& mu) const;
  /// g^t_k sampled at t_1..t_Nt.
  [[nodiscard]] Vector temporal(int k, const TimeGrid& grid, const Parameter& mu) const;
  /// Stacked g~(t_n) over boundaries.
  [[nodiscard]] Vector stacked(int n, const TimeGrid& grid, const Parameter& mu) const;
};

/// Columns are time steps t_1..t_Nt.
struct Trajectory {
  Matrix u, p, lambda;
};

/// Factors the BDF2 saddle step matrix once and marches from zero history.
class Bdf2Stepper {
 public:
  Bdf2Stepper(const FomSpatialBlocks& f, const TimeGrid& grid);

  /// One step from (u_{n-1}, u_{n-2}) with multiplier data g_n; returns [u; p; lambda].
  [[nodiscard]] Vector step(const Vector& u_prev, const Vector& u_prev2, const Vector& g_now) const;
  [[nodiscard]] Trajectory march(const DirichletDatum& datum, const Parameter& mu) const;

  [[nodiscard]] const SparseMatrix& step_matrix() const { return k_; }
  [[nodiscard]] double condition_estimate() const { return cond_; }

 private:
  Index n_u_, n_p_, n_l_;
  TimeGrid grid_;
  SparseMatrix m_, k_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
  double cond_ = 0.0;
};

/// [M + beta dt A, beta dt B^T, beta dt C^T; B, 0, 0; C, 0, 0] with the
/// boundary-modified blocks.
SparseMatrix bdf2_step_matrix(const FomSpatialBlocks& f, double dt);

}  // namespace strb::fom
