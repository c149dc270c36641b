#include "strb/march.hpp"

#include "strb/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace strb::fom {

bool ParameterDomain::contains(const Parameter& p) const {
  const double v[3] = {p.mu0, p.mu1, p.mu2};
  for (std::size_t i = 0; i < 3; ++i)
    if (v[i] < lower[i] || v[i] > upper[i]) return false;
  return true;
}

double temporal_profile(double t, const Parameter& mu, double period) {
  const double w = 2.0 * std::numbers::pi / period;
  return 1.0 - std::cos(w * t) + mu.mu1 * std::sin(w * mu.mu0 * t);
}

DirichletDatum DirichletDatum::from_blocks(const FomSpatialBlocks& f, FlowSplit split, double period) {
  return {f.g_space, split, period, {}};
}

double DirichletDatum::profile(double t, const Parameter& mu) const {
  return law ? law(t, mu) : temporal_profile(t, mu, period);
}

double DirichletDatum::weight(int k, const Parameter& mu) const {
  if (split == FlowSplit::UnitAndMu2) return k == 0 ? 1.0 : mu.mu2;
  return k == 0 ? mu.mu2 : 1.0 - mu.mu2;
}

Vector DirichletDatum::temporal(int k, const TimeGrid& grid, const Parameter& mu) const {
  Vector g(grid.steps);
  const double w = weight(k, mu);
  for (int n = 0; n < grid.steps; ++n) g[n] = w * profile(grid.t(n + 1), mu);
  return g;
}

Vector DirichletDatum::stacked(int n, const TimeGrid& grid, const Parameter& mu) const {
  Index total = 0;
  for (const auto& g : g_space) total += g.size();
  Vector out(total);
  Index off = 0;
  const double t = grid.t(n + 1);
  for (int k = 0; k < boundaries(); ++k) {
    const auto& g = g_space[static_cast<std::size_t>(k)];
    out.segment(off, g.size()) = weight(k, mu) * profile(t, mu) * g;
    off += g.size();
  }
  return out;
}

SparseMatrix bdf2_step_matrix(const FomSpatialBlocks& f, double dt) {
  const double c = TimeGrid::beta * dt;
  const Index nu = f.n_u, np = f.n_p, nl = f.n_lambda();
  std::vector<linalg::Triplet> t;
  const SparseMatrix top = f.M + c * f.A;
  auto add = [&](const SparseMatrix& s, Index r0, Index c0, double scale) {
    for (Index j = 0; j < s.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(s, j); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
  };
  add(top, 0, 0, 1.0);
  if (np > 0) {
    add(f.Bt_bc, 0, nu, c);
    add(f.B, nu, 0, 1.0);
  }
  if (nl > 0) {
    add(f.Ct_all_bc, 0, nu + np, c);
    add(f.C_all, nu + np, 0, 1.0);
  }
  return linalg::from_triplets(nu + np + nl, nu + np + nl, t);
}

Bdf2Stepper::Bdf2Stepper(const FomSpatialBlocks& f, const TimeGrid& grid)
    : n_u_(f.n_u), n_p_(f.n_p), n_l_(f.n_lambda()), grid_(grid), m_(f.M) {
  if (grid.steps < 1 || !(grid.period > 0.0)) throw ConfigError("time grid needs T > 0 and Nt >= 1");
  k_ = bdf2_step_matrix(f, grid.dt());
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu_->compute(k_);
  if (lu_->info() != Eigen::Success) {
    std::ostringstream os;
    os << "BDF2 step matrix is singular (" << lu_->lastErrorMessage() << ")";
    throw NumericalError(os.str());
  }
  auto lu = lu_;
  cond_ = linalg::estimate_condition_1norm(
      k_, [lu](const Vector& b) { return Vector(lu->solve(b)); },
      [lu](const Vector& b) { return Vector(lu->transpose().solve(b)); });
  if (!std::isfinite(cond_) || cond_ > 1e14) {
    std::ostringstream os;
    os << "BDF2 step matrix is numerically singular, condition estimate " << cond_;
    throw NumericalError(os.str());
  }
}

Vector Bdf2Stepper::step(const Vector& u_prev, const Vector& u_prev2, const Vector& g_now) const {
  Vector rhs = Vector::Zero(n_u_ + n_p_ + n_l_);
  rhs.head(n_u_) = m_ * (TimeGrid::alpha1 * u_prev + TimeGrid::alpha2 * u_prev2);
  rhs.tail(n_l_) = g_now;
  return lu_->solve(rhs);
}

Trajectory Bdf2Stepper::march(const DirichletDatum& datum, const Parameter& mu) const {
  const int nt = grid_.steps;
  Trajectory tr{Matrix(n_u_, nt), Matrix(n_p_, nt), Matrix(n_l_, nt)};
  Vector u1 = Vector::Zero(n_u_), u2 = Vector::Zero(n_u_);
  for (int n = 0; n < nt; ++n) {
    const Vector w = step(u1, u2, datum.stacked(n, grid_, mu));
    tr.u.col(n) = w.head(n_u_);
    tr.p.col(n) = w.segment(n_u_, n_p_);
    tr.lambda.col(n) = w.tail(n_l_);
    u2 = u1;
    u1 = tr.u.col(n);
  }
  return tr;
}

}  // namespace strb::fom
