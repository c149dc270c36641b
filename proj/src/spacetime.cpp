#include "strb/spacetime.hpp"

#include "strb/error.hpp"

namespace strb::fom {

SpaceTimeSystem::SpaceTimeSystem(const FomSpatialBlocks& f, const TimeGrid& grid)
    : f_(&f), grid_(grid), steps_(grid.steps), n_u_(f.n_u), n_p_(f.n_p), n_l_(f.n_lambda()) {
  if (steps_ < 1) throw ConfigError("space-time system needs Nt >= 1");
}

Vector SpaceTimeSystem::pack(const Trajectory& tr) const {
  Vector w(size());
  w.head(velocity_size()) = Eigen::Map<const Vector>(tr.u.data(), tr.u.size());
  w.segment(velocity_size(), pressure_size()) = Eigen::Map<const Vector>(tr.p.data(), tr.p.size());
  w.tail(multiplier_size()) = Eigen::Map<const Vector>(tr.lambda.data(), tr.lambda.size());
  return w;
}

Trajectory SpaceTimeSystem::unpack(const Vector& w) const {
  if (w.size() != size()) throw DimensionError("space-time vector has wrong length");
  Trajectory tr;
  tr.u = Eigen::Map<const Matrix>(w.data(), n_u_, steps_);
  tr.p = Eigen::Map<const Matrix>(w.data() + velocity_size(), n_p_, steps_);
  tr.lambda = Eigen::Map<const Matrix>(w.data() + velocity_size() + pressure_size(), n_l_, steps_);
  return tr;
}

Vector SpaceTimeSystem::apply(const Vector& w) const {
  const Trajectory x = unpack(w);
  const double c = TimeGrid::beta * grid_.dt();
  Trajectory y{Matrix(n_u_, steps_), Matrix(n_p_, steps_), Matrix(n_l_, steps_)};
  const Matrix mu = f_->M * x.u;
  y.u = mu + c * (f_->A * x.u);
  for (int n = 1; n < steps_; ++n) y.u.col(n) -= TimeGrid::alpha1 * mu.col(n - 1);
  for (int n = 2; n < steps_; ++n) y.u.col(n) -= TimeGrid::alpha2 * mu.col(n - 2);
  if (n_p_ > 0) {
    y.u += c * (f_->Bt_bc * x.p);
    y.p = f_->B * x.u;
  }
  if (n_l_ > 0) {
    y.u += c * (f_->Ct_all_bc * x.lambda);
    y.lambda = f_->C_all * x.u;
  }
  return pack(y);
}

SparseMatrix SpaceTimeSystem::materialize() const {
  const double c = TimeGrid::beta * grid_.dt();
  std::vector<linalg::Triplet> t;
  auto add = [&](const SparseMatrix& s, Index r0, Index c0, double scale) {
    for (Index j = 0; j < s.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(s, j); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
  };
  const SparseMatrix diag = f_->M + c * f_->A;
  const Index pu = velocity_size(), pp = pu + pressure_size();
  for (int n = 0; n < steps_; ++n) {
    const Index ru = n * n_u_;
    add(diag, ru, ru, 1.0);
    if (n >= 1) add(f_->M, ru, ru - n_u_, -TimeGrid::alpha1);
    if (n >= 2) add(f_->M, ru, ru - 2 * n_u_, -TimeGrid::alpha2);
    if (n_p_ > 0) {
      add(f_->Bt_bc, ru, pu + n * n_p_, c);
      add(f_->B, pu + n * n_p_, ru, 1.0);
    }
    if (n_l_ > 0) {
      add(f_->Ct_all_bc, ru, pp + n * n_l_, c);
      add(f_->C_all, pp + n * n_l_, ru, 1.0);
    }
  }
  return linalg::from_triplets(size(), size(), t);
}

Vector SpaceTimeSystem::rhs(const DirichletDatum& datum, const Parameter& mu) const {
  Vector f = Vector::Zero(size());
  const Index pp = velocity_size() + pressure_size();
  for (int n = 0; n < steps_; ++n) f.segment(pp + n * n_l_, n_l_) = datum.stacked(n, grid_, mu);
  return f;
}

}  // namespace strb::fom
