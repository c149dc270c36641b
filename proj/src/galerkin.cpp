#include "strb/galerkin.hpp"

#include "strb/error.hpp"

#include <cmath>
#include <sstream>

namespace strb::rom {

using fom::TimeGrid;
using linalg::kron;

namespace {

Matrix row_major_reshape(const Vector& w, Index offset, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = w[offset + i * cols + j];
  return m;
}

}  // namespace

Matrix RomSolution::velocity_matrix(Index n_space) const {
  return row_major_reshape(w, 0, n_space, n_space ? n_u / n_space : 0);
}

Matrix RomSolution::pressure_matrix(Index n_space) const {
  return row_major_reshape(w, n_u, n_space, n_space ? n_p / n_space : 0);
}

fom::Trajectory reconstruct(const RomSolution& s, const pod::SpaceTimeBasis& b) {
  if (s.n_u != b.n_u_st() || s.n_p != b.n_p_st()) throw DimensionError("reconstruct: basis and solution differ");
  fom::Trajectory tr;
  tr.u = b.u.phi * s.velocity_matrix(b.u.phi.cols()) * b.tu.psi.transpose();
  tr.p = b.p.phi * s.pressure_matrix(b.p.phi.cols()) * b.tp.psi.transpose();
  Index nl = 0;
  for (auto v : b.n_lambda) nl += v;
  tr.lambda = Matrix::Zero(nl, b.steps());
  Index row = 0, off = s.n_u + s.n_p;
  for (int k = 0; k < b.boundaries(); ++k) {
    const Index nk = b.n_lambda[static_cast<std::size_t>(k)];
    const Matrix& psi = b.tl[static_cast<std::size_t>(k)].psi;
    tr.lambda.middleRows(row, nk) = row_major_reshape(s.w, off, nk, psi.cols()) * psi.transpose();
    row += nk;
    off += nk * psi.cols();
  }
  return tr;
}

void DenseFactor::compute(const Matrix& a) {
  lu.compute(a);
  rcond = a.size() ? lu.rcond() : 1.0;
  if (!std::isfinite(rcond)) rcond = 0.0;
}

ReducedGalerkinSystem assemble_stgrb(const pod::SpaceTimeBasis& b, const fom::FomSpatialBlocks& f,
                                     const TimeGrid& grid) {
  if (b.u.phi.rows() != f.n_u || b.p.phi.rows() != f.n_p || b.boundaries() != f.n_boundaries())
    throw DimensionError("assemble_stgrb: basis does not match the FOM");
  if (b.steps() != grid.steps) throw DimensionError("assemble_stgrb: temporal basis does not match the grid");
  ReducedGalerkinSystem s;
  s.dt = grid.dt();
  s.steps = grid.steps;
  const double c = TimeGrid::beta * s.dt;
  const Matrix& phu = b.u.phi;
  const Matrix& php = b.p.phi;
  const Matrix& psu = b.tu.psi;
  const Matrix& psp = b.tp.psi;
  s.n_us = phu.cols();
  s.n_ut = psu.cols();
  s.n_ps = php.cols();
  s.n_pt = psp.cols();

  s.M = phu.transpose() * (f.M * phu);
  s.A = phu.transpose() * (f.A * phu);
  s.Bt = phu.transpose() * (f.Bt_bc * php);
  s.B = php.transpose() * (f.B * phu);
  s.G1 = linalg::lagged_gramian(psu, psu, 0, 1);
  s.G2 = linalg::lagged_gramian(psu, psu, 0, 2);
  s.psi_up = psu.transpose() * psp;
  for (int k = 0; k < b.boundaries(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    s.C.push_back(f.C[ku] * phu);
    s.Ct.push_back(phu.transpose() * f.Ct_bc[ku]);
    s.psi_ul.push_back(psu.transpose() * b.tl[ku].psi);
    s.psi_l.push_back(b.tl[ku].psi);
    s.g_space.push_back(f.g_space[ku]);
    s.n_ls.push_back(b.n_lambda[ku]);
    s.n_lt.push_back(b.tl[ku].psi.cols());
  }

  const Index nu = b.n_u_st(), np = b.n_p_st(), nl = b.n_lambda_st();
  s.matrix = Matrix::Zero(nu + np + nl, nu + np + nl);
  const Matrix it = Matrix::Identity(s.n_ut, s.n_ut);
  s.matrix.topLeftCorner(nu, nu) = kron(s.M + c * s.A, it) - TimeGrid::alpha1 * kron(s.M, s.G1) -
                                   TimeGrid::alpha2 * kron(s.M, s.G2);
  if (np > 0) {
    s.matrix.block(0, nu, nu, np) = c * kron(s.Bt, s.psi_up);
    s.matrix.block(nu, 0, np, nu) = kron(s.B, s.psi_up.transpose());
  }
  for (int k = 0; k < b.boundaries(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Index off = nu + np + b.lambda_offset(k), nk = b.n_lambda_st(k);
    s.matrix.block(0, off, nu, nk) = c * kron(s.Ct[ku], s.psi_ul[ku]);
    s.matrix.block(off, 0, nk, nu) = kron(s.C[ku], s.psi_ul[ku].transpose());
  }
  factorize(s);
  return s;
}

void factorize(ReducedGalerkinSystem& s) { s.factor.compute(s.matrix); }

Vector online_rhs_stgrb(const ReducedGalerkinSystem& s, const fom::DirichletDatum& datum, const TimeGrid& grid,
                        const fom::Parameter& mu) {
  if (datum.boundaries() != static_cast<int>(s.psi_l.size())) throw DimensionError("online rhs: boundary count differs");
  Vector f = Vector::Zero(s.size());
  Index off = s.n_u_st() + s.n_p_st();
  for (std::size_t k = 0; k < s.psi_l.size(); ++k) {
    const Vector gt = s.psi_l[k].transpose() * datum.temporal(static_cast<int>(k), grid, mu);
    const Vector& gs = s.g_space[k];
    const Index nt = gt.size();
    for (Index i = 0; i < gs.size(); ++i) f.segment(off + i * nt, nt) = gs[i] * gt;
    off += gs.size() * nt;
  }
  return f;
}

RomSolution solve_stgrb(const ReducedGalerkinSystem& s, const Vector& rhs) {
  if (rhs.size() != s.size()) throw DimensionError("solve_stgrb: rhs length mismatch");
  if (s.factor.rcond < 1e-14) {
    std::ostringstream os;
    os << "ST-GRB operator is numerically singular (condition estimate " << s.factor.condition()
       << "); run `strb diagnose` to inspect the temporal inf-sup ranks";
    throw NumericalError(os.str());
  }
  RomSolution out;
  out.w = s.factor.lu.solve(rhs);
  out.n_u = s.n_u_st();
  out.n_p = s.n_p_st();
  for (std::size_t k = 0; k < s.n_ls.size(); ++k) out.n_l.push_back(s.n_ls[k] * s.n_lt[k]);
  return out;
}

SrbTfo::SrbTfo(const Matrix& phi_u, const Matrix& phi_p, const fom::FomSpatialBlocks& f, const TimeGrid& grid)
    : phi_u_(phi_u), phi_p_(phi_p), grid_(grid) {
  if (phi_u.rows() != f.n_u || phi_p.rows() != f.n_p) throw DimensionError("SRB-TFO: basis does not match the FOM");
  const double c = TimeGrid::beta * grid.dt();
  nu_ = phi_u.cols();
  np_ = phi_p.cols();
  nl_ = f.n_lambda();
  m_ = phi_u.transpose() * (f.M * phi_u);
  step_ = Matrix::Zero(nu_ + np_ + nl_, nu_ + np_ + nl_);
  step_.topLeftCorner(nu_, nu_) = m_ + c * (phi_u.transpose() * (f.A * phi_u));
  step_.block(0, nu_, nu_, np_) = c * (phi_u.transpose() * (f.Bt_bc * phi_p));
  step_.block(nu_, 0, np_, nu_) = phi_p.transpose() * (f.B * phi_u);
  step_.block(0, nu_ + np_, nu_, nl_) = c * (phi_u.transpose() * f.Ct_all_bc);
  step_.block(nu_ + np_, 0, nl_, nu_) = f.C_all * phi_u;
  factor();
}

SrbTfo::SrbTfo(const Matrix& phi_u, const Matrix& phi_p, const Matrix& mass, const Matrix& step, const TimeGrid& grid)
    : phi_u_(phi_u), phi_p_(phi_p), grid_(grid), m_(mass), step_(step) {
  nu_ = phi_u.cols();
  np_ = phi_p.cols();
  nl_ = step.rows() - nu_ - np_;
  if (mass.rows() != nu_ || mass.cols() != nu_ || step.cols() != step.rows() || nl_ < 0)
    throw DimensionError("SRB-TFO: stored operator does not match the bases");
  factor();
}

void SrbTfo::factor() {
  factor_.compute(step_);
  if (factor_.rcond < 1e-14) {
    std::ostringstream os;
    os << "SRB-TFO step matrix is numerically singular (condition estimate " << factor_.condition() << ")";
    throw NumericalError(os.str());
  }
}

SrbTfo::Coefficients SrbTfo::march(const fom::DirichletDatum& datum, const fom::Parameter& mu) const {
  const int nt = grid_.steps;
  Coefficients c{Matrix(nu_, nt), Matrix(np_, nt), Matrix(nl_, nt)};
  Vector u1 = Vector::Zero(nu_), u2 = Vector::Zero(nu_), rhs = Vector::Zero(nu_ + np_ + nl_);
  for (int n = 0; n < nt; ++n) {
    rhs.head(nu_) = m_ * (TimeGrid::alpha1 * u1 + TimeGrid::alpha2 * u2);
    rhs.tail(nl_) = datum.stacked(n, grid_, mu);
    const Vector w = factor_.lu.solve(rhs);
    c.u.col(n) = w.head(nu_);
    c.p.col(n) = w.segment(nu_, np_);
    c.lambda.col(n) = w.tail(nl_);
    u2 = u1;
    u1 = c.u.col(n);
  }
  return c;
}

fom::Trajectory SrbTfo::reconstruct(const Coefficients& c) const {
  return {phi_u_ * c.u, phi_p_ * c.p, c.lambda};
}

}  // namespace strb::rom
