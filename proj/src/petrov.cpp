#include "strb/petrov.hpp"

#include "strb/error.hpp"

#include <Eigen/SparseCholesky>

namespace strb::rom {

using fom::TimeGrid;
using linalg::kron;
using linalg::lagged_gramian;

NormSurrogate NormSurrogate::diagonal(const fom::FomSpatialBlocks& f) {
  NormSurrogate p;
  p.p_u = f.X_u.diagonal();
  p.p_p = f.X_p.diagonal();
  if ((p.p_u.array() <= 0.0).any() || (p.p_p.array() <= 0.0).any())
    throw NumericalError("norm surrogate has a non-positive diagonal entry");
  return p;
}

NormSurrogate NormSurrogate::exact_norm(const fom::FomSpatialBlocks& f) {
  NormSurrogate p = diagonal(f);
  p.exact = true;
  p.x_u = f.X_u;
  p.x_p = f.X_p;
  return p;
}

namespace {

Matrix kernel(const Matrix& x, const Matrix& y, const Vector& diag, bool exact, const SparseMatrix& full) {
  if (!exact) return x.transpose() * (diag.cwiseInverse().asDiagonal() * y);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(full);
  if (ldlt.info() != Eigen::Success) throw NumericalError("exact norm factorization failed");
  return x.transpose() * Matrix(ldlt.solve(y));
}

}  // namespace

Matrix NormSurrogate::kernel_u(const Matrix& x, const Matrix& y) const { return kernel(x, y, p_u, exact, x_u); }
Matrix NormSurrogate::kernel_p(const Matrix& x, const Matrix& y) const { return kernel(x, y, p_p, exact, x_p); }

ReducedPGSystem assemble_stpgrb(const pod::SpaceTimeBasis& b, const fom::FomSpatialBlocks& f,
                                const TimeGrid& grid, const NormSurrogate& p) {
  if (b.u.phi.rows() != f.n_u || b.p.phi.rows() != f.n_p || b.boundaries() != f.n_boundaries())
    throw DimensionError("assemble_stpgrb: basis does not match the FOM");
  if (b.steps() != grid.steps) throw DimensionError("assemble_stpgrb: temporal basis does not match the grid");
  if (p.p_u.size() != f.n_u || p.p_p.size() != f.n_p) throw DimensionError("assemble_stpgrb: surrogate size mismatch");
  if ((p.p_u.array() <= 0.0).any() || (p.p_p.array() <= 0.0).any())
    throw NumericalError("assemble_stpgrb: zero diagonal in the norm surrogate");

  ReducedPGSystem s;
  s.steps = grid.steps;
  const double c = TimeGrid::beta * grid.dt();
  const Matrix& phu = b.u.phi;
  const Matrix& psu = b.tu.psi;
  const Matrix& psp = b.tp.psi;
  s.n_us = phu.cols();
  s.n_ut = psu.cols();
  s.n_ps = b.p.phi.cols();
  s.n_pt = psp.cols();
  s.psi_u = psu;

  // Half-reduced blocks.
  const Matrix mbar = f.M * phu;
  const Matrix mabar = mbar + c * (f.A * phu);
  const Matrix bbar = f.B * phu;
  const Matrix btbar = f.Bt_bc * b.p.phi;
  const Matrix cbar = f.C_all * phu;
  std::vector<Matrix> ctk;
  for (int k = 0; k < b.boundaries(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    ctk.push_back(linalg::to_dense(f.Ct_bc[ku]));
    s.rhs_kernel.push_back((f.C[ku] * phu).transpose() * f.g_space[ku]);
    s.n_ls.push_back(b.n_lambda[ku]);
    s.n_lt.push_back(b.tl[ku].psi.cols());
  }

  const Index nu = b.n_u_st(), np = b.n_p_st(), nl = b.n_lambda_st();
  s.matrix = Matrix::Zero(nu + np + nl, nu + np + nl);
  const Matrix iu = Matrix::Identity(s.n_ut, s.n_ut);
  auto lag = [&](const Matrix& r, Index a, Index bb) { return lagged_gramian(psu, r, a, bb); };

  // Velocity-velocity: BDF2 residual rows, then the constraint rows.
  const Matrix k_mama = p.kernel_u(mabar, mabar);
  const Matrix k_mm = p.kernel_u(mbar, mbar);
  const Matrix k_mam = p.kernel_u(mabar, mbar);
  const Matrix k_mma = p.kernel_u(mbar, mabar);
  const Matrix t_mm = 16.0 / 9.0 * lag(psu, 1, 1) + 1.0 / 9.0 * lag(psu, 2, 2) - 4.0 / 9.0 * lag(psu, 1, 2) -
                      4.0 / 9.0 * lag(psu, 2, 1);
  Matrix a11 = kron(k_mama, iu) + kron(k_mm, t_mm) +
               kron(k_mam, -4.0 / 3.0 * lag(psu, 0, 1) + 1.0 / 3.0 * lag(psu, 0, 2)) +
               kron(k_mma, -4.0 / 3.0 * lag(psu, 1, 0) + 1.0 / 3.0 * lag(psu, 2, 0));
  a11 += kron(p.kernel_p(bbar, bbar), iu);
  a11 += kron(cbar.transpose() * cbar, iu);
  s.matrix.topLeftCorner(nu, nu) = a11;

  if (np > 0) {
    const Matrix a12 = c * (kron(p.kernel_u(mabar, btbar), lag(psp, 0, 0)) -
                            4.0 / 3.0 * kron(p.kernel_u(mbar, btbar), lag(psp, 1, 0)) +
                            1.0 / 3.0 * kron(p.kernel_u(mbar, btbar), lag(psp, 2, 0)));
    s.matrix.block(0, nu, nu, np) = a12;
    s.matrix.block(nu, nu, np, np) = c * c * kron(p.kernel_u(btbar, btbar), Matrix::Identity(s.n_pt, s.n_pt));
  }
  for (int k = 0; k < b.boundaries(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Matrix& psl = b.tl[ku].psi;
    const Index ok = nu + np + b.lambda_offset(k), nk = b.n_lambda_st(k);
    const Matrix a13 = c * (kron(p.kernel_u(mabar, ctk[ku]), lag(psl, 0, 0)) -
                            4.0 / 3.0 * kron(p.kernel_u(mbar, ctk[ku]), lag(psl, 1, 0)) +
                            1.0 / 3.0 * kron(p.kernel_u(mbar, ctk[ku]), lag(psl, 2, 0)));
    s.matrix.block(0, ok, nu, nk) = a13;
    if (np > 0)
      s.matrix.block(nu, ok, np, nk) = c * c * kron(p.kernel_u(btbar, ctk[ku]), psp.transpose() * psl);
    for (int k2 = k; k2 < b.boundaries(); ++k2) {
      const auto k2u = static_cast<std::size_t>(k2);
      const Index o2 = nu + np + b.lambda_offset(k2), n2 = b.n_lambda_st(k2);
      s.matrix.block(ok, o2, nk, n2) = c * c * kron(p.kernel_u(ctk[ku], ctk[k2u]), psl.transpose() * b.tl[k2u].psi);
    }
  }
  // Mirror the upper triangle so the operator is exactly symmetric.
  const Matrix upper_t = s.matrix.transpose();
  s.matrix.triangularView<Eigen::StrictlyLower>() = upper_t.triangularView<Eigen::StrictlyLower>();
  factorize(s);
  return s;
}

void factorize(ReducedPGSystem& s) {
  s.llt.compute(s.matrix);
  s.use_llt = s.llt.info() == Eigen::Success;
  if (!s.use_llt) s.lu.compute(s.matrix);
}

Vector online_rhs_stpgrb(const ReducedPGSystem& s, const fom::DirichletDatum& datum, const TimeGrid& grid,
                         const fom::Parameter& mu) {
  if (datum.boundaries() != static_cast<int>(s.rhs_kernel.size()))
    throw DimensionError("online rhs: boundary count differs");
  Vector f = Vector::Zero(s.size());
  Matrix fu = Matrix::Zero(s.n_us, s.n_ut);
  for (std::size_t k = 0; k < s.rhs_kernel.size(); ++k)
    fu += s.rhs_kernel[k] * (s.psi_u.transpose() * datum.temporal(static_cast<int>(k), grid, mu)).transpose();
  for (Index i = 0; i < s.n_us; ++i) f.segment(i * s.n_ut, s.n_ut) = fu.row(i).transpose();
  return f;
}

RomSolution solve_stpgrb(const ReducedPGSystem& s, const Vector& rhs) {
  if (rhs.size() != s.size()) throw DimensionError("solve_stpgrb: rhs length mismatch");
  RomSolution out;
  if (s.use_llt) {
    out.w = s.llt.solve(rhs);
  } else {
    if (s.lu.rcond < 1e-14)
      throw NumericalError("ST-PGRB normal matrix is singular; check the column rank of the projected operator");
    out.w = s.lu.lu.solve(rhs);
  }
  if (!out.w.allFinite())
    throw NumericalError("ST-PGRB solve produced non-finite values; check the column rank of the projected operator");
  out.n_u = s.n_u_st();
  out.n_p = s.n_p_st();
  for (std::size_t k = 0; k < s.n_ls.size(); ++k) out.n_l.push_back(s.n_ls[k] * s.n_lt[k]);
  return out;
}

}  // namespace strb::rom
