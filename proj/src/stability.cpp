#include "strb/stability.hpp"

#include "strb/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <iostream>

namespace strb::stability {

SupremizerSet pressure_supremizers(const fom::FomSpatialBlocks& f, const Matrix& phi_p) {
  if (phi_p.cols() == 0) throw ConfigError("pressure supremizers: empty pressure basis");
  if (phi_p.rows() != f.n_p) throw DimensionError("pressure supremizers: basis size mismatch");
  const Index nu = f.n_u, nl = f.n_lambda();
  std::vector<linalg::Triplet> t;
  auto add = [&](const SparseMatrix& s, Index r0, Index c0) {
    for (Index j = 0; j < s.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(s, j); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
  };
  add(f.X_u, 0, 0);
  add(f.Ct_all_bc, 0, nu);
  add(f.C_all, nu, 0);
  const SparseMatrix k = linalg::from_triplets(nu + nl, nu + nl, t);
  Eigen::SparseLU<SparseMatrix> lu(k);
  if (lu.info() != Eigen::Success)
    throw NumericalError("pressure supremizers: singular saddle matrix (multiplier basis rank loss?)");
  Matrix rhs = Matrix::Zero(nu + nl, phi_p.cols());
  rhs.topRows(nu) = f.Bt_bc * phi_p;
  const Matrix sol = lu.solve(rhs);
  if (!sol.allFinite()) throw NumericalError("pressure supremizers: non-finite solution");
  return {SupremizerKind::Pressure, -1, sol.topRows(nu)};
}

SupremizerSet multiplier_supremizers(const fom::FomSpatialBlocks& f, int k) {
  if (k < 0 || k >= f.n_boundaries()) throw ConfigError("multiplier supremizers: boundary index out of range");
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(f.X_u);
  if (ldlt.info() != Eigen::Success) throw NumericalError("multiplier supremizers: X_u factorization failed");
  const Matrix rhs = linalg::to_dense(f.Ct_bc[static_cast<std::size_t>(k)]);
  return {SupremizerKind::Multiplier, k, ldlt.solve(rhs)};
}

EnrichedSpaceBasis enrich_space_basis(const Matrix& phi_u, const SparseMatrix& x_u,
                                      const std::vector<SupremizerSet>& sets) {
  if (phi_u.cols() == 0) throw ConfigError("enrichment: empty velocity basis");
  std::vector<std::pair<Vector, ColumnOrigin>> cand;
  for (Index j = 0; j < phi_u.cols(); ++j) cand.emplace_back(phi_u.col(j), ColumnOrigin::Pod);
  for (const auto& s : sets) {
    const auto o = s.kind == SupremizerKind::Pressure ? ColumnOrigin::PressureSupremizer
                                                      : ColumnOrigin::MultiplierSupremizer;
    for (Index j = 0; j < s.vectors.cols(); ++j) cand.emplace_back(s.vectors.col(j), o);
  }
  EnrichedSpaceBasis out;
  std::vector<Vector> cols, xcols;  // basis columns and X times them
  for (auto& [v, origin] : cand) {
    const double norm0 = std::sqrt(std::max(0.0, v.dot(x_u * v)));
    if (norm0 == 0.0) {
      ++out.dropped;
      continue;
    }
    Vector w = v;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t q = 0; q < cols.size(); ++q) w -= xcols[q].dot(w) * cols[q];
    Vector xw = x_u * w;
    const double nrm = std::sqrt(std::max(0.0, w.dot(xw)));
    if (nrm < 1e-12 * norm0) {
      ++out.dropped;
      continue;
    }
    cols.push_back(w / nrm);
    xcols.push_back(xw / nrm);
    out.origin.push_back(origin);
  }
  if (out.dropped > 0 && cols.size() > static_cast<std::size_t>(phi_u.cols()))
    std::clog << "warning: " << out.dropped << " supremizer(s) dropped as linearly dependent\n";
  out.phi.resize(phi_u.rows(), static_cast<Index>(cols.size()));
  for (std::size_t q = 0; q < cols.size(); ++q) out.phi.col(static_cast<Index>(q)) = cols[q];
  return out;
}

int TemporalEnrichmentReport::total_added() const {
  int n = 0;
  for (const auto& s : steps) n += s.added;
  return n;
}

Matrix temporal_enrich(const Matrix& psi_u_in, const Matrix& psi_d, double eps_t, int* added) {
  if (eps_t < 0.0) throw ConfigError("temporal enrichment: eps_t must be >= 0");
  if (psi_u_in.rows() != psi_d.rows()) throw DimensionError("temporal enrichment: N^t mismatch");
  // Exact dependence is never observed in floating point; treat residuals at
  // round-off level as zero.
  const double trigger = std::max(eps_t, 1e-10);
  Matrix psi_u = psi_u_in;
  int count = 0;
  const Index nd = psi_d.cols();
  Index l = 0;
  Matrix xi = psi_u.transpose() * psi_d;
  while (l < nd) {
    Vector r = xi.col(l);
    for (Index j = 0; j < l; ++j) {
      const double den = xi.col(j).squaredNorm();
      if (den > 0.0) r -= (xi.col(l).dot(xi.col(j)) / den) * xi.col(j);
    }
    if (r.norm() <= trigger) {
      const Vector star = psi_d.col(l);
      Vector plus = star - psi_u * (psi_u.transpose() * star);
      plus -= psi_u * (psi_u.transpose() * plus);
      const double den = plus.norm();
      if (den < 1e-13) throw NumericalError("temporal enrichment: dual mode lies in the velocity span");
      psi_u.conservativeResize(Eigen::NoChange, psi_u.cols() + 1);
      psi_u.col(psi_u.cols() - 1) = plus / den;
      ++count;
      xi = psi_u.transpose() * psi_d;
      l = 0;
    } else {
      xi.col(l) = r;
      ++l;
    }
  }
  if (added) *added = count;
  return psi_u;
}

TemporalEnrichmentReport temporal_enrich_all(pod::SpaceTimeBasis& basis, double eps_t, DualOrder order) {
  TemporalEnrichmentReport rep;
  rep.eps_t = eps_t;
  auto run = [&](const Matrix& psi_d, const std::string& name) {
    TemporalEnrichmentStep s;
    s.dual = name;
    basis.tu.psi = temporal_enrich(basis.tu.psi, psi_d, eps_t, &s.added);
    rep.steps.push_back(s);
  };
  auto multipliers = [&] {
    for (int k = 0; k < basis.boundaries(); ++k)
      run(basis.tl[static_cast<std::size_t>(k)].psi, "multiplier" + std::to_string(k + 1));
  };
  if (order == DualOrder::PressureFirst) {
    run(basis.tp.psi, "pressure");
    multipliers();
  } else {
    multipliers();
    run(basis.tp.psi, "pressure");
  }
  // Final couplings, after all enrichments.
  for (auto& s : rep.steps) {
    const Matrix* d = &basis.tp.psi;
    if (s.dual != "pressure") d = &basis.tl[static_cast<std::size_t>(std::stoi(s.dual.substr(10)) - 1)].psi;
    s.sigma_min = linalg::smallest_singular_value(basis.tu.psi.transpose() * *d);
  }
  return rep;
}

RankReport rank_diagnostics(const Matrix& psi_u, const Matrix& psi_p, const std::vector<Matrix>& psi_l) {
  RankReport r;
  r.sigma_up = linalg::smallest_singular_value(psi_u.transpose() * psi_p);
  r.violation = r.sigma_up < 1e-10;
  for (const auto& l : psi_l) {
    r.sigma_ul.push_back(linalg::smallest_singular_value(psi_u.transpose() * l));
    r.violation = r.violation || r.sigma_ul.back() < 1e-10;
  }
  return r;
}

RankReport rank_diagnostics(const pod::SpaceTimeBasis& basis) {
  std::vector<Matrix> l;
  for (const auto& t : basis.tl) l.push_back(t.psi);
  return rank_diagnostics(basis.tu.psi, basis.tp.psi, l);
}

double fom_infsup_constant(const fom::FomSpatialBlocks& f) {
  // Free velocity dofs only; walls carry no test functions.
  std::vector<char> wall(static_cast<std::size_t>(f.n_u), 0);
  for (auto i : f.wall_dofs) wall[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> freeidx;
  for (Index i = 0; i < f.n_u; ++i)
    if (!wall[static_cast<std::size_t>(i)]) freeidx.push_back(i);
  const Matrix xu = linalg::to_dense(f.X_u);
  const Matrix bt = linalg::to_dense(f.Bt_bc);
  const Index nf = static_cast<Index>(freeidx.size());
  Matrix xf(nf, nf), bf(nf, f.n_p);
  for (Index a = 0; a < nf; ++a) {
    bf.row(a) = bt.row(freeidx[static_cast<std::size_t>(a)]);
    for (Index b = 0; b < nf; ++b) xf(a, b) = xu(freeidx[static_cast<std::size_t>(a)], freeidx[static_cast<std::size_t>(b)]);
  }
  // beta^2 = min eig of B X_u^{-1} B^T relative to X_p.
  const Matrix s = bf.transpose() * Eigen::LLT<Matrix>(xf).solve(bf);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(s, linalg::to_dense(f.X_p), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()[0]));
}

}  // namespace strb::stability
