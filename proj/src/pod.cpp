#include "strb/pod.hpp"

#include "strb/error.hpp"

namespace strb::pod {

std::string to_string(Field f) {
  switch (f) {
    case Field::Velocity: return "velocity";
    case Field::Pressure: return "pressure";
    case Field::Multiplier: return "multiplier";
  }
  return "unknown";
}

std::string to_string(NormTag n) {
  switch (n) {
    case NormTag::Velocity: return "X_u";
    case NormTag::Pressure: return "X_p";
    case NormTag::Identity: return "identity";
  }
  return "unknown";
}

SnapshotSet collect_snapshots(const fom::FomSpatialBlocks& f, const std::vector<fom::Trajectory>& runs,
                              const std::vector<fom::Parameter>& params) {
  if (runs.empty() || runs.size() != params.size()) throw DimensionError("snapshots: runs and parameters differ");
  const Index nt = runs.front().u.cols();
  const Index nmu = static_cast<Index>(runs.size());
  SnapshotSet s;
  s.velocity = {Field::Velocity, -1, Tensor3(f.n_u, nt, nmu), params};
  s.pressure = {Field::Pressure, -1, Tensor3(f.n_p, nt, nmu), params};
  for (int k = 0; k < f.n_boundaries(); ++k)
    s.multipliers.push_back({Field::Multiplier, k, Tensor3(f.n_lambda(k), nt, nmu), params});
  for (Index m = 0; m < nmu; ++m) {
    const auto& r = runs[static_cast<std::size_t>(m)];
    if (r.u.cols() != nt) throw DimensionError("snapshots: inconsistent step counts");
    s.velocity.data.set_slice(m, r.u);
    s.pressure.data.set_slice(m, r.p);
    for (int k = 0; k < f.n_boundaries(); ++k) {
      const auto& b = f.boundaries[static_cast<std::size_t>(k)];
      s.multipliers[static_cast<std::size_t>(k)].data.set_slice(m, r.lambda.middleRows(b.offset, b.n_lambda));
    }
  }
  return s;
}

SpaceBasis spatial_pod(const SnapshotTensor& s, const SparseMatrix& x, NormTag tag,
                       const TruncationCriterion& criterion) {
  const Matrix chi = linalg::mode_unfold(s.data, 1);
  SpaceBasis out;
  out.norm = tag;
  if (const auto* e = std::get_if<linalg::EnergyCriterion>(&criterion)) out.tolerance = e->tolerance;
  if (x.size() == 0 || tag == NormTag::Identity) {
    auto svd = linalg::truncated_svd(chi, criterion);
    out.phi = std::move(svd.left);
    out.sigma = std::move(svd.singular_values);
    return out;
  }
  if (x.rows() != chi.rows()) throw DimensionError("spatial_pod: norm matrix size mismatch");
  const linalg::CholeskyFactor h(x);
  auto svd = linalg::truncated_svd(h.apply_upper(chi), criterion);
  // phi = H^{-1} U gives phi^T X phi = U^T H^{-T} H^T H H^{-1} U = I.
  out.phi = h.solve_upper(svd.left);
  linalg::normalize_signs(out.phi);
  out.sigma = std::move(svd.singular_values);
  return out;
}

TimeBasis temporal_pod(const SnapshotTensor& s, const TruncationCriterion& criterion) {
  auto svd = linalg::truncated_svd(linalg::mode_unfold(s.data, 2), criterion);
  TimeBasis out;
  out.psi = std::move(svd.left);
  out.sigma = std::move(svd.singular_values);
  if (const auto* e = std::get_if<linalg::EnergyCriterion>(&criterion)) out.tolerance = e->tolerance;
  return out;
}

Index SpaceTimeBasis::n_lambda_st(int k) const {
  return n_lambda[static_cast<std::size_t>(k)] * tl[static_cast<std::size_t>(k)].psi.cols();
}

Index SpaceTimeBasis::n_lambda_st() const {
  Index n = 0;
  for (int k = 0; k < boundaries(); ++k) n += n_lambda_st(k);
  return n;
}

Index SpaceTimeBasis::lambda_offset(int k) const {
  Index n = 0;
  for (int j = 0; j < k; ++j) n += n_lambda_st(j);
  return n;
}

Vector SpaceTimeBasis::velocity_column(Index i, Index j) const {
  const Matrix outer = u.phi.col(i) * tu.psi.col(j).transpose();
  return Eigen::Map<const Vector>(outer.data(), outer.size());
}

Matrix SpaceTimeBasis::materialize() const {
  const Index nt = steps();
  const Index nu = u.phi.rows(), np = p.phi.rows();
  Index nl = 0;
  for (auto v : n_lambda) nl += v;
  Matrix pi = Matrix::Zero(nt * (nu + np + nl), size());
  const Index rp = nt * nu, rl = nt * (nu + np);
  for (Index i = 0; i < u.phi.cols(); ++i)
    for (Index j = 0; j < tu.psi.cols(); ++j)
      pi.col(i * tu.psi.cols() + j).head(rp) = linalg::kron(tu.psi.col(j), u.phi.col(i));
  for (Index i = 0; i < p.phi.cols(); ++i)
    for (Index j = 0; j < tp.psi.cols(); ++j)
      pi.col(n_u_st() + i * tp.psi.cols() + j).segment(rp, nt * np) = linalg::kron(tp.psi.col(j), p.phi.col(i));
  Index row_off = 0;
  for (int k = 0; k < boundaries(); ++k) {
    const Index nk = n_lambda[static_cast<std::size_t>(k)];
    const Matrix& psi = tl[static_cast<std::size_t>(k)].psi;
    for (Index i = 0; i < nk; ++i)
      for (Index j = 0; j < psi.cols(); ++j) {
        const Index col = n_u_st() + n_p_st() + lambda_offset(k) + i * psi.cols() + j;
        // Multiplier dofs of boundary k sit at rows [row_off, row_off + nk) of each step.
        for (Index n = 0; n < nt; ++n) pi(rl + n * nl + row_off + i, col) = psi(n, j);
      }
    row_off += nk;
  }
  return pi;
}

SpaceTimeBasis assemble_space_time_basis(const FieldBases& b) {
  if (!b.u || !b.p || !b.tu || !b.tp) throw ConfigError("space-time basis: missing field basis");
  if (b.tl.size() != b.n_lambda.size()) throw ConfigError("space-time basis: missing multiplier temporal basis");
  const Index nt = b.tu->psi.rows();
  if (b.tp->psi.rows() != nt) throw DimensionError("space-time basis: temporal bases differ in N^t");
  for (const auto& t : b.tl)
    if (t.psi.rows() != nt) throw DimensionError("space-time basis: temporal bases differ in N^t");
  return {*b.u, *b.p, *b.tu, *b.tp, b.tl, b.n_lambda};
}

double space_time_norm_squared(const Matrix& w, const SparseMatrix& x) {
  if (x.size() == 0) return w.squaredNorm();
  return w.cwiseProduct(x * w).sum();
}

}  // namespace strb::pod
