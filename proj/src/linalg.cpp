#include "strb/linalg.hpp"

#include "strb/error.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

namespace strb::linalg {

Tensor3::Tensor3(Index d1, Index d2, Index d3)
    : dims_{d1, d2, d3}, values_(static_cast<std::size_t>(d1 * d2 * d3), 0.0) {
  if (d1 < 0 || d2 < 0 || d3 < 0) throw DimensionError("Tensor3: negative dimension");
}

Matrix Tensor3::slice(Index k) const {
  Matrix m(dims_[0], dims_[1]);
  for (Index j = 0; j < dims_[1]; ++j)
    for (Index i = 0; i < dims_[0]; ++i) m(i, j) = (*this)(i, j, k);
  return m;
}

void Tensor3::set_slice(Index k, const Matrix& m) {
  if (m.rows() != dims_[0] || m.cols() != dims_[1])
    throw DimensionError("Tensor3::set_slice: shape mismatch");
  for (Index j = 0; j < dims_[1]; ++j)
    for (Index i = 0; i < dims_[0]; ++i) (*this)(i, j, k) = m(i, j);
}

Index energy_rank(const Vector& sigma, double tolerance) {
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw ConfigError("energy tolerance must lie in (0,1)");
  const double total = sigma.squaredNorm();
  if (total == 0.0) return 0;
  const double target = (1.0 - tolerance * tolerance) * total;
  double acc = 0.0;
  for (Index j = 0; j < sigma.size(); ++j) {
    acc += sigma[j] * sigma[j];
    if (acc >= target) return j + 1;
  }
  return sigma.size();
}

void normalize_signs(Matrix& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    Index imax = 0;
    columns.col(j).cwiseAbs().maxCoeff(&imax);
    if (columns(imax, j) < 0.0) columns.col(j) *= -1.0;
  }
}

SvdResult truncated_svd(const Matrix& a, const TruncationCriterion& criterion,
                        bool compute_right) {
  if (a.rows() == 0 || a.cols() == 0) throw DimensionError("truncated_svd: empty matrix");
  if (!a.allFinite()) throw NumericalError("truncated_svd: non-finite entries");

  unsigned opts = Eigen::ComputeThinU;
  if (compute_right) opts |= Eigen::ComputeThinV;
  Eigen::BDCSVD<Matrix> svd(a, opts);

  SvdResult out;
  out.all_singular_values = svd.singularValues();
  Index n = 0;
  if (const auto* r = std::get_if<RankCriterion>(&criterion)) {
    if (r->rank < 0) throw ConfigError("truncated_svd: negative rank");
    n = std::min<Index>(r->rank, out.all_singular_values.size());
  } else {
    n = energy_rank(out.all_singular_values, std::get<EnergyCriterion>(criterion).tolerance);
  }
  out.singular_values = out.all_singular_values.head(n);
  out.left = svd.matrixU().leftCols(n);
  Matrix right;
  if (compute_right) right = svd.matrixV().leftCols(n);
  for (Index j = 0; j < n; ++j) {
    Index imax = 0;
    out.left.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.left(imax, j) < 0.0) {
      out.left.col(j) *= -1.0;
      if (compute_right) right.col(j) *= -1.0;
    }
  }
  if (compute_right) out.right = std::move(right);
  return out;
}

bool is_symmetric(const SparseMatrix& x, double tol) {
  if (x.rows() != x.cols()) return false;
  const SparseMatrix t = x.transpose();
  const SparseMatrix d = x - t;
  double dmax = 0.0, xmax = 0.0;
  for (Index k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (Index k = 0; k < x.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(x, k); it; ++it) xmax = std::max(xmax, std::abs(it.value()));
  return dmax <= tol * xmax;
}

namespace {

// Locate the first non-positive pivot with a plain dense factorization; only
// reached after the sparse factorization already failed.
Index failing_pivot(const SparseMatrix& x) {
  Matrix a = to_dense(x);
  const Index n = a.rows();
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j) - a.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return j;
    d = std::sqrt(d);
    a(j, j) = d;
    for (Index i = j + 1; i < n; ++i)
      a(i, j) = (a(i, j) - a.row(i).head(j).dot(a.row(j).head(j))) / d;
  }
  return -1;
}

}  // namespace

CholeskyFactor::CholeskyFactor(const SparseMatrix& x) {
  if (x.rows() != x.cols()) throw DimensionError("cholesky: matrix not square");
  if (!is_symmetric(x, 1e-12)) throw NumericalError("cholesky: matrix not symmetric");
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(x);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "cholesky: non-positive pivot";
    if (x.rows() <= 6000) os << " at index " << failing_pivot(x);
    throw NumericalError(os.str());
  }
  h_ = llt.matrixU();
  h_.makeCompressed();
}

Matrix CholeskyFactor::apply_upper(const Matrix& v) const { return h_ * v; }

Matrix CholeskyFactor::solve_upper(const Matrix& v) const {
  return h_.triangularView<Eigen::Upper>().solve(v);
}

Matrix CholeskyFactor::solve(const Matrix& v) const {
  const Matrix y = h_.transpose().triangularView<Eigen::Lower>().solve(v);
  return h_.triangularView<Eigen::Upper>().solve(y);
}

Matrix mode_unfold(const Tensor3& t, int mode) {
  const auto [d1, d2, d3] = t.dims();
  if (mode == 1) {
    Matrix m(d1, d2 * d3);
    for (Index k = 0; k < d3; ++k)
      for (Index j = 0; j < d2; ++j)
        for (Index i = 0; i < d1; ++i) m(i, j + d2 * k) = t(i, j, k);
    return m;
  }
  if (mode == 2) {
    Matrix m(d2, d1 * d3);
    for (Index k = 0; k < d3; ++k)
      for (Index j = 0; j < d2; ++j)
        for (Index i = 0; i < d1; ++i) m(j, i + d1 * k) = t(i, j, k);
    return m;
  }
  throw ConfigError("mode_unfold: mode must be 1 or 2");
}

Tensor3 mode_refold(const Matrix& m, int mode, std::array<Index, 3> dims) {
  const auto [d1, d2, d3] = dims;
  Tensor3 t(d1, d2, d3);
  if (mode == 1) {
    if (m.rows() != d1 || m.cols() != d2 * d3) throw DimensionError("mode_refold: shape mismatch");
    for (Index k = 0; k < d3; ++k)
      for (Index j = 0; j < d2; ++j)
        for (Index i = 0; i < d1; ++i) t(i, j, k) = m(i, j + d2 * k);
    return t;
  }
  if (mode == 2) {
    if (m.rows() != d2 || m.cols() != d1 * d3) throw DimensionError("mode_refold: shape mismatch");
    for (Index k = 0; k < d3; ++k)
      for (Index j = 0; j < d2; ++j)
        for (Index i = 0; i < d1; ++i) t(i, j, k) = m(j, i + d1 * k);
    return t;
  }
  throw ConfigError("mode_refold: mode must be 1 or 2");
}

Matrix shifted_gramian(const Matrix& psi, Index s1, Index s2) {
  const Index n = psi.rows();
  if (s1 < 0 || s2 < 0 || s1 >= n || s2 >= n)
    throw DimensionError("shifted_gramian: shift out of range");
  const Index count = n - std::max(s1, s2);
  return psi.middleRows(s1, count).transpose() * psi.middleRows(s2, count);
}

Matrix lagged_gramian(const Matrix& left, const Matrix& right, Index lag_left,
                      Index lag_right) {
  if (left.rows() != right.rows()) throw DimensionError("lagged_gramian: row mismatch");
  if (lag_left < 0 || lag_right < 0) throw DimensionError("lagged_gramian: negative lag");
  const Index n = left.rows();
  const Index n0 = std::max(lag_left, lag_right);
  if (n0 >= n) return Matrix::Zero(left.cols(), right.cols());
  const Index count = n - n0;
  return left.middleRows(n0 - lag_left, count).transpose() *
         right.middleRows(n0 - lag_right, count);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix to_dense(const SparseMatrix& s) { return Matrix(s); }

SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& t) {
  SparseMatrix s(rows, cols);
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return s;
}

double estimate_condition_1norm(const SparseMatrix& k,
                                const std::function<Vector(const Vector&)>& solve,
                                const std::function<Vector(const Vector&)>& solve_transpose) {
  const Index n = k.rows();
  if (n == 0) return 0.0;
  double knorm = 0.0;
  for (Index j = 0; j < k.outerSize(); ++j) {
    double c = 0.0;
    for (SparseMatrix::InnerIterator it(k, j); it; ++it) c += std::abs(it.value());
    knorm = std::max(knorm, c);
  }
  // Hager's power iteration on ||K^{-1}||_1.
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Vector y = solve(x);
    if (!y.allFinite()) return std::numeric_limits<double>::infinity();
    const double ynorm = y.lpNorm<1>();
    const Vector xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Vector z = solve_transpose(xi);
    if (!z.allFinite()) return std::numeric_limits<double>::infinity();
    Index jmax = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&jmax);
    if (iter > 0 && (ynorm <= est || zmax <= z.dot(x))) {
      est = std::max(est, ynorm);
      break;
    }
    est = std::max(est, ynorm);
    x.setZero();
    x[jmax] = 1.0;
  }
  // Higham's alternating-sign safeguard.
  Vector b(n);
  for (Index i = 0; i < n; ++i)
    b[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / static_cast<double>(std::max<Index>(n - 1, 1)));
  const Vector yb = solve(b);
  if (!yb.allFinite()) return std::numeric_limits<double>::infinity();
  est = std::max(est, 2.0 * yb.lpNorm<1>() / (3.0 * static_cast<double>(n)));
  return knorm * est;
}

double smallest_singular_value(const Matrix& a) {
  if (a.cols() == 0) return 0.0;
  if (a.cols() > a.rows()) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()[svd.singularValues().size() - 1];
}

double relative_frobenius(const Matrix& a, const Matrix& b) {
  const double nb = b.norm();
  const double d = (a - b).norm();
  return nb > 0.0 ? d / nb : d;
}

}  // namespace strb::linalg
