#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace strb::linalg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;  // column-major
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Index = Eigen::Index;

/// Third-order tensor stored with the first index fastest and the third slowest.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index d1, Index d2, Index d3);

  [[nodiscard]] std::array<Index, 3> dims() const { return dims_; }
  [[nodiscard]] Index dim(int k) const { return dims_[static_cast<std::size_t>(k)]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  double& operator()(Index i, Index j, Index k) { return values_[offset(i, j, k)]; }
  double operator()(Index i, Index j, Index k) const { return values_[offset(i, j, k)]; }

  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Frontal slice k as a d1 x d2 matrix.
  [[nodiscard]] Matrix slice(Index k) const;
  void set_slice(Index k, const Matrix& m);

 private:
  [[nodiscard]] std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k));
  }

  std::array<Index, 3> dims_{0, 0, 0};
  std::vector<double> values_;
};

struct RankCriterion {
  Index rank;
};

/// Keep the smallest N with sum_{j<=N} s_j^2 / sum_j s_j^2 >= 1 - tol^2.
struct EnergyCriterion {
  double tolerance;
};

using TruncationCriterion = std::variant<RankCriterion, EnergyCriterion>;

struct SvdResult {
  Matrix left;                 // U, retained columns only
  Vector singular_values;      // retained, nonincreasing
  Vector all_singular_values;  // full spectrum used for the energy denominator
  std::optional<Matrix> right; // Z, retained columns, when requested
};

/// Minimal rank meeting the energy criterion for a nonincreasing spectrum.
Index energy_rank(const Vector& sigma, double tolerance);

/// Thin SVD truncated by rank or energy. Signs are fixed so the
/// largest-magnitude entry of each left vector is positive.
SvdResult truncated_svd(const Matrix& a, const TruncationCriterion& criterion,
                        bool compute_right = false);

/// Sparse Cholesky X = H^T H with H upper triangular (natural ordering).
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SparseMatrix& x);

  [[nodiscard]] const SparseMatrix& upper() const { return h_; }
  [[nodiscard]] Index dimension() const { return h_.rows(); }

  /// H * v
  [[nodiscard]] Matrix apply_upper(const Matrix& v) const;
  /// H^{-1} * v
  [[nodiscard]] Matrix solve_upper(const Matrix& v) const;
  /// X^{-1} * v
  [[nodiscard]] Matrix solve(const Matrix& v) const;

 private:
  SparseMatrix h_;
};

/// Mode-1: d1 x (d2 d3); mode-2: d2 x (d1 d3). Column index runs with the
/// third tensor index slowest.
Matrix mode_unfold(const Tensor3& t, int mode);
Tensor3 mode_refold(const Matrix& m, int mode, std::array<Index, 3> dims);

/// G(i,j) = sum_k psi(k+s1, i) psi(k+s2, j) over all k keeping both rows valid.
Matrix shifted_gramian(const Matrix& psi, Index shift_left, Index shift_right);

/// G(i,j) = sum_n left(n-lag_left, i) right(n-lag_right, j), n over all rows,
/// entries with a negative row index read as zero (zero history before t_1).
Matrix lagged_gramian(const Matrix& left, const Matrix& right, Index lag_left,
                      Index lag_right);

/// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Largest-magnitude entry of each column made positive.
void normalize_signs(Matrix& columns);

Matrix to_dense(const SparseMatrix& s);
SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& t);

/// Symmetry check: max|X - X^T| <= tol * max|X|.
bool is_symmetric(const SparseMatrix& x, double tol);

/// Hager-Higham estimate of ||K||_1 ||K^{-1}||_1 from solve callbacks.
double estimate_condition_1norm(const SparseMatrix& k,
                                const std::function<Vector(const Vector&)>& solve,
                                const std::function<Vector(const Vector&)>& solve_transpose);

/// Smallest singular value (zero when cols > rows).
double smallest_singular_value(const Matrix& a);

/// Relative Frobenius distance ||a-b|| / ||b|| (absolute when b == 0).
double relative_frobenius(const Matrix& a, const Matrix& b);

}  // namespace strb::linalg
