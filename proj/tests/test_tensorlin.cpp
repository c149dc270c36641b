#include <doctest.h>

#include "oracles.hpp"
#include "strb/error.hpp"
#include "strb/fom.hpp"
#include "strb/linalg.hpp"
#include "strb/mesh.hpp"

#include <limits>
#include <random>

using namespace strb;
using namespace strb::linalg;

TEST_CASE("energy criterion keeps one mode of diag(2,1) at tolerance 0.5") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  const auto r = truncated_svd(a, EnergyCriterion{0.5});
  CHECK(r.left.cols() == 1);
  CHECK(r.singular_values[0] == doctest::Approx(2.0));
  CHECK(r.all_singular_values.size() == 2);
}

TEST_CASE("rank-one matrix with repeated column") {
  Vector v(4);
  v << 1.0, -2.0, 3.0, 0.5;
  const Matrix a = v * Vector::Ones(6).transpose();
  const auto r = truncated_svd(a, EnergyCriterion{1e-6});
  REQUIRE(r.left.cols() == 1);
  CHECK(r.singular_values[0] == doctest::Approx(v.norm() * std::sqrt(6.0)).epsilon(1e-13));
  // Sign fixed so the largest-magnitude entry is positive.
  CHECK((r.left.col(0) - v / v.norm()).norm() < 1e-13);
}

TEST_CASE("truncated SVD of a random 20x12 matrix matches a Jacobi oracle") {
  std::mt19937_64 rng(7);
  const Matrix a = oracle::random_matrix(20, 12, rng);
  const auto r = truncated_svd(a, RankCriterion{5}, true);
  const auto ref = oracle::jacobi_svd(a);
  REQUIRE(r.left.cols() == 5);
  for (Index j = 0; j < 5; ++j) CHECK(std::abs(r.singular_values[j] - ref.sigma[j]) < 1e-10);
  for (Index j = 0; j < 12; ++j) CHECK(std::abs(r.all_singular_values[j] - ref.sigma[j]) < 1e-10);
  // Random spectra are simple, so vectors agree up to sign.
  for (Index j = 0; j < 5; ++j) {
    const double d = std::min((r.left.col(j) - ref.u.col(j)).norm(), (r.left.col(j) + ref.u.col(j)).norm());
    CHECK(d < 1e-9);
  }
  CHECK((r.left.transpose() * r.left - Matrix::Identity(5, 5)).norm() < 1e-12);
}

TEST_CASE("untruncated SVD reconstructs the matrix") {
  std::mt19937_64 rng(11);
  const Matrix a = oracle::random_matrix(15, 9, rng);
  const auto r = truncated_svd(a, RankCriterion{9}, true);
  const Matrix back = r.left * r.singular_values.asDiagonal() * r.right->transpose();
  CHECK(relative_frobenius(back, a) <= 1e-10);
}

TEST_CASE("degenerate spectrum compared by subspace") {
  std::mt19937_64 rng(5);
  const Matrix q = oracle::random_orthonormal(10, 4, rng);
  Vector s(4);
  s << 3.0, 2.0, 2.0, 1.0;
  const Matrix w = oracle::random_orthonormal(6, 4, rng);
  const Matrix a = q * s.asDiagonal() * w.transpose();
  const auto r = truncated_svd(a, RankCriterion{3});
  CHECK(oracle::subspace_distance(r.left, q.leftCols(3)) < 1e-10);
}

TEST_CASE("energy rank is monotone in the tolerance") {
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_matrix(30, 20, rng);
  const auto r = truncated_svd(a, RankCriterion{20});
  Index prev = std::numeric_limits<Index>::max();
  for (double eps = 1e-6; eps < 1.0; eps *= 1.5) {
    const Index n = energy_rank(r.all_singular_values, eps);
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("truncated SVD rejects empty and non-finite input") {
  CHECK_THROWS_AS(truncated_svd(Matrix(0, 3), RankCriterion{1}), DimensionError);
  Matrix a = Matrix::Ones(2, 2);
  a(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(truncated_svd(a, RankCriterion{1}), NumericalError);
  CHECK_THROWS_AS(truncated_svd(Matrix::Ones(2, 2), EnergyCriterion{1.5}), ConfigError);
}

TEST_CASE("cholesky of the identity and of a 2x2") {
  SparseMatrix i(3, 3);
  i.setIdentity();
  CHECK(relative_frobenius(to_dense(CholeskyFactor(i).upper()), Matrix::Identity(3, 3)) == 0.0);

  const SparseMatrix x = from_triplets(2, 2, {{0, 0, 4.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 5.0}});
  Matrix h(2, 2);
  h << 2.0, 1.0, 0.0, 2.0;
  CHECK((to_dense(CholeskyFactor(x).upper()) - h).norm() < 1e-15);
}

TEST_CASE("cholesky errors name the failure") {
  const SparseMatrix ns = from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 0.5}, {1, 1, 1.0}});
  CHECK_THROWS_AS(CholeskyFactor{ns}, NumericalError);
  const SparseMatrix indef = from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {1, 2, 2.0}, {2, 1, 2.0}, {2, 2, 1.0}});
  try {
    CholeskyFactor c(indef);
    FAIL("expected an error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("index 2") != std::string::npos);
  }
}

TEST_CASE("cholesky recomposes the velocity norm matrix of the smallest mesh") {
  const auto f = fom::assemble_fom(mesh::make_channel(3.0, 1.0, 3, 2), {1.0, 1.0, 1, 0});
  const CholeskyFactor h(f.X_u);
  const Matrix hd = to_dense(h.upper());
  CHECK(hd.isUpperTriangular());
  const Matrix x = to_dense(f.X_u);
  CHECK(relative_frobenius(hd.transpose() * hd, x) <= 1e-10);
  std::mt19937_64 rng(1);
  const Matrix b = oracle::random_matrix(x.rows(), 2, rng);
  CHECK(relative_frobenius(x * h.solve(b), b) < 1e-10);
}

TEST_CASE("mode unfoldings") {
  Tensor3 t(2, 2, 1);
  t(0, 0, 0) = 1;
  t(1, 0, 0) = 2;
  t(0, 1, 0) = 3;
  t(1, 1, 0) = 4;
  CHECK(mode_unfold(t, 1) == t.slice(0));

  Tensor3 u(2, 3, 2);
  double v = 1.0;
  for (auto& x : u.values()) x = v++;
  const Matrix m2 = mode_unfold(u, 2);
  REQUIRE(m2.rows() == 3);
  REQUIRE(m2.cols() == 4);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k < 2; ++k) CHECK(m2(j, i + 2 * k) == 1.0 + i + 2 * j + 6 * k);
  for (int mode : {1, 2}) CHECK(mode_refold(mode_unfold(u, mode), mode, u.dims()).values() == u.values());
  CHECK_THROWS_AS(mode_unfold(u, 3), ConfigError);
}

TEST_CASE("shifted gramians") {
  std::mt19937_64 rng(9);
  const Matrix q = oracle::random_orthonormal(8, 3, rng);
  CHECK((shifted_gramian(q, 0, 0) - Matrix::Identity(3, 3)).norm() < 1e-14);

  const Matrix s = shifted_gramian(Matrix::Identity(4, 4), 1, 0);
  Matrix sub = Matrix::Zero(4, 4);
  for (int i = 1; i < 4; ++i) sub(i, i - 1) = 1.0;
  CHECK(s == sub);

  const Matrix psi = oracle::random_matrix(10, 3, rng);
  const Matrix g = shifted_gramian(psi, 2, 0);
  Matrix ref = Matrix::Zero(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k + 2 < 10; ++k) ref(i, j) += psi(k + 2, i) * psi(k, j);
  CHECK((g - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(shifted_gramian(psi, 10, 0), DimensionError);
}

TEST_CASE("gramians equal index-loop oracles on 100 random trials") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(3, 12), cd(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = nd(rng);
    const Matrix l = oracle::random_matrix(n, cd(rng), rng);
    const Matrix r = oracle::random_matrix(n, cd(rng), rng);
    std::uniform_int_distribution<int> sd(0, n - 1);
    const int a = sd(rng) % 3, b = sd(rng) % 3;
    Matrix ref = Matrix::Zero(l.cols(), r.cols());
    for (Index i = 0; i < l.cols(); ++i)
      for (Index j = 0; j < r.cols(); ++j)
        for (int t = 0; t < n; ++t)
          if (t - a >= 0 && t - b >= 0) ref(i, j) += l(t - a, i) * r(t - b, j);
    CHECK((lagged_gramian(l, r, a, b) - ref).cwiseAbs().maxCoeff() < 1e-13);

    const int s1 = sd(rng), s2 = sd(rng);
    Matrix sref = Matrix::Zero(l.cols(), l.cols());
    for (Index i = 0; i < l.cols(); ++i)
      for (Index j = 0; j < l.cols(); ++j)
        for (int k = 0; k + std::max(s1, s2) < n; ++k) sref(i, j) += l(k + s1, i) * l(k + s2, j);
    CHECK((shifted_gramian(l, s1, s2) - sref).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("kronecker product layout") {
  Matrix a(2, 1), b(1, 2);
  a << 1, 2;
  b << 3, 4;
  Matrix k(2, 2);
  k << 3, 4, 6, 8;
  CHECK(kron(a, b) == k);
}

TEST_CASE("condition estimate brackets the exact 1-norm condition number") {
  std::mt19937_64 rng(4);
  const Matrix d = oracle::random_matrix(12, 12, rng) + 4.0 * Matrix::Identity(12, 12);
  const SparseMatrix s = d.sparseView();
  const Eigen::PartialPivLU<Matrix> lu(d);
  const double est = estimate_condition_1norm(
      s, [&](const Vector& b) { return Vector(lu.solve(b)); },
      [&](const Vector& b) { return Vector(lu.transpose().solve(b)); });
  const Matrix inv = d.inverse();
  const double exact = d.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
  CHECK(est <= exact * (1 + 1e-12));
  CHECK(est >= exact / 10.0);
}
