#pragma once

// Independent reference implementations used only by the tests.

#include "strb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using strb::linalg::Index;
using strb::linalg::Matrix;
using strb::linalg::Vector;

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

inline Matrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  Matrix q = random_matrix(rows, cols, rng);
  // Classical Gram-Schmidt twice.
  for (int pass = 0; pass < 2; ++pass)
    for (Index j = 0; j < cols; ++j) {
      for (Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      q.col(j).normalize();
    }
  return q;
}

struct JacobiSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};

/// One-sided Jacobi SVD (Hestenes) of a tall or square matrix.
inline JacobiSvd jacobi_svd(const Matrix& a_in) {
  Matrix a = a_in;
  const Index n = a.cols();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n - 1; ++p)
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const double gamma = a.col(p).dot(a.col(q));
        if (std::abs(gamma) <= 1e-300) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        for (Index i = 0; i < a.rows(); ++i) {
          const double x = a(i, p), y = a(i, q);
          a(i, p) = c * x - s * y;
          a(i, q) = s * x + c * y;
        }
        for (Index i = 0; i < n; ++i) {
          const double x = v(i, p), y = v(i, q);
          v(i, p) = c * x - s * y;
          v(i, q) = s * x + c * y;
        }
      }
    if (off < 1e-15) break;
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Vector norms(n);
  for (Index j = 0; j < n; ++j) norms[j] = a.col(j).norm();
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return norms[x] > norms[y]; });
  JacobiSvd out{Matrix(a.rows(), n), Vector(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    const Index j = order[static_cast<std::size_t>(k)];
    out.sigma[k] = norms[j];
    out.u.col(k) = norms[j] > 0 ? Vector(a.col(j) / norms[j]) : Vector(Vector::Zero(a.rows()));
    out.v.col(k) = v.col(j);
  }
  return out;
}

/// Largest principal-angle sine between two orthonormal column spaces.
inline double subspace_distance(const Matrix& a, const Matrix& b) {
  const Matrix r = b - a * (a.transpose() * b);
  return r.norm();
}

}  // namespace oracle
