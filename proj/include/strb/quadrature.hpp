#pragma once

#include <array>
#include <vector>

namespace strb::quad {

struct TrianglePoint {
  std::array<double, 3> bary;  // barycentric coordinates
  double weight;               // weights sum to 1 (multiply by the area)
};

/// Seven-point rule, exact for polynomials of degree 5.
const std::vector<TrianglePoint>& triangle_rule();

struct LinePoint {
  double x;       // in [-1, 1]
  double weight;  // sums to 2
};

/// Gauss-Legendre rule with n points, exact for degree 2n-1.
std::vector<LinePoint> gauss_legendre(int n);

}  // namespace strb::quad
