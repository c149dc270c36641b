#include "strb/quadrature.hpp"

#include "strb/error.hpp"

#include <cmath>
#include <numbers>

namespace strb::quad {

const std::vector<TrianglePoint>& triangle_rule() {
  static const std::vector<TrianglePoint> rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0;
    const double b = (6.0 + s15) / 21.0;
    // Reference-triangle weights have area 1/2; rescale so they sum to one.
    const double wa = (155.0 - s15) / 1200.0 * 2.0;
    const double wb = (155.0 + s15) / 1200.0 * 2.0;
    const double wc = 9.0 / 40.0 * 2.0;
    std::vector<TrianglePoint> r;
    r.push_back({{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, wc});
    r.push_back({{1.0 - 2.0 * a, a, a}, wa});
    r.push_back({{a, 1.0 - 2.0 * a, a}, wa});
    r.push_back({{a, a, 1.0 - 2.0 * a}, wa});
    r.push_back({{1.0 - 2.0 * b, b, b}, wb});
    r.push_back({{b, 1.0 - 2.0 * b, b}, wb});
    r.push_back({{b, b, 1.0 - 2.0 * b}, wb});
    double sum = 0.0;
    for (const auto& p : r) sum += p.weight;
    for (auto& p : r) p.weight /= sum;
    return r;
  }();
  return rule;
}

std::vector<LinePoint> gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: need at least one point");
  std::vector<LinePoint> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    pts[static_cast<std::size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
  }
  return pts;
}

}  // namespace strb::quad
