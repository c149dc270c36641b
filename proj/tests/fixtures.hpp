#pragma once

#include "strb/fom.hpp"
#include "strb/march.hpp"
#include "strb/mesh.hpp"

#include <random>
#include <vector>

namespace fixture {

/// Pinned tiny instance: 3x2 channel, one multiplier degree, 86 dofs.
inline strb::fom::FomSpatialBlocks tiny_fom() {
  return strb::fom::assemble_fom(strb::mesh::make_channel(3.0, 1.0, 3, 2), {1.06, 3.5e-3, 1, 0});
}

inline std::vector<strb::fom::Parameter> sample(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> a(4.0, 8.0), b(0.1, 0.3), c(0.2, 0.8);
  std::vector<strb::fom::Parameter> out;
  for (int i = 0; i < n; ++i) out.push_back({a(rng), b(rng), c(rng)});
  return out;
}

}  // namespace fixture
