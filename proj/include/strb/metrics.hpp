#pragma once

#include "strb/fom.hpp"
#include "strb/march.hpp"

#include <string>
#include <vector>

namespace strb::metrics {

using linalg::Index;
using linalg::Matrix;
using linalg::SparseMatrix;

/// ||rom - fom||_{X^st} / ||fom||_{X^st} with per-step X-weighted sums.
double relative_error(const Matrix& rom, const Matrix& fom, const SparseMatrix& x);

struct ErrorReport {
  std::string rom;
  double eps_pod = 0.0;
  double eps_t = 0.0;
  double e_u = 0.0;
  double e_p = 0.0;
  std::vector<double> per_mu_u, per_mu_p;
};

ErrorReport relative_errors(const std::vector<fom::Trajectory>& rom, const std::vector<fom::Trajectory>& fom,
                            const fom::FomSpatialBlocks& f);

struct PerfReport {
  Index fom_size = 0;
  Index rom_size = 0;
  double fom_seconds = 0.0;     // median FOM wall time per query
  double online_seconds = 0.0;  // median ROM online wall time per query
  double offline_seconds = 0.0;

  [[nodiscard]] double reduction_factor() const;
  [[nodiscard]] double speedup() const;
};

double median(std::vector<double> v);

/// One row per (method, tolerance).
struct StudyRow {
  std::string method;
  double eps_pod = 0.0;
  Index rom_size = 0;
  double rf = 0.0;
  double su = 0.0;
  double e_u = 0.0;
  double e_p = 0.0;

  [[nodiscard]] double e_u_ratio() const { return e_u / eps_pod; }
  [[nodiscard]] double e_p_ratio() const { return e_p / eps_pod; }
};

/// method,eps_pod,rom_size,rf,su,e_u,e_p,e_u_ratio,e_p_ratio
std::string study_csv(const std::vector<StudyRow>& rows, bool include_timing = true);
std::string study_json(const std::vector<StudyRow>& rows, bool include_timing = true);
/// Long format: method,eps_pod,metric,value
std::string study_long_csv(const std::vector<StudyRow>& rows, bool include_timing = true);

}  // namespace strb::metrics
