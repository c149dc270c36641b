#pragma once

#include "strb/config.hpp"
#include "strb/galerkin.hpp"
#include "strb/mesh.hpp"
#include "strb/metrics.hpp"
#include "strb/petrov.hpp"
#include "strb/stability.hpp"
#include "strb/store.hpp"

#include <json.hpp>

#include <optional>

namespace strb::pipeline {

/// Bases for one tolerance level, plain and enriched.
struct LevelBases {
  Tolerance tolerance;
  pod::SpaceBasis u, p;
  pod::TimeBasis tu, tp;
  std::vector<pod::TimeBasis> tl;
  std::vector<linalg::Index> n_lambda;
  linalg::Matrix phi_u_enriched;  // with pressure and multiplier supremizers
  linalg::Matrix psi_u_enriched;  // after the temporal enrichment, if enabled
  nlohmann::ordered_json report;

  /// Plain POD bases (Petrov-Galerkin).
  [[nodiscard]] pod::SpaceTimeBasis plain() const;
  /// Supremizer-enriched bases (Galerkin).
  [[nodiscard]] pod::SpaceTimeBasis enriched() const;
};

struct LevelSystems {
  std::optional<rom::SrbTfo> srbtfo;
  std::optional<rom::ReducedGalerkinSystem> stgrb;
  std::optional<rom::ReducedPGSystem> stpgrb;
};

struct OfflineState {
  StudyConfig config;
  mesh::Mesh2D mesh;
  fom::FomSpatialBlocks fom;
  fom::DirichletDatum datum;
  std::vector<fom::Parameter> train;
  std::vector<LevelBases> levels;
  std::vector<LevelSystems> systems;
  std::vector<StageEvent> events;

  [[nodiscard]] linalg::Index fom_space_size() const { return fom.n_space(); }
};

/// Offline phase with stage caching. When compute is false every stage must
/// already be in the store; a missing one raises ConfigError naming it.
OfflineState run_offline(const StudyConfig& c, bool compute = true);

struct OnlineResult {
  Method method = Method::StGrb;
  std::size_t level = 0;
  fom::Parameter mu;
  bool in_domain = true;
  fom::Trajectory trajectory;
  std::optional<double> e_u, e_p;  // with a full-order reference
  std::filesystem::path output;
};

OnlineResult run_online(const OfflineState& s, Method m, std::size_t level, const fom::Parameter& mu, bool reference);

struct StudyResult {
  std::vector<metrics::StudyRow> rows;
  nlohmann::ordered_json details;  // deterministic
  nlohmann::ordered_json timing;   // wall-clock dependent
  std::filesystem::path report_dir;
  std::vector<StageEvent> events;
};

StudyResult run_study(const StudyConfig& c);

/// Rank, inf-sup and conditioning report.
nlohmann::ordered_json run_diagnose(const StudyConfig& c);

/// Full-order marches over parameters, spread over STRB_THREADS workers.
std::vector<fom::Trajectory> march_all(const fom::FomSpatialBlocks& f, const fom::TimeGrid& grid,
                                       const fom::DirichletDatum& datum, const std::vector<fom::Parameter>& params);

/// STRB_THREADS when set to a positive integer, else the hardware count.
unsigned worker_count();

void set_log_level(const std::string& level);

}  // namespace strb::pipeline
