#pragma once

#include "strb/fom.hpp"
#include "strb/linalg.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace strb::pipeline {

namespace fs = std::filesystem;

/// What happened to one stage during a run.
struct StageEvent {
  std::string stage;
  std::string key;
  bool cached = false;
  double seconds = 0.0;
  std::string warning;
};

/// Content-addressed layout under one root:
///   meshes/ fom/ snapshots/ bases/ reduced/ reports/
/// Every artifact directory holds a manifest.json with its inputs and the
/// FNV-1a hash of each file. An artifact is reused only when all hashes match.
class ArtifactStore {
 public:
  explicit ArtifactStore(fs::path root);

  static std::string key(const nlohmann::ordered_json& inputs);

  [[nodiscard]] const fs::path& root() const { return root_; }
  [[nodiscard]] fs::path dir(const std::string& kind, const std::string& key) const;

  enum class State { Missing, Valid, Corrupt };
  [[nodiscard]] State check(const std::string& kind, const std::string& key) const;

  /// Fresh empty directory for an artifact about to be written.
  fs::path prepare(const std::string& kind, const std::string& key) const;
  /// Hashes every file in the directory and writes the manifest.
  void commit(const std::string& kind, const std::string& key, const std::string& stage,
              const nlohmann::ordered_json& inputs) const;
  [[nodiscard]] nlohmann::json manifest(const std::string& kind, const std::string& key) const;

 private:
  fs::path root_;
};

std::string file_hash(const fs::path& p);

void write_sparse(const fs::path& path, const linalg::SparseMatrix& s);
linalg::SparseMatrix read_sparse(const fs::path& path);

/// Bit-exact round trip of the assembled blocks.
void save_fom(const fs::path& dir, const fom::FomSpatialBlocks& f);
fom::FomSpatialBlocks load_fom(const fs::path& dir);

}  // namespace strb::pipeline
