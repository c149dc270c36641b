#include "strb/store.hpp"

#include "strb/error.hpp"
#include "strb/io.hpp"

#include <algorithm>

namespace strb::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) {
  for (const char* kind : {"meshes", "fom", "snapshots", "bases", "reduced", "reports"})
    fs::create_directories(root_ / kind);
}

std::string ArtifactStore::key(const ordered_json& inputs) { return io::hex64(io::fnv1a(inputs.dump())); }

fs::path ArtifactStore::dir(const std::string& kind, const std::string& key) const { return root_ / kind / key; }

std::string file_hash(const fs::path& p) { return io::hex64(io::fnv1a(io::read_text(p))); }

ArtifactStore::State ArtifactStore::check(const std::string& kind, const std::string& key) const {
  const fs::path d = dir(kind, key);
  if (!fs::exists(d / "manifest.json")) return fs::exists(d) ? State::Corrupt : State::Missing;
  try {
    const json m = json::parse(io::read_text(d / "manifest.json"));
    for (const auto& [name, hash] : m.at("files").items()) {
      if (!fs::exists(d / name) || file_hash(d / name) != hash.get<std::string>()) return State::Corrupt;
    }
  } catch (const std::exception&) {
    return State::Corrupt;
  }
  return State::Valid;
}

fs::path ArtifactStore::prepare(const std::string& kind, const std::string& key) const {
  const fs::path d = dir(kind, key);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void ArtifactStore::commit(const std::string& kind, const std::string& key, const std::string& stage,
                           const ordered_json& inputs) const {
  const fs::path d = dir(kind, key);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(d))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  ordered_json m;
  m["stage"] = stage;
  m["key"] = key;
  m["inputs"] = inputs;
  m["files"] = ordered_json::object();
  for (const auto& n : names) m["files"][n] = file_hash(d / n);
  io::write_text(d / "manifest.json", m.dump(2) + "\n");
}

json ArtifactStore::manifest(const std::string& kind, const std::string& key) const {
  return json::parse(io::read_text(dir(kind, key) / "manifest.json"));
}

void write_sparse(const fs::path& path, const linalg::SparseMatrix& s) {
  // Row 0 carries (rows, cols, nnz); then one (row, col, value) per entry.
  io::ArrayData a;
  const auto nnz = static_cast<std::uint64_t>(s.nonZeros());
  a.dims = {3, nnz + 1};
  a.values = {static_cast<double>(s.rows()), static_cast<double>(s.cols()), static_cast<double>(nnz)};
  for (int k = 0; k < s.outerSize(); ++k)
    for (linalg::SparseMatrix::InnerIterator it(s, k); it; ++it) {
      a.values.push_back(static_cast<double>(it.row()));
      a.values.push_back(static_cast<double>(it.col()));
      a.values.push_back(it.value());
    }
  io::write_array(path, a);
}

linalg::SparseMatrix read_sparse(const fs::path& path) {
  const io::ArrayData a = io::read_array(path);
  if (a.dims.size() != 2 || a.dims[0] != 3 || a.dims[1] < 1) throw ConfigError("not a sparse matrix: " + path.string());
  const auto rows = static_cast<linalg::Index>(a.values[0]), cols = static_cast<linalg::Index>(a.values[1]);
  const auto nnz = static_cast<std::size_t>(a.values[2]);
  if (nnz + 1 != a.dims[1]) throw ConfigError("corrupt sparse matrix: " + path.string());
  std::vector<linalg::Triplet> t;
  t.reserve(nnz);
  for (std::size_t k = 1; k <= nnz; ++k)
    t.emplace_back(static_cast<linalg::Index>(a.values[3 * k]), static_cast<linalg::Index>(a.values[3 * k + 1]),
                   a.values[3 * k + 2]);
  linalg::SparseMatrix s(rows, cols);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

namespace {

ordered_json point(const mesh::Point& p) { return {p.x(), p.y()}; }
mesh::Point point(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void save_fom(const fs::path& dir, const fom::FomSpatialBlocks& f) {
  ordered_json meta;
  meta["rho"] = f.rho;
  meta["mu"] = f.mu;
  meta["n_nodes"] = f.n_nodes;
  meta["n_u"] = f.n_u;
  meta["n_p"] = f.n_p;
  meta["wall_dofs"] = f.wall_dofs;
  meta["boundaries"] = ordered_json::array();
  for (const auto& b : f.boundaries) {
    ordered_json e;
    e["index"] = b.index;
    e["inflow"] = b.inflow;
    e["origin"] = point(b.origin);
    e["tangent"] = point(b.tangent);
    e["outward_normal"] = point(b.outward_normal);
    e["length"] = b.length;
    e["edges"] = b.edges;
    e["degree"] = b.basis.degree;
    e["n_lambda"] = b.n_lambda;
    e["offset"] = b.offset;
    meta["boundaries"].push_back(e);
  }
  io::write_text(dir / "meta.json", meta.dump(2) + "\n");
  write_sparse(dir / "M.strb", f.M);
  write_sparse(dir / "A.strb", f.A);
  write_sparse(dir / "M_raw.strb", f.M_raw);
  write_sparse(dir / "A_raw.strb", f.A_raw);
  write_sparse(dir / "B.strb", f.B);
  write_sparse(dir / "Bt_bc.strb", f.Bt_bc);
  write_sparse(dir / "C_all.strb", f.C_all);
  write_sparse(dir / "Ct_all_bc.strb", f.Ct_all_bc);
  write_sparse(dir / "X_u.strb", f.X_u);
  write_sparse(dir / "X_p.strb", f.X_p);
  for (std::size_t k = 0; k < f.boundaries.size(); ++k) {
    const std::string s = std::to_string(k);
    write_sparse(dir / ("C_" + s + ".strb"), f.C[k]);
    write_sparse(dir / ("Ct_bc_" + s + ".strb"), f.Ct_bc[k]);
    io::write_vector(dir / ("g_space_" + s + ".strb"), f.g_space[k]);
  }
}

fom::FomSpatialBlocks load_fom(const fs::path& dir) {
  const json meta = json::parse(io::read_text(dir / "meta.json"));
  fom::FomSpatialBlocks f;
  f.rho = meta.at("rho").get<double>();
  f.mu = meta.at("mu").get<double>();
  f.n_nodes = meta.at("n_nodes").get<linalg::Index>();
  f.n_u = meta.at("n_u").get<linalg::Index>();
  f.n_p = meta.at("n_p").get<linalg::Index>();
  f.wall_dofs = meta.at("wall_dofs").get<decltype(f.wall_dofs)>();
  for (const auto& e : meta.at("boundaries")) {
    fom::DirichletBoundary b;
    b.index = e.at("index").get<int>();
    b.inflow = e.at("inflow").get<bool>();
    b.origin = point(e.at("origin"));
    b.tangent = point(e.at("tangent"));
    b.outward_normal = point(e.at("outward_normal"));
    b.length = e.at("length").get<double>();
    b.edges = e.at("edges").get<std::vector<std::pair<int, int>>>();
    b.basis = fom::make_multiplier_basis(e.at("degree").get<int>(), b.length);
    b.n_lambda = e.at("n_lambda").get<linalg::Index>();
    b.offset = e.at("offset").get<linalg::Index>();
    f.boundaries.push_back(b);
  }
  f.M = read_sparse(dir / "M.strb");
  f.A = read_sparse(dir / "A.strb");
  f.M_raw = read_sparse(dir / "M_raw.strb");
  f.A_raw = read_sparse(dir / "A_raw.strb");
  f.B = read_sparse(dir / "B.strb");
  f.Bt_bc = read_sparse(dir / "Bt_bc.strb");
  f.C_all = read_sparse(dir / "C_all.strb");
  f.Ct_all_bc = read_sparse(dir / "Ct_all_bc.strb");
  f.X_u = read_sparse(dir / "X_u.strb");
  f.X_p = read_sparse(dir / "X_p.strb");
  for (std::size_t k = 0; k < f.boundaries.size(); ++k) {
    const std::string s = std::to_string(k);
    f.C.push_back(read_sparse(dir / ("C_" + s + ".strb")));
    f.Ct_bc.push_back(read_sparse(dir / ("Ct_bc_" + s + ".strb")));
    f.g_space.push_back(io::read_vector(dir / ("g_space_" + s + ".strb")));
  }
  return f;
}

}  // namespace strb::pipeline
