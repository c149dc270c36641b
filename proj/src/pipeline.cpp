#include "strb/pipeline.hpp"

#include "strb/error.hpp"
#include "strb/io.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

namespace strb::pipeline {

using linalg::Index;
using linalg::Matrix;
using linalg::Vector;
using nlohmann::json;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> l = [] {
    auto x = spdlog::stderr_color_mt("strb");
    x->set_pattern("[%l] %v");
    return x;
  }();
  return *l;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Context {
  ArtifactStore store;
  std::vector<StageEvent>& events;
  bool compute;
};

// Runs or reuses one stage. The computed branch writes its files and then
// reads them back, so a fresh run and a cached run hand out identical data.
template <class Compute, class Load>
auto stage(Context& ctx, const std::string& kind, const std::string& name, const ordered_json& inputs,
           Compute compute, Load load) {
  const std::string key = ArtifactStore::key(inputs);
  const fs::path dir = ctx.store.dir(kind, key);
  const auto t0 = Clock::now();
  const auto state = ctx.store.check(kind, key);
  if (state == ArtifactStore::State::Valid) {
    auto v = load(dir);
    ctx.events.push_back({name, key, true, since(t0), ""});
    logger().info("{:<22} cached    {}", name, key);
    return v;
  }
  if (!ctx.compute)
    throw ConfigError("offline stage '" + name + "' (" + kind + "/" + key + ") is missing; run `strb offline` first");
  std::string warning;
  if (state == ArtifactStore::State::Corrupt) {
    warning = kind + "/" + key + " failed its hash check and was recomputed";
    logger().warn("{}", warning);
  }
  ctx.store.prepare(kind, key);
  compute(dir);
  ctx.store.commit(kind, key, name, inputs);
  auto v = load(dir);
  ctx.events.push_back({name, key, false, since(t0), warning});
  logger().info("{:<22} computed  {} ({:.3f} s)", name, key, since(t0));
  return v;
}

ordered_json params_json(const std::vector<fom::Parameter>& ps) {
  ordered_json a = ordered_json::array();
  for (const auto& p : ps) a.push_back({p.mu0, p.mu1, p.mu2});
  return a;
}

std::vector<fom::Parameter> params_from_json(const json& a) {
  std::vector<fom::Parameter> out;
  for (const auto& p : a) out.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  return out;
}

ordered_json rank_json(const stability::RankReport& r) {
  return {{"sigma_min_up", r.sigma_up}, {"sigma_min_ul", r.sigma_ul}, {"violation", r.violation}};
}

ordered_json grid_json(const StudyConfig& c) { return {{"period", c.period}, {"steps", c.steps}}; }

std::string k(std::size_t i) { return std::to_string(i); }

void write_snapshots(const fs::path& d, const pod::SnapshotSet& s) {
  io::write_tensor(d / "velocity.strb", s.velocity.data);
  io::write_tensor(d / "pressure.strb", s.pressure.data);
  for (std::size_t i = 0; i < s.multipliers.size(); ++i) io::write_tensor(d / ("multiplier_" + k(i) + ".strb"), s.multipliers[i].data);
  io::write_text(d / "params.json", params_json(s.velocity.parameters).dump() + "\n");
}

pod::SnapshotSet read_snapshots(const fs::path& d, int boundaries) {
  pod::SnapshotSet s;
  const auto params = params_from_json(json::parse(io::read_text(d / "params.json")));
  s.velocity = {pod::Field::Velocity, -1, io::read_tensor(d / "velocity.strb"), params};
  s.pressure = {pod::Field::Pressure, -1, io::read_tensor(d / "pressure.strb"), params};
  for (int b = 0; b < boundaries; ++b)
    s.multipliers.push_back(
        {pod::Field::Multiplier, b, io::read_tensor(d / ("multiplier_" + k(static_cast<std::size_t>(b)) + ".strb")), params});
  return s;
}

fom::Trajectory trajectory_of(const pod::SnapshotSet& s, Index m) {
  fom::Trajectory t{s.velocity.data.slice(m), s.pressure.data.slice(m), {}};
  Index rows = 0;
  for (const auto& x : s.multipliers) rows += x.data.dim(0);
  t.lambda = Matrix(rows, t.u.cols());
  Index r = 0;
  for (const auto& x : s.multipliers) {
    t.lambda.middleRows(r, x.data.dim(0)) = x.data.slice(m);
    r += x.data.dim(0);
  }
  return t;
}

void write_space(const fs::path& d, const std::string& name, const pod::SpaceBasis& b) {
  io::write_matrix(d / ("phi_" + name + ".strb"), b.phi);
  io::write_vector(d / ("sigma_" + name + ".strb"), b.sigma);
}

void write_time(const fs::path& d, const std::string& name, const pod::TimeBasis& b) {
  io::write_matrix(d / ("psi_" + name + ".strb"), b.psi);
  io::write_vector(d / ("sigma_t" + name + ".strb"), b.sigma);
}

pod::SpaceBasis read_space(const fs::path& d, const std::string& name, pod::NormTag tag, double tol) {
  return {io::read_matrix(d / ("phi_" + name + ".strb")), io::read_vector(d / ("sigma_" + name + ".strb")), tag, tol};
}

pod::TimeBasis read_time(const fs::path& d, const std::string& name, double tol) {
  return {io::read_matrix(d / ("psi_" + name + ".strb")), io::read_vector(d / ("sigma_t" + name + ".strb")), tol};
}

mesh::Mesh2D build_mesh(const StudyConfig& c) {
  return c.geometry == Geometry::Channel ? mesh::make_channel(c.length, c.height, c.nx, c.ny)
                                         : mesh::make_tbifurcation(c.h);
}

ordered_json mesh_inputs(const StudyConfig& c) {
  ordered_json j{{"geometry", to_string(c.geometry)}};
  if (c.geometry == Geometry::Channel) {
    j["length"] = c.length;
    j["height"] = c.height;
    j["nx"] = c.nx;
    j["ny"] = c.ny;
  } else {
    j["h"] = c.h;
  }
  return j;
}

// Median over repetitions of the mean call time; each repetition runs the
// query until at least 2 ms have elapsed.
template <class F>
double time_median(int reps, F&& fn) {
  static volatile double sink = 0.0;
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    int calls = 0;
    const auto t0 = Clock::now();
    double elapsed = 0.0;
    do {
      sink = sink + fn();
      ++calls;
      elapsed = since(t0);
    } while (elapsed < 2e-3);
    t.push_back(elapsed / calls);
  }
  return metrics::median(t);
}

struct Offline {
  OfflineState state;
  std::string fom_key, train_key;
  std::vector<std::string> level_keys;
};

Offline offline(const StudyConfig& c, bool compute) {
  validate(c);
  Offline out;
  OfflineState& s = out.state;
  s.config = c;
  Context ctx{ArtifactStore(c.output), s.events, compute};
  const fom::TimeGrid grid = c.grid();

  const ordered_json mesh_in = mesh_inputs(c);
  s.mesh = stage(
      ctx, "meshes", "mesh", mesh_in,
      [&](const fs::path& d) { io::write_text(d / "mesh.txt", mesh::mesh_to_text(build_mesh(c))); },
      [](const fs::path& d) { return mesh::mesh_from_text(io::read_text(d / "mesh.txt")); });

  const ordered_json fom_in{{"mesh", ArtifactStore::key(mesh_in)},
                            {"rho", c.rho},
                            {"mu", c.mu},
                            {"n_in", c.n_in},
                            {"n_out", c.n_out}};
  out.fom_key = ArtifactStore::key(fom_in);
  s.fom = stage(
      ctx, "fom", "fom", fom_in,
      [&](const fs::path& d) { save_fom(d, fom::assemble_fom(s.mesh, {c.rho, c.mu, c.n_in, c.n_out})); },
      [](const fs::path& d) { return load_fom(d); });
  const auto& f = s.fom;
  s.datum = fom::DirichletDatum::from_blocks(f, c.split, c.period);

  const ordered_json train_in{{"fom", out.fom_key},
                              {"role", "train"},
                              {"grid", grid_json(c)},
                              {"split", config_to_json(c)["split"]},
                              {"domain", config_to_json(c)["domain"]},
                              {"count", c.n_train},
                              {"seed", c.seed}};
  out.train_key = ArtifactStore::key(train_in);
  const pod::SnapshotSet snaps = stage(
      ctx, "snapshots", "snapshots", train_in,
      [&](const fs::path& d) {
        const auto params = sample_parameters(c.domain, c.n_train, c.seed);
        write_snapshots(d, pod::collect_snapshots(f, march_all(f, grid, s.datum, params), params));
      },
      [&](const fs::path& d) { return read_snapshots(d, f.n_boundaries()); });
  s.train = snaps.velocity.parameters;

  for (const auto& tol : c.tolerances) {
    const ordered_json bases_in{
        {"snapshots", out.train_key},
        {"tolerance", {{"velocity", tol.velocity}, {"pressure", tol.pressure}, {"multiplier", tol.multiplier}}}};
    LevelBases lb = stage(
        ctx, "bases", "bases", bases_in,
        [&](const fs::path& d) {
          const auto u = pod::spatial_pod(snaps.velocity, f.X_u, pod::NormTag::Velocity, linalg::EnergyCriterion{tol.velocity});
          const auto p = pod::spatial_pod(snaps.pressure, f.X_p, pod::NormTag::Pressure, linalg::EnergyCriterion{tol.pressure});
          write_space(d, "u", u);
          write_space(d, "p", p);
          const auto tu = pod::temporal_pod(snaps.velocity, linalg::EnergyCriterion{tol.velocity});
          const auto tp = pod::temporal_pod(snaps.pressure, linalg::EnergyCriterion{tol.pressure});
          write_time(d, "u", tu);
          write_time(d, "p", tp);
          ordered_json meta{{"velocity_space", u.phi.cols()}, {"pressure_space", p.phi.cols()},
                            {"velocity_time", tu.psi.cols()}, {"pressure_time", tp.psi.cols()},
                            {"multiplier_time", ordered_json::array()}};
          for (std::size_t b = 0; b < snaps.multipliers.size(); ++b) {
            const auto tl = pod::temporal_pod(snaps.multipliers[b], linalg::EnergyCriterion{tol.multiplier});
            write_time(d, "l" + k(b), tl);
            meta["multiplier_time"].push_back(tl.psi.cols());
          }
          io::write_text(d / "meta.json", meta.dump(2) + "\n");
        },
        [&](const fs::path& d) {
          LevelBases b;
          b.tolerance = tol;
          b.u = read_space(d, "u", pod::NormTag::Velocity, tol.velocity);
          b.p = read_space(d, "p", pod::NormTag::Pressure, tol.pressure);
          b.tu = read_time(d, "u", tol.velocity);
          b.tp = read_time(d, "p", tol.pressure);
          for (int i = 0; i < f.n_boundaries(); ++i) {
            b.tl.push_back(read_time(d, "l" + k(static_cast<std::size_t>(i)), tol.multiplier));
            b.n_lambda.push_back(f.n_lambda(i));
          }
          b.report["modes"] = json::parse(io::read_text(d / "meta.json"));
          return b;
        });

    const ordered_json enriched_in{{"bases", ArtifactStore::key(bases_in)},
                                   {"fom", out.fom_key},
                                   {"eps_t", c.eps_t},
                                   {"temporal_enrichment", c.temporal_enrichment}};
    const auto enriched = stage(
        ctx, "bases", "enrichment", enriched_in,
        [&](const fs::path& d) {
          std::vector<stability::SupremizerSet> sets{stability::pressure_supremizers(f, lb.p.phi)};
          double smin = std::numeric_limits<double>::infinity();
          for (Index j = 0; j < sets[0].vectors.cols(); ++j) {
            const Vector sj = sets[0].vectors.col(j);
            smin = std::min(smin, std::sqrt(sj.dot(f.X_u * sj)));
          }
          for (int b = 0; b < f.n_boundaries(); ++b) sets.push_back(stability::multiplier_supremizers(f, b));
          const auto e = stability::enrich_space_basis(lb.u.phi, f.X_u, sets);
          io::write_matrix(d / "phi_u.strb", e.phi);

          pod::SpaceTimeBasis st = lb.plain();
          st.u.phi = e.phi;
          ordered_json rep;
          rep["spatial"] = {{"pod", lb.u.phi.cols()},
                            {"pressure_supremizers", sets[0].vectors.cols()},
                            {"multiplier_supremizers", f.n_lambda()},
                            {"dropped", e.dropped},
                            {"size", e.phi.cols()},
                            {"min_pressure_supremizer_norm", smin}};
          rep["ranks_before"] = rank_json(stability::rank_diagnostics(st));
          ordered_json t{{"enabled", c.temporal_enrichment}, {"eps_t", c.eps_t}, {"steps", ordered_json::array()}};
          if (c.temporal_enrichment) {
            const auto r = stability::temporal_enrich_all(st, c.eps_t);
            for (const auto& x : r.steps)
              t["steps"].push_back({{"dual", x.dual}, {"added", x.added}, {"sigma_min", x.sigma_min}});
            t["added"] = r.total_added();
          } else {
            t["added"] = 0;
          }
          rep["temporal"] = t;
          rep["ranks_after"] = rank_json(stability::rank_diagnostics(st));
          io::write_matrix(d / "psi_u.strb", st.tu.psi);
          io::write_text(d / "report.json", rep.dump(2) + "\n");
        },
        [](const fs::path& d) {
          return std::make_tuple(io::read_matrix(d / "phi_u.strb"), io::read_matrix(d / "psi_u.strb"),
                                 ordered_json::parse(io::read_text(d / "report.json")));
        });
    lb.phi_u_enriched = std::get<0>(enriched);
    lb.psi_u_enriched = std::get<1>(enriched);
    for (const auto& [key, v] : std::get<2>(enriched).items()) lb.report[key] = v;

    LevelSystems sys;
    for (auto m : c.methods) {
      ordered_json in{{"method", to_string(m)}, {"fom", out.fom_key}, {"grid", grid_json(c)}};
      switch (m) {
        case Method::SrbTfo:
          in["bases"] = ArtifactStore::key(enriched_in);
          sys.srbtfo = stage(
              ctx, "reduced", "reduced/srbtfo", in,
              [&](const fs::path& d) {
                const rom::SrbTfo r(lb.phi_u_enriched, lb.p.phi, f, grid);
                io::write_matrix(d / "mass.strb", r.mass_matrix());
                io::write_matrix(d / "step.strb", r.step_matrix());
              },
              [&](const fs::path& d) {
                return rom::SrbTfo(lb.phi_u_enriched, lb.p.phi, io::read_matrix(d / "mass.strb"),
                                   io::read_matrix(d / "step.strb"), grid);
              });
          break;
        case Method::StGrb:
          in["bases"] = ArtifactStore::key(enriched_in);
          in["projection"] = "galerkin";
          in["coupling"] = "2/3 dt";
          sys.stgrb = stage(
              ctx, "reduced", "reduced/stgrb", in,
              [&](const fs::path& d) {
                const auto r = rom::assemble_stgrb(lb.enriched(), f, grid);
                io::write_matrix(d / "matrix.strb", r.matrix);
                for (std::size_t b = 0; b < r.psi_l.size(); ++b) {
                  io::write_matrix(d / ("psi_l" + k(b) + ".strb"), r.psi_l[b]);
                  io::write_vector(d / ("g_space" + k(b) + ".strb"), r.g_space[b]);
                }
                const ordered_json meta{{"n_us", r.n_us}, {"n_ut", r.n_ut}, {"n_ps", r.n_ps}, {"n_pt", r.n_pt},
                                        {"n_ls", r.n_ls}, {"n_lt", r.n_lt}, {"dt", r.dt},     {"steps", r.steps}};
                io::write_text(d / "meta.json", meta.dump(2) + "\n");
              },
              [&](const fs::path& d) {
                rom::ReducedGalerkinSystem r;
                const json meta = json::parse(io::read_text(d / "meta.json"));
                r.n_us = meta.at("n_us").get<Index>();
                r.n_ut = meta.at("n_ut").get<Index>();
                r.n_ps = meta.at("n_ps").get<Index>();
                r.n_pt = meta.at("n_pt").get<Index>();
                r.n_ls = meta.at("n_ls").get<std::vector<Index>>();
                r.n_lt = meta.at("n_lt").get<std::vector<Index>>();
                r.dt = meta.at("dt").get<double>();
                r.steps = meta.at("steps").get<int>();
                r.matrix = io::read_matrix(d / "matrix.strb");
                for (std::size_t b = 0; b < r.n_ls.size(); ++b) {
                  r.psi_l.push_back(io::read_matrix(d / ("psi_l" + k(b) + ".strb")));
                  r.g_space.push_back(io::read_vector(d / ("g_space" + k(b) + ".strb")));
                }
                rom::factorize(r);
                return r;
              });
          break;
        case Method::StPgrb:
          in["bases"] = ArtifactStore::key(bases_in);
          in["projection"] = "petrov-galerkin";
          in["surrogate"] = "diagonal";
          sys.stpgrb = stage(
              ctx, "reduced", "reduced/stpgrb", in,
              [&](const fs::path& d) {
                const auto r = rom::assemble_stpgrb(lb.plain(), f, grid, rom::NormSurrogate::diagonal(f));
                io::write_matrix(d / "matrix.strb", r.matrix);
                io::write_matrix(d / "psi_u.strb", r.psi_u);
                for (std::size_t b = 0; b < r.rhs_kernel.size(); ++b)
                  io::write_vector(d / ("rhs_kernel" + k(b) + ".strb"), r.rhs_kernel[b]);
                const ordered_json meta{{"n_us", r.n_us}, {"n_ut", r.n_ut}, {"n_ps", r.n_ps}, {"n_pt", r.n_pt},
                                        {"n_ls", r.n_ls}, {"n_lt", r.n_lt}, {"steps", r.steps}};
                io::write_text(d / "meta.json", meta.dump(2) + "\n");
              },
              [&](const fs::path& d) {
                rom::ReducedPGSystem r;
                const json meta = json::parse(io::read_text(d / "meta.json"));
                r.n_us = meta.at("n_us").get<Index>();
                r.n_ut = meta.at("n_ut").get<Index>();
                r.n_ps = meta.at("n_ps").get<Index>();
                r.n_pt = meta.at("n_pt").get<Index>();
                r.n_ls = meta.at("n_ls").get<std::vector<Index>>();
                r.n_lt = meta.at("n_lt").get<std::vector<Index>>();
                r.steps = meta.at("steps").get<int>();
                r.matrix = io::read_matrix(d / "matrix.strb");
                r.psi_u = io::read_matrix(d / "psi_u.strb");
                for (std::size_t b = 0; b < r.n_ls.size(); ++b)
                  r.rhs_kernel.push_back(io::read_vector(d / ("rhs_kernel" + k(b) + ".strb")));
                rom::factorize(r);
                return r;
              });
          break;
      }
    }
    out.level_keys.push_back(ArtifactStore::key(bases_in));
    s.levels.push_back(std::move(lb));
    s.systems.push_back(std::move(sys));
  }
  return out;
}

// Query without reconstruction; returns a scalar so timing loops keep the work.
struct Query {
  std::function<double(const fom::Parameter&)> coefficients;
  std::function<fom::Trajectory(const fom::Parameter&)> trajectory;
};

Query make_query(const OfflineState& s, Method m, std::size_t level) {
  const auto& sys = s.systems.at(level);
  const auto& lb = s.levels.at(level);
  const fom::TimeGrid grid = s.config.grid();
  const auto* datum = &s.datum;
  switch (m) {
    case Method::SrbTfo: {
      if (!sys.srbtfo) break;
      const auto* r = &*sys.srbtfo;
      return {[=](const fom::Parameter& mu) { return r->march(*datum, mu).u(0, 0); },
              [=](const fom::Parameter& mu) { return r->reconstruct(r->march(*datum, mu)); }};
    }
    case Method::StGrb: {
      if (!sys.stgrb) break;
      const auto* r = &*sys.stgrb;
      auto basis = std::make_shared<pod::SpaceTimeBasis>(lb.enriched());
      return {[=](const fom::Parameter& mu) { return rom::solve_stgrb(*r, rom::online_rhs_stgrb(*r, *datum, grid, mu)).w[0]; },
              [=](const fom::Parameter& mu) {
                return rom::reconstruct(rom::solve_stgrb(*r, rom::online_rhs_stgrb(*r, *datum, grid, mu)), *basis);
              }};
    }
    case Method::StPgrb: {
      if (!sys.stpgrb) break;
      const auto* r = &*sys.stpgrb;
      auto basis = std::make_shared<pod::SpaceTimeBasis>(lb.plain());
      return {[=](const fom::Parameter& mu) { return rom::solve_stpgrb(*r, rom::online_rhs_stpgrb(*r, *datum, grid, mu)).w[0]; },
              [=](const fom::Parameter& mu) {
                return rom::reconstruct(rom::solve_stpgrb(*r, rom::online_rhs_stpgrb(*r, *datum, grid, mu)), *basis);
              }};
    }
  }
  throw ConfigError("method " + to_string(m) + " was not built offline; add it to the configured methods");
}

Index rom_size(const OfflineState& s, Method m, std::size_t level) {
  const auto& sys = s.systems.at(level);
  switch (m) {
    case Method::SrbTfo: return sys.srbtfo->size();
    case Method::StGrb: return sys.stgrb->size();
    case Method::StPgrb: return sys.stpgrb->size();
  }
  return 0;
}

std::string mu_key(Method m, std::size_t level, const fom::Parameter& mu) {
  return ArtifactStore::key({{"method", to_string(m)}, {"level", level}, {"mu", {mu.mu0, mu.mu1, mu.mu2}}});
}

}  // namespace

pod::SpaceTimeBasis LevelBases::plain() const {
  pod::FieldBases b;
  b.u = u;
  b.p = p;
  b.tu = tu;
  b.tp = tp;
  b.tl = tl;
  b.n_lambda = n_lambda;
  return pod::assemble_space_time_basis(b);
}

pod::SpaceTimeBasis LevelBases::enriched() const {
  pod::SpaceTimeBasis b = plain();
  b.u.phi = phi_u_enriched;
  b.tu.psi = psi_u_enriched;
  return b;
}

unsigned worker_count() {
  if (const char* e = std::getenv("STRB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(e, &end, 10);
    if (end != e && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<fom::Trajectory> march_all(const fom::FomSpatialBlocks& f, const fom::TimeGrid& grid,
                                       const fom::DirichletDatum& datum, const std::vector<fom::Parameter>& params) {
  std::vector<fom::Trajectory> out(params.size());
  const unsigned n = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(1, params.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mtx;
  auto work = [&] {
    try {
      const fom::Bdf2Stepper stepper(f, grid);  // one factorization per worker
      for (std::size_t i = next++; i < params.size(); i = next++) out[i] = stepper.march(datum, params[i]);
    } catch (...) {
      const std::lock_guard<std::mutex> lock(mtx);
      if (!error) error = std::current_exception();
      next = params.size();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

void set_log_level(const std::string& level) { logger().set_level(spdlog::level::from_str(level)); }

OfflineState run_offline(const StudyConfig& c, bool compute) { return offline(c, compute).state; }

OnlineResult run_online(const OfflineState& s, Method m, std::size_t level, const fom::Parameter& mu, bool reference) {
  if (level >= s.levels.size()) throw ConfigError("tolerance level " + std::to_string(level) + " does not exist");
  OnlineResult r;
  r.method = m;
  r.level = level;
  r.mu = mu;
  r.in_domain = s.config.domain.contains(mu);
  if (!r.in_domain) logger().warn("parameter ({}, {}, {}) lies outside the training box; extrapolating", mu.mu0, mu.mu1, mu.mu2);
  r.trajectory = make_query(s, m, level).trajectory(mu);

  ordered_json rep{{"method", to_string(m)},
                   {"level", level},
                   {"tolerance", s.levels[level].tolerance.velocity},
                   {"mu", {mu.mu0, mu.mu1, mu.mu2}},
                   {"in_domain", r.in_domain},
                   {"rom_size", rom_size(s, m, level)}};
  if (reference) {
    const auto ref = fom::Bdf2Stepper(s.fom, s.config.grid()).march(s.datum, mu);
    r.e_u = metrics::relative_error(r.trajectory.u, ref.u, s.fom.X_u);
    r.e_p = metrics::relative_error(r.trajectory.p, ref.p, s.fom.X_p);
    rep["e_u"] = *r.e_u;
    rep["e_p"] = *r.e_p;
  }
  const ArtifactStore store(s.config.output);
  const std::string key = "online-" + mu_key(m, level, mu);
  r.output = store.prepare("reports", key);
  io::write_matrix(r.output / "velocity.strb", r.trajectory.u);
  io::write_matrix(r.output / "pressure.strb", r.trajectory.p);
  io::write_matrix(r.output / "multipliers.strb", r.trajectory.lambda);
  io::write_text(r.output / "report.json", rep.dump(2) + "\n");
  store.commit("reports", key, "online", rep);
  return r;
}

StudyResult run_study(const StudyConfig& c) {
  const auto t_start = Clock::now();
  Offline off = offline(c, true);
  OfflineState& s = off.state;
  const auto& f = s.fom;
  const fom::TimeGrid grid = c.grid();
  Context ctx{ArtifactStore(c.output), s.events, true};

  const ordered_json test_in{{"fom", off.fom_key},
                             {"role", "test"},
                             {"grid", grid_json(c)},
                             {"split", config_to_json(c)["split"]},
                             {"domain", config_to_json(c)["domain"]},
                             {"count", c.n_test},
                             {"seed", c.seed + 1}};
  const pod::SnapshotSet test = stage(
      ctx, "snapshots", "test-solutions", test_in,
      [&](const fs::path& d) {
        const auto params = sample_parameters(c.domain, c.n_test, c.seed + 1);
        write_snapshots(d, pod::collect_snapshots(f, march_all(f, grid, s.datum, params), params));
      },
      [&](const fs::path& d) { return read_snapshots(d, f.n_boundaries()); });
  const auto& test_mu = test.velocity.parameters;
  std::vector<fom::Trajectory> reference;
  for (Index m = 0; m < static_cast<Index>(test_mu.size()); ++m) reference.push_back(trajectory_of(test, m));

  // Full-order reference timing with a prefactored step matrix.
  const fom::Bdf2Stepper stepper(f, grid);
  std::vector<double> fom_times;
  for (const auto& mu : test_mu)
    fom_times.push_back(time_median(c.repetitions, [&] { return stepper.march(s.datum, mu).u(0, 0); }));
  const double fom_seconds = metrics::median(fom_times);

  StudyResult res;
  const Index n_space = f.n_space();
  ordered_json levels = ordered_json::array();
  ordered_json timing_rows = ordered_json::array();
  for (std::size_t li = 0; li < s.levels.size(); ++li) {
    const auto& lb = s.levels[li];
    ordered_json lj{{"tolerance",
                     {{"velocity", lb.tolerance.velocity},
                      {"pressure", lb.tolerance.pressure},
                      {"multiplier", lb.tolerance.multiplier}}},
                    {"bases", lb.report},
                    {"methods", ordered_json::array()}};
    for (auto m : c.methods) {
      metrics::StudyRow row;
      row.method = to_string(m);
      row.eps_pod = lb.tolerance.velocity;
      row.rom_size = rom_size(s, m, li);
      row.rf = static_cast<double>(m == Method::SrbTfo ? n_space : n_space * c.steps) / static_cast<double>(row.rom_size);
      ordered_json mj{{"method", row.method}, {"rom_size", row.rom_size}, {"rf", row.rf}};

      bool stable = true;
      if (m == Method::StGrb) {
        const double cond = s.systems[li].stgrb->factor.condition();
        mj["condition_estimate"] = cond;
        stable = s.systems[li].stgrb->factor.rcond >= 1e-14;
      } else if (m == Method::SrbTfo) {
        mj["condition_estimate"] = s.systems[li].srbtfo->condition();
      } else {
        mj["factorization"] = s.systems[li].stpgrb->use_llt ? "cholesky" : "lu";
      }
      mj["stable"] = stable;

      double online = std::numeric_limits<double>::quiet_NaN();
      if (stable) {
        const Query q = make_query(s, m, li);
        std::vector<fom::Trajectory> rom;
        for (const auto& mu : test_mu) rom.push_back(q.trajectory(mu));
        const auto e = metrics::relative_errors(rom, reference, f);
        row.e_u = e.e_u;
        row.e_p = e.e_p;
        mj["per_mu_u"] = e.per_mu_u;
        mj["per_mu_p"] = e.per_mu_p;
        std::vector<double> times;
        for (const auto& mu : test_mu) times.push_back(time_median(c.repetitions, [&] { return q.coefficients(mu); }));
        online = metrics::median(times);
      } else {
        logger().warn("{} at tolerance {} is numerically singular; run `strb diagnose`", row.method, row.eps_pod);
        row.e_u = row.e_p = std::numeric_limits<double>::quiet_NaN();
      }
      mj["e_u"] = row.e_u;
      mj["e_p"] = row.e_p;
      metrics::PerfReport perf{stable ? n_space * c.steps : 0, row.rom_size, fom_seconds, online, 0.0};
      row.su = stable ? perf.speedup() : std::numeric_limits<double>::quiet_NaN();
      timing_rows.push_back({{"method", row.method},
                             {"eps_pod", row.eps_pod},
                             {"online_seconds", online},
                             {"su", row.su}});
      lj["methods"].push_back(mj);
      res.rows.push_back(row);
    }
    levels.push_back(lj);
  }

  ordered_json cfg = config_to_json(c);
  cfg.erase("output");
  cfg.erase("repetitions");
  res.details = {{"config", cfg},
                 {"fom",
                  {{"n_u", f.n_u},
                   {"n_p", f.n_p},
                   {"n_lambda", f.n_lambda()},
                   {"space_size", n_space},
                   {"space_time_size", n_space * c.steps}}},
                 {"train", params_json(s.train)},
                 {"test", params_json(test_mu)},
                 {"levels", levels}};
  ordered_json events = ordered_json::array();
  for (const auto& e : s.events)
    events.push_back({{"stage", e.stage}, {"key", e.key}, {"cached", e.cached}, {"seconds", e.seconds}, {"warning", e.warning}});
  res.timing = {{"fom_seconds", fom_seconds},
                {"repetitions", c.repetitions},
                {"rows", timing_rows},
                {"stages", events},
                {"total_seconds", since(t_start)}};

  const std::string key = "study-" + ArtifactStore::key(cfg);
  const ArtifactStore store(c.output);
  res.report_dir = store.prepare("reports", key);
  io::write_text(res.report_dir / "study.csv", metrics::study_csv(res.rows, false));
  io::write_text(res.report_dir / "study.json", metrics::study_json(res.rows, false));
  io::write_text(res.report_dir / "study_long.csv", metrics::study_long_csv(res.rows, false));
  io::write_text(res.report_dir / "details.json", res.details.dump(2) + "\n");
  io::write_text(res.report_dir / "timing.json", res.timing.dump(2) + "\n");
  io::write_text(res.report_dir / "timing.csv", metrics::study_csv(res.rows, true));
  store.commit("reports", key, "study", cfg);
  res.events = s.events;
  return res;
}

ordered_json run_diagnose(const StudyConfig& c) {
  Offline off = offline(c, true);
  const OfflineState& s = off.state;
  const auto& f = s.fom;
  const fom::Bdf2Stepper stepper(f, c.grid());
  ordered_json j{{"fom",
                  {{"n_u", f.n_u},
                   {"n_p", f.n_p},
                   {"n_lambda", f.n_lambda()},
                   {"infsup_constant", stability::fom_infsup_constant(f)},
                   {"step_condition_estimate", stepper.condition_estimate()}}},
                 {"levels", ordered_json::array()}};
  for (std::size_t li = 0; li < s.levels.size(); ++li) {
    const auto& lb = s.levels[li];
    ordered_json l{{"tolerance", lb.tolerance.velocity}, {"bases", lb.report}};
    const auto& sys = s.systems[li];
    if (sys.srbtfo) l["srbtfo_condition_estimate"] = sys.srbtfo->condition();
    if (sys.stgrb) {
      l["stgrb_condition_estimate"] = sys.stgrb->factor.condition();
      l["stgrb_singular"] = sys.stgrb->factor.rcond < 1e-14;
    }
    if (sys.stpgrb) l["stpgrb_factorization"] = sys.stpgrb->use_llt ? "cholesky" : "lu";
    j["levels"].push_back(l);
  }
  const ArtifactStore store(c.output);
  ordered_json cfg = config_to_json(c);
  cfg.erase("output");
  const std::string key = "diagnose-" + ArtifactStore::key(cfg);
  const fs::path d = store.prepare("reports", key);
  io::write_text(d / "diagnose.json", j.dump(2) + "\n");
  store.commit("reports", key, "diagnose", cfg);
  return j;
}

}  // namespace strb::pipeline
