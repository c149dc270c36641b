// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// STRB_ACCEPT_DIR overrides the scratch store location.

#include "rom_fixtures.hpp"
#include "strb/error.hpp"
#include "strb/io.hpp"
#include "strb/metrics.hpp"
#include "strb/petrov.hpp"
#include "strb/pipeline.hpp"
#include "strb/stability.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace strb;
using linalg::Index;
using linalg::Matrix;
using linalg::SparseMatrix;
using linalg::Vector;
namespace fs = std::filesystem;
namespace pl = strb::pipeline;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

fs::path scratch_root() {
  if (const char* d = std::getenv("STRB_ACCEPT_DIR")) return d;
  return fs::temp_directory_path() / ("strb-acceptance-" + std::to_string(::getpid()));
}

fom::DirichletDatum datum_for(const fom::FomSpatialBlocks& f, const fom::TimeGrid& g) {
  return fom::DirichletDatum::from_blocks(f, fom::FlowSplit::UnitAndMu2, g.period);
}

Matrix lower_cholesky(const Matrix& p) { return Eigen::LLT<Matrix>(p).matrixL(); }

// Brute-force assembly oracles on the pinned tiny instance.
void assembly_oracles(Outcome& o) {
  const auto t0 = Clock::now();
  const auto f = fixture::tiny_fom();
  const fom::TimeGrid grid{1.0, 5};
  const Index n_dofs = f.n_space();
  o.require(n_dofs <= 200, "tiny instance exceeds 200 dofs");
  const Matrix ast = fixture::dense_spacetime(f, grid);
  const Matrix lp = lower_cholesky(fixture::dense_norm(f, grid.steps, true));
  const auto datum = datum_for(f, grid);
  const Vector fst = fom::SpaceTimeSystem(f, grid).rhs(datum, {6.5, 0.2, 0.3});
  std::mt19937_64 rng(101);
  double worst_g = 0.0, worst_pg = 0.0, worst_rhs = 0.0;
  for (auto shape : {fixture::BasisShape{3, 3, 2, 2, 2}, fixture::BasisShape{4, 5, 3, 5, 5},
                     fixture::BasisShape{2, 4, 1, 3, 1}}) {
    const auto b = fixture::random_basis(f, grid.steps, shape, rng);
    const Matrix pi = b.materialize();
    worst_g = std::max(worst_g, linalg::relative_frobenius(rom::assemble_stgrb(b, f, grid).matrix,
                                                           pi.transpose() * ast * pi));
    const auto s = rom::assemble_stpgrb(b, f, grid, rom::NormSurrogate::diagonal(f));
    const Matrix wa = lp.triangularView<Eigen::Lower>().solve(ast * pi);
    const Vector wf = lp.triangularView<Eigen::Lower>().solve(fst);
    worst_pg = std::max(worst_pg, linalg::relative_frobenius(s.matrix, wa.transpose() * wa));
    const Vector brute = wa.transpose() * wf;
    worst_rhs = std::max(worst_rhs, (rom::online_rhs_stpgrb(s, datum, grid, {6.5, 0.2, 0.3}) - brute).norm() /
                                        brute.norm());
  }
  const double secs = seconds_since(t0);
  o.note << "dofs " << n_dofs << ", A_st " << worst_g << ", A_pg " << worst_pg << ", F_pg " << worst_rhs << ", "
         << secs << " s";
  o.require(worst_g <= 1e-12 && worst_pg <= 1e-12 && worst_rhs <= 1e-12, "relative Frobenius above 1e-12");
  o.require(secs < 5.0, "runtime above 5 s");
}

// Untruncated bases reproduce the full-order trajectory.
void full_basis_exactness(Outcome& o) {
  const auto t0 = Clock::now();
  const auto f = fixture::tiny_fom();
  const fom::TimeGrid grid{1.0, 8};
  const auto b = fixture::full_basis(f, grid.steps);
  const auto datum = datum_for(f, grid);
  const fom::Bdf2Stepper stepper(f, grid);
  const auto g = rom::assemble_stgrb(b, f, grid);
  const auto pg = rom::assemble_stpgrb(b, f, grid, rom::NormSurrogate::diagonal(f));
  const rom::SrbTfo tfo(b.u.phi, b.p.phi, f, grid);
  double worst = 0.0;
  for (const auto& mu : pl::sample_parameters(fom::ParameterDomain{}, 3, 7)) {
    const auto ref = stepper.march(datum, mu);
    const std::vector<fom::Trajectory> got{
        rom::reconstruct(rom::solve_stgrb(g, rom::online_rhs_stgrb(g, datum, grid, mu)), b),
        rom::reconstruct(rom::solve_stpgrb(pg, rom::online_rhs_stpgrb(pg, datum, grid, mu)), b),
        tfo.reconstruct(tfo.march(datum, mu))};
    for (const auto& tr : got) {
      worst = std::max(worst, metrics::relative_error(tr.u, ref.u, f.X_u));
      worst = std::max(worst, metrics::relative_error(tr.p, ref.p, f.X_p));
    }
  }
  const double secs = seconds_since(t0);
  o.note << "worst relative error " << worst << ", " << secs << " s";
  o.require(worst <= 1e-8, "error above 1e-8");
  o.require(secs < 60.0, "runtime above 60 s");
}

// Observed temporal order against a fine-step reference.
void bdf2_order(Outcome& o) {
  const auto f = fom::assemble_fom(mesh::make_channel(3.0, 1.0, 6, 3), {1.06, 3.5e-3, 2, 0});
  const auto datum = datum_for(f, {1.0, 10});
  const fom::Parameter mu{6.0, 0.0, 0.5};
  const int nref = 1280;
  const auto ref = fom::Bdf2Stepper(f, {1.0, nref}).march(datum, mu);
  std::vector<double> err;
  for (int n : {10, 20, 40, 80}) {
    const auto tr = fom::Bdf2Stepper(f, {1.0, n}).march(datum, mu);
    double e = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vector d = tr.u.col(k) - ref.u.col((k + 1) * (nref / n) - 1);
      e = std::max(e, std::sqrt(d.dot(f.X_u * d)));
    }
    err.push_back(e);
  }
  o.note << "orders";
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double order = std::log2(err[i] / err[i + 1]);
    o.note << ' ' << order;
    o.require(order >= 1.8 && order <= 2.2, "order outside [1.8, 2.2]");
  }
}

pl::StudyConfig deficient_config(const fs::path& out, bool enrich) {
  pl::StudyConfig c;
  c.tolerances = {{1e-2, 1e-4, 1e-4}};
  c.methods = {pl::Method::StGrb, pl::Method::StPgrb};
  c.temporal_enrichment = enrich;
  c.repetitions = 1;
  c.output = out.string();
  return c;
}

// Coarse velocity, fine pressure: the temporal coupling loses rank.
void stability_dichotomy(Outcome& o, const fs::path& root) {
  const auto plain = pl::run_study(deficient_config(root / "deficient", false));
  const auto& lv = plain.details["levels"][0];
  const auto& counts = lv["bases"]["modes"];
  const int nt_u = counts["velocity_time"].get<int>(), nt_p = counts["pressure_time"].get<int>();
  const double sigma = lv["bases"]["ranks_before"]["sigma_min_up"].get<double>();
  const double cond = lv["methods"][0]["condition_estimate"].get<double>();
  const bool g_stable = lv["methods"][0]["stable"].get<bool>();
  const double pg_eu = plain.rows[1].e_u_ratio(), pg_ep = plain.rows[1].e_p_ratio();
  o.note << "n_t u/p " << nt_u << '/' << nt_p << ", sigma_min " << sigma << ", condition " << cond;
  o.require(nt_p > nt_u, "pressure temporal modes do not exceed velocity ones");
  o.require(sigma < 1e-10, "coupling not rank deficient");
  o.require(cond > 1e14 && !g_stable, "plain ST-GRB operator not flagged singular");
  o.require(std::isfinite(pg_eu) && std::isfinite(pg_ep), "ST-PGRB did not solve on deficient bases");

  const auto fixed = pl::run_study(deficient_config(root / "deficient", true));
  const auto& fl = fixed.details["levels"][0];
  const double ratio = fixed.rows[0].e_u_ratio();
  o.note << "; enriched condition " << fl["methods"][0]["condition_estimate"].get<double>() << ", E_u/eps "
         << ratio << "; ST-PGRB plain E_u/eps " << pg_eu;
  o.require(fl["methods"][0]["stable"].get<bool>(), "enriched ST-GRB still singular");
  o.require(ratio <= 100.0, "enriched E_u/eps above 100");
}

// Supremizers of every stored pressure POD basis on the default mesh.
void supremizer_identities(Outcome& o, const pl::OfflineState& s) {
  const auto& f = s.fom;
  double worst_c = 0.0, worst_id = 0.0, smin = 1e300;
  Index total = 0;
  for (const auto& lv : s.levels) {
    const auto sup = stability::pressure_supremizers(f, lv.p.phi);
    for (Index j = 0; j < sup.vectors.cols(); ++j) {
      const Vector sj = sup.vectors.col(j);
      const double n2 = sj.dot(f.X_u * sj);
      worst_c = std::max(worst_c, (f.C_all * sj).norm() / sj.norm());
      worst_id = std::max(worst_id, std::abs(sj.dot(f.Bt_bc * lv.p.phi.col(j)) - n2) / n2);
      smin = std::min(smin, std::sqrt(n2));
      ++total;
    }
  }
  o.note << total << " supremizers, |Cs| " << worst_c << ", identity " << worst_id << ", min norm " << smin;
  o.require(worst_c <= 1e-9 && worst_id <= 1e-9, "identity above 1e-9");
  o.require(smin > 1e-8, "supremizer norm below 1e-8");
}

// Space-time norm of a rank-one field and isometry of reduced coordinates.
void norm_factorization(Outcome& o, const pl::OfflineState& s) {
  const auto& x = s.fom.X_u;
  const Index ns = s.fom.n_u, nt = s.config.steps;
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Vector phi = oracle::random_matrix(ns, 1, rng);
    const Vector psi = oracle::random_matrix(nt, 1, rng);
    const double lhs = std::sqrt(pod::space_time_norm_squared(phi * psi.transpose(), x));
    const double rhs = std::sqrt(phi.dot(x * phi)) * psi.norm();
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  double worst_red = 0.0;
  for (const auto& lv : s.levels) {
    const Matrix& phi = lv.phi_u_enriched;
    const Matrix& psi = lv.psi_u_enriched;
    for (int t = 0; t < 10; ++t) {
      const Matrix w = oracle::random_matrix(phi.cols(), psi.cols(), rng);
      const double n = std::sqrt(pod::space_time_norm_squared(phi * w * psi.transpose(), x));
      worst_red = std::max(worst_red, std::abs(n - w.norm()) / w.norm());
    }
  }
  o.note << "rank-one " << worst << ", reduced " << worst_red;
  o.require(worst <= 1e-12, "factorization above 1e-12");
  o.require(worst_red <= 1e-10, "reduced-norm identity above 1e-10");
}

// ST-PGRB solution against random reduced perturbations of the residual functional.
void residual_minimization(Outcome& o) {
  const auto f = fixture::tiny_fom();
  const fom::TimeGrid grid{1.0, 5};
  std::mt19937_64 rng(707);
  const auto b = fixture::random_basis(f, grid.steps, {4, 3, 2, 3, 2}, rng);
  const auto s = rom::assemble_stpgrb(b, f, grid, rom::NormSurrogate::diagonal(f));
  const auto datum = datum_for(f, grid);
  const fom::Parameter mu{6.0, 0.2, 0.5};
  const Matrix ap = fixture::dense_spacetime(f, grid) * b.materialize();
  const Matrix lp = lower_cholesky(fixture::dense_norm(f, grid.steps, true));
  const Vector fst = fom::SpaceTimeSystem(f, grid).rhs(datum, mu);
  auto j = [&](const Vector& w) { return lp.triangularView<Eigen::Lower>().solve(fst - ap * w).squaredNorm(); };
  const Vector w = rom::solve_stpgrb(s, rom::online_rhs_stpgrb(s, datum, grid, mu)).w;
  const double j0 = j(w);
  int better = 0;
  double least = 1e300;
  for (int t = 0; t < 50; ++t) {
    const double scale = std::pow(10.0, -1.0 - 4.0 * t / 49.0) * w.norm();
    const Vector d = oracle::random_matrix(w.size(), 1, rng).normalized() * scale;
    const double gain = j(w + d) - j0;
    better += gain > 0.0;
    least = std::min(least, gain);
  }
  o.note << better << "/50 perturbations increase the residual, smallest increase " << least;
  o.require(better == 50, "a perturbation did not increase the residual");
}

const metrics::StudyRow* find_row(const std::vector<metrics::StudyRow>& rows, const std::string& m, double eps) {
  for (const auto& r : rows)
    if (r.method == m && r.eps_pod == eps) return &r;
  return nullptr;
}

// Default desk study: error ratios, speedup and reduction orderings, runtime.
void trend_reproduction(Outcome& o, const pl::StudyResult& r, double secs, const pl::StudyConfig& c) {
  for (const auto& tol : c.tolerances) {
    const auto* t = find_row(r.rows, "srbtfo", tol.velocity);
    const auto* g = find_row(r.rows, "stgrb", tol.velocity);
    const auto* p = find_row(r.rows, "stpgrb", tol.velocity);
    if (!t || !g || !p) {
      o.require(false, "missing study row");
      continue;
    }
    o.note << "eps " << tol.velocity << ": E/eps";
    for (const auto* row : {t, g, p}) {
      o.note << ' ' << row->method << ' ' << row->e_u_ratio() << '/' << row->e_p_ratio();
      for (double v : {row->e_u_ratio(), row->e_p_ratio()})
        o.require(v >= 0.1 && v <= 100.0, row->method + " error ratio outside [0.1, 100]");
    }
    o.note << ", SU " << p->su << " > " << g->su << " > " << t->su << ", RF " << g->rf << ' ' << p->rf << " vs "
           << t->rf << "; ";
    o.require(p->su > g->su && g->su > t->su && t->su > 1.0, "speedup ordering");
    o.require(g->rf > t->rf && p->rf > t->rf, "reduction factor ordering");
  }
  o.note << "runtime " << secs << " s";
  o.require(secs < 900.0, "study runtime above 15 minutes");
}

void determinism(Outcome& o, const pl::StudyResult& a, const pl::StudyResult& b) {
  int same = 0;
  for (const char* name : {"study.csv", "study.json", "study_long.csv", "details.json"}) {
    const bool eq = io::read_text(a.report_dir / name) == io::read_text(b.report_dir / name);
    same += eq;
    o.require(eq, std::string(name) + " differs");
  }
  o.note << same << "/4 reports byte-identical across independent stores";
}

bool report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  std::cout << "criterion " << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << title << ": " << o.note.str()
            << std::endl;
  return o.pass;
}

}  // namespace

int main() {
  pl::set_log_level("warn");
  const fs::path root = scratch_root();
  fs::remove_all(root);
  bool ok = true;

  ok &= report(1, "brute-force assembly oracles", assembly_oracles);
  ok &= report(2, "full-basis exactness", full_basis_exactness);
  ok &= report(3, "BDF2 temporal order", bdf2_order);
  ok &= report(4, "stability dichotomy", [&](Outcome& o) { stability_dichotomy(o, root); });

  pl::StudyConfig c;
  c.output = (root / "study-a").string();
  std::optional<pl::StudyResult> first;
  double first_secs = 0.0;
  try {
    const auto t0 = Clock::now();
    first = pl::run_study(c);
    first_secs = seconds_since(t0);
  } catch (const std::exception& e) {
    std::cout << "default study failed: " << e.what() << std::endl;
  }
  std::optional<pl::OfflineState> state;
  if (first) state = pl::run_offline(c, false);

  auto needs_study = [&](const std::function<void(Outcome&)>& body) {
    return [&, body](Outcome& o) {
      if (!state) {
        o.require(false, "default study did not run");
        return;
      }
      body(o);
    };
  };
  ok &= report(5, "supremizer identities", needs_study([&](Outcome& o) { supremizer_identities(o, *state); }));
  ok &= report(6, "norm factorization", needs_study([&](Outcome& o) { norm_factorization(o, *state); }));
  ok &= report(7, "residual minimization", residual_minimization);
  ok &= report(8, "trend reproduction",
               needs_study([&](Outcome& o) { trend_reproduction(o, *first, first_secs, c); }));
  ok &= report(9, "determinism", needs_study([&](Outcome& o) {
                 pl::StudyConfig c2 = c;
                 c2.output = (root / "study-b").string();
                 determinism(o, *first, pl::run_study(c2));
               }));

  if (!std::getenv("STRB_ACCEPT_DIR")) fs::remove_all(root);
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << std::endl;
  return ok ? 0 : 1;
}
