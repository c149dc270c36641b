#include <doctest.h>

#include "rom_fixtures.hpp"
#include "strb/error.hpp"
#include "strb/io.hpp"
#include "strb/metrics.hpp"
#include "strb/stability.hpp"

using namespace strb;
using namespace strb::rom;
using fom::DirichletDatum;
using fom::FlowSplit;
using fom::Parameter;
using fom::TimeGrid;

namespace {

const TimeGrid kGrid{1.0, 5};

DirichletDatum datum_for(const fom::FomSpatialBlocks& f) {
  return DirichletDatum::from_blocks(f, FlowSplit::UnitAndMu2, kGrid.period);
}

}  // namespace

TEST_CASE("Kronecker assembly matches the projected space-time operator") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(10);
  const Matrix ast = fixture::dense_spacetime(f, kGrid);
  for (auto shape : {fixture::BasisShape{3, 3, 2, 2, 2}, fixture::BasisShape{4, 5, 3, 5, 5},
                     fixture::BasisShape{2, 4, 1, 3, 1}}) {
    const auto b = fixture::random_basis(f, kGrid.steps, shape, rng);
    const auto s = assemble_stgrb(b, f, kGrid);
    const Matrix pi = b.materialize();
    const Matrix brute = pi.transpose() * ast * pi;
    REQUIRE(s.matrix.rows() == b.size());
    CHECK(linalg::relative_frobenius(s.matrix, brute) < 1e-12);
  }
  // Untruncated instance.
  const auto b = fixture::full_basis(f, kGrid.steps);
  const Matrix pi = b.materialize();
  CHECK(linalg::relative_frobenius(assemble_stgrb(b, f, kGrid).matrix, pi.transpose() * ast * pi) < 1e-12);
}

TEST_CASE("identity temporal basis gives the BDF2 band in time") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(11);
  auto b = fixture::random_basis(f, kGrid.steps, {2, 5, 1, 5, 5}, rng);
  b.tu.psi = b.tp.psi = Matrix::Identity(5, 5);
  const auto s = assemble_stgrb(b, f, kGrid);
  const Matrix mh = b.u.phi.transpose() * (f.M * b.u.phi);
  const Matrix ah = b.u.phi.transpose() * (f.A * b.u.phi);
  const double c = 2.0 / 3.0 * kGrid.dt();
  const Index nt = 5;
  for (Index a = 0; a < 2; ++a)
    for (Index bb = 0; bb < 2; ++bb)
      for (Index n = 0; n < nt; ++n)
        for (Index m = 0; m < nt; ++m) {
          double expect = 0.0;
          if (m == n) expect = mh(a, bb) + c * ah(a, bb);
          if (m == n - 1) expect = -4.0 / 3.0 * mh(a, bb);
          if (m == n - 2) expect = 1.0 / 3.0 * mh(a, bb);
          CHECK(s.matrix(a * nt + n, bb * nt + m) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
        }
}

TEST_CASE("single mode velocity block by hand") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(12);
  auto b = fixture::random_basis(f, kGrid.steps, {1, 1, 1, 1, 1}, rng);
  const auto s = assemble_stgrb(b, f, kGrid);
  const Vector phi = b.u.phi.col(0), psi = b.tu.psi.col(0);
  double g1 = 0.0, g2 = 0.0;
  for (Index n = 1; n < psi.size(); ++n) g1 += psi[n] * psi[n - 1];
  for (Index n = 2; n < psi.size(); ++n) g2 += psi[n] * psi[n - 2];
  const double m = phi.dot(f.M * phi), a = phi.dot(f.A * phi);
  const double expect = m + 2.0 / 3.0 * kGrid.dt() * a - 4.0 / 3.0 * m * g1 + 1.0 / 3.0 * m * g2;
  CHECK(s.matrix(0, 0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("online right-hand side") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(13);
  const auto b = fixture::random_basis(f, kGrid.steps, {3, 3, 2, 2, 3}, rng);
  const auto s = assemble_stgrb(b, f, kGrid);
  auto datum = datum_for(f);
  const fom::SpaceTimeSystem st(f, kGrid);
  const Matrix pi = b.materialize();
  for (const auto& mu : fixture::sample(3, 14)) {
    const Vector brute = pi.transpose() * st.rhs(datum, mu);
    const Vector fast = online_rhs_stgrb(s, datum, kGrid, mu);
    CHECK((fast - brute).norm() <= 1e-13 * brute.norm());
    CHECK(fast.head(b.n_u_st() + b.n_p_st()).norm() == 0.0);
  }

  auto zero = datum;
  zero.law = [](double, const Parameter&) { return 0.0; };
  CHECK(online_rhs_stgrb(s, zero, kGrid, Parameter{}).norm() == 0.0);

  auto bi = b;
  bi.tl[0].psi = Matrix::Identity(5, 5);
  const auto si = assemble_stgrb(bi, f, kGrid);
  const Parameter mu{5.0, 0.15, 0.4};
  const Vector r = online_rhs_stgrb(si, datum, kGrid, mu);
  const Vector gt = datum.temporal(0, kGrid, mu);
  const Vector& gs = datum.g_space[0];
  const Index off = bi.n_u_st() + bi.n_p_st();
  for (Index i = 0; i < gs.size(); ++i)
    for (Index j = 0; j < 5; ++j) CHECK(r[off + i * 5 + j] == doctest::Approx(gs[i] * gt[j]).epsilon(1e-14));
}

TEST_CASE("solve contracts") {
  ReducedGalerkinSystem id;
  id.matrix = Matrix::Identity(4, 4);
  factorize(id);
  id.n_us = 1;
  id.n_ut = 2;
  id.n_ps = 1;
  id.n_pt = 1;
  id.n_ls = {1};
  id.n_lt = {1};
  const Vector rhs = Vector::LinSpaced(4, 1.0, 4.0);
  CHECK(solve_stgrb(id, rhs).w == rhs);

  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(15);
  auto b = fixture::random_basis(f, kGrid.steps, {4, 3, 2, 2, 2}, rng);
  // Enrich so the instance is well posed, then check the residual.
  b.u.phi = stability::enrich_space_basis(
                b.u.phi, f.X_u,
                {stability::pressure_supremizers(f, b.p.phi), stability::multiplier_supremizers(f, 0)})
                .phi;
  stability::temporal_enrich_all(b, 0.5);
  const auto s = assemble_stgrb(b, f, kGrid);
  const Vector g = online_rhs_stgrb(s, datum_for(f), kGrid, Parameter{});
  const auto sol = solve_stgrb(s, g);
  CHECK((s.matrix * sol.w - g).norm() <= 1e-10 * g.norm());
  CHECK(s.factor.condition() < 1e12);
}

TEST_CASE("full bases reproduce the full-order solution") {
  const auto f = fixture::tiny_fom();
  const auto b = fixture::full_basis(f, kGrid.steps);
  const auto s = assemble_stgrb(b, f, kGrid);
  const auto datum = datum_for(f);
  const fom::Bdf2Stepper stepper(f, kGrid);
  for (const auto& mu : fixture::sample(3, 16)) {
    const auto ref = stepper.march(datum, mu);
    const auto tr = reconstruct(solve_stgrb(s, online_rhs_stgrb(s, datum, kGrid, mu)), b);
    CHECK(metrics::relative_error(tr.u, ref.u, f.X_u) <= 1e-8);
    CHECK(metrics::relative_error(tr.p, ref.p, f.X_p) <= 1e-8);
    CHECK((tr.lambda - ref.lambda).norm() <= 1e-8 * ref.lambda.norm());
  }
}

TEST_CASE("planted temporal deficiency makes the Galerkin operator singular") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(17);
  auto b = fixture::random_basis(f, kGrid.steps, {3, 2, 2, 3, 2}, rng);
  b.u.phi = stability::enrich_space_basis(
                b.u.phi, f.X_u,
                {stability::pressure_supremizers(f, b.p.phi), stability::multiplier_supremizers(f, 0)})
                .phi;
  CHECK(stability::rank_diagnostics(b).violation);
  const auto bad = assemble_stgrb(b, f, kGrid);
  CHECK(bad.factor.condition() > 1e14);
  const Vector g = online_rhs_stgrb(bad, datum_for(f), kGrid, Parameter{});
  CHECK_THROWS_AS(solve_stgrb(bad, g), NumericalError);
  try {
    (void)solve_stgrb(bad, g);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("diagnose") != std::string::npos);
  }

  stability::temporal_enrich_all(b, 0.5);
  CHECK_FALSE(stability::rank_diagnostics(b).violation);
  const auto good = assemble_stgrb(b, f, kGrid);
  CHECK(good.factor.condition() < 1e12);
  CHECK_NOTHROW((void)solve_stgrb(good, online_rhs_stgrb(good, datum_for(f), kGrid, Parameter{})));
}

TEST_CASE("reconstruction") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(18);
  const auto b = fixture::random_basis(f, kGrid.steps, {3, 2, 2, 2, 2}, rng);
  RomSolution sol{Vector::Zero(b.size()), b.n_u_st(), b.n_p_st(), {b.n_lambda_st(0)}};
  auto tr = reconstruct(sol, b);
  CHECK(tr.u.norm() == 0.0);
  CHECK(tr.p.norm() == 0.0);
  CHECK(tr.lambda.norm() == 0.0);

  sol.w[1 * 2 + 1] = 1.0;  // velocity mode (1, 1)
  tr = reconstruct(sol, b);
  CHECK((tr.u - b.u.phi.col(1) * b.tu.psi.col(1).transpose()).norm() < 1e-15);

  sol.w = oracle::random_matrix(b.size(), 1, rng);
  tr = reconstruct(sol, b);
  const Vector full = b.materialize() * sol.w;
  CHECK((fom::SpaceTimeSystem(f, kGrid).pack(tr) - full).norm() <= 1e-13 * full.norm());

  sol.n_u -= 1;
  CHECK_THROWS_AS((void)reconstruct(sol, b), DimensionError);
}

TEST_CASE("space-only Galerkin with BDF2 marching") {
  const auto f = fixture::tiny_fom();
  const auto full = fixture::full_basis(f, kGrid.steps);
  const SrbTfo rom(full.u.phi, full.p.phi, f, kGrid);
  const auto datum = datum_for(f);
  const fom::Bdf2Stepper stepper(f, kGrid);
  for (const auto& mu : fixture::sample(2, 19)) {
    const auto ref = stepper.march(datum, mu);
    const auto tr = rom.reconstruct(rom.march(datum, mu));
    CHECK((tr.u - ref.u).norm() <= 1e-9 * ref.u.norm());
    CHECK((tr.p - ref.p).norm() <= 1e-9 * ref.p.norm());
  }
  auto zero = datum;
  zero.law = [](double, const Parameter&) { return 0.0; };
  const auto c = rom.march(zero, Parameter{});
  CHECK(c.u.norm() == 0.0);
  CHECK(c.p.norm() == 0.0);
  CHECK(c.lambda.norm() == 0.0);
}

TEST_CASE("offline operator is independent of the query and deterministic") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 r1(20), r2(20);
  const auto b1 = fixture::random_basis(f, kGrid.steps, {3, 3, 2, 2, 2}, r1);
  const auto b2 = fixture::random_basis(f, kGrid.steps, {3, 3, 2, 2, 2}, r2);
  const auto s1 = assemble_stgrb(b1, f, kGrid);
  const auto before = io::fnv1a(s1.matrix.data(), s1.matrix.size());
  for (const auto& mu : fixture::sample(2, 21)) (void)online_rhs_stgrb(s1, datum_for(f), kGrid, mu);
  CHECK(io::fnv1a(s1.matrix.data(), s1.matrix.size()) == before);
  const auto s2 = assemble_stgrb(b2, f, kGrid);
  CHECK(io::fnv1a(s2.matrix.data(), s2.matrix.size()) == before);
}

TEST_CASE("Galerkin residual is orthogonal to the trial space") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(22);
  auto b = fixture::random_basis(f, kGrid.steps, {4, 3, 2, 2, 2}, rng);
  b.u.phi = stability::enrich_space_basis(
                b.u.phi, f.X_u,
                {stability::pressure_supremizers(f, b.p.phi), stability::multiplier_supremizers(f, 0)})
                .phi;
  stability::temporal_enrich_all(b, 0.5);
  const auto s = assemble_stgrb(b, f, kGrid);
  const fom::SpaceTimeSystem st(f, kGrid);
  const Parameter mu{7.0, 0.25, 0.6};
  const Vector rhs = st.rhs(datum_for(f), mu);
  const Matrix pi = b.materialize();
  const Vector w = solve_stgrb(s, online_rhs_stgrb(s, datum_for(f), kGrid, mu)).w;
  const Vector r = rhs - st.apply(pi * w);
  CHECK((pi.transpose() * r).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("assembly rejects mismatched bases") {
  const auto f = fixture::tiny_fom();
  std::mt19937_64 rng(23);
  auto b = fixture::random_basis(f, kGrid.steps, {2, 2, 1, 1, 1}, rng);
  b.u.phi.conservativeResize(b.u.phi.rows() - 1, Eigen::NoChange);
  CHECK_THROWS_AS((void)assemble_stgrb(b, f, kGrid), DimensionError);
}
