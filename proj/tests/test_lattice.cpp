#include <doctest.h>

#include "fnm/dense.hpp"
#include "fnm/lattice.hpp"
#include "helpers.hpp"

using namespace fnm;
using namespace fnm::testing;

namespace {

ModelParams params(int L, Layout layout, double gamma = 1.0) {
  ModelParams p;
  p.L = L;
  p.layout = layout;
  p.gamma = gamma;
  return p;
}

}  // namespace

TEST_CASE("single-particle Hamiltonian on the two-site ladder") {
  ModelParams p = params(2, Layout::SB);
  p.t_par = 1.0;
  p.t_perp = 0.5;
  const LatticeModel m = build_model(p);
  REQUIRE(m.modes() == 4);
  MatrixXc expected(4, 4);
  expected << 0, -1, -0.5, 0,
              -1, 0, 0, -0.5,
              -0.5, 0, 0, -1,
              0, -0.5, -1, 0;
  CHECK(max_abs(m.h - expected) < 1e-15);
  CHECK(m.dissipative_sites == std::vector<Index>{2, 3});
  CHECK(m.params.dephasing == DephasingTarget::B);
}

TEST_CASE("A chain is idle") {
  const LatticeModel m = build_model(params(3, Layout::SAB));
  REQUIRE(m.modes() == 9);
  for (int i = 0; i < 3; ++i) {
    CHECK(max_abs(MatrixXc(m.h.row(m.a_mode(i)))) == 0.0);
    CHECK(max_abs(MatrixXc(m.h.col(m.a_mode(i)))) == 0.0);
  }
  CHECK(m.dissipative_sites == std::vector<Index>{6, 7, 8});
  CHECK(m.sa_modes().size() == 6);
  CHECK(m.b_modes()[0] == 6);
}

TEST_CASE("dephasing target and boundary options") {
  const LatticeModel s_only = build_model(params(3, Layout::SOnly));
  CHECK(s_only.dissipative_sites == std::vector<Index>{0, 1, 2});
  CHECK(s_only.params.dephasing == DephasingTarget::S);

  ModelParams direct = params(2, Layout::SB);
  direct.dephasing = DephasingTarget::S;
  CHECK(build_model(direct).dissipative_sites == std::vector<Index>{0, 1});

  CHECK(build_model(params(2, Layout::SB, 0.0)).dissipative_sites.empty());

  ModelParams ring = params(4, Layout::SOnly);
  ring.periodic = true;
  const LatticeModel r = build_model(ring);
  CHECK(r.h(0, 3) == cplx(-1.0));
  CHECK(build_model(params(4, Layout::SOnly)).h(0, 3) == cplx(0.0));
}

TEST_CASE("invalid model parameters") {
  auto kind_of = [](const ModelParams& p) {
    try {
      build_model(p);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind_of(params(0, Layout::SB)) == ErrorKind::Config);
  CHECK(kind_of(params(2, Layout::SB, -0.1)) == ErrorKind::Config);
  ModelParams bad = params(2, Layout::SOnly);
  bad.dephasing = DephasingTarget::B;
  CHECK(kind_of(bad) == ErrorKind::Config);
  CHECK_THROWS_AS(parse_layout("ABS"), Error);
  CHECK(parse_layout("sab") == Layout::SAB);
  CHECK(parse_dephasing("b") == DephasingTarget::B);
  CHECK_THROWS_AS(parse_pattern("10x1"), Error);
}

TEST_CASE("many-body Hamiltonian matches the reference Jordan-Wigner construction") {
  Rand rng(21);
  const JordanWigner jw(4);
  MatrixXc h = random_complex(rng, 4, 4);
  h = 0.5 * (h + h.adjoint()).eval();
  MatrixXc reference = MatrixXc::Zero(16, 16);
  for (int n = 0; n < 4; ++n)
    for (int m = 0; m < 4; ++m) reference += h(n, m) * jw.cdag(n) * jw.c[static_cast<std::size_t>(m)];
  const MatrixXc built = MatrixXc(dense::many_body_hamiltonian(h));
  CHECK(max_abs(built - reference) < 1e-12);
}

TEST_CASE("product states") {
  const auto v = initial_product_state(parse_pattern("1010"));
  CHECK(v.particles() == 2);
  CHECK(isometry_defect(v) < 1e-15);
  const auto c = c_from_orbitals(v).entries;
  CHECK(c.diagonal().real().isApprox(Eigen::Vector4d(1, 0, 1, 0)));

  CHECK(pattern_string(neel_pattern(5)) == "10101");
  CHECK(pattern_string(anti_neel_pattern(4)) == "0101");
  CHECK(pattern_string(left_domain_wall(4)) == "1100");
  CHECK(pattern_string(right_domain_wall(4)) == "0011");

  for (int L = 2; L <= 6; ++L) {
    const auto a = c_from_orbitals(initial_product_state(neel_pattern(L)));
    const auto b = c_from_orbitals(initial_product_state(anti_neel_pattern(L)));
    CHECK(overlap_c(a, b) == 0.0);
  }

  const LatticeModel m = build_model(params(2, Layout::SB));
  CHECK(pattern_string(embed_pattern(m, neel_pattern(2), BathFilling::Full)) == "1011");
  CHECK_THROWS_AS(embed_pattern(m, neel_pattern(3)), Error);
}

TEST_CASE("Bell-pair preparation") {
  const LatticeModel m = build_model(params(2, Layout::SAB));
  const OrbitalMatrix v = bell_pairs(m);
  CHECK(isometry_defect(v) < 1e-15);
  const VectorXc psi = JordanWigner(6).slater(v.entries);
  CHECK(psi.norm() == doctest::Approx(1.0));
  const dense::DenseState full = dense::pure_state(psi, 6);
  // Each S site is maximally entangled with its A partner.
  CHECK(dense::purity(dense::partial_trace(full, m.s_modes())) == doctest::Approx(0.25));
  CHECK(dense::purity(dense::partial_trace(full, m.sa_modes())) == doctest::Approx(1.0));
  CHECK(dense::vn_mutual_info(dense::partial_trace(full, m.sa_modes()), ModeSubset::range(0, 2, 4)) ==
        doctest::Approx(4.0 * std::log(2.0)));
  CHECK_THROWS_AS(bell_pairs(build_model(params(2, Layout::SB))), Error);
}
