#include <doctest.h>

#include <cmath>

#include "fnm/dense.hpp"
#include "helpers.hpp"

using namespace fnm;
using namespace fnm::testing;

namespace {

LatticeModel model(int L, Layout layout, double gamma, double t_par = 1.0, double t_perp = 1.0) {
  ModelParams p;
  p.L = L;
  p.layout = layout;
  p.gamma = gamma;
  p.t_par = t_par;
  p.t_perp = t_perp;
  return build_model(p);
}

ScheduleConfig schedule(double dt, double t_max, int stride = 1) {
  ScheduleConfig s;
  s.dt = dt;
  s.t_max = t_max;
  s.sample_stride = stride;
  return s;
}

dense::DenseState random_pure(Rand& rng, int modes) {
  VectorXc psi = random_complex(rng, Index{1} << modes, 1);
  return dense::pure_state(psi / psi.norm(), modes);
}

}  // namespace

TEST_CASE("Fock operators satisfy the canonical anticommutators") {
  const auto ops = dense::build_fock_operators(4);
  const JordanWigner jw(4);
  const MatrixXc id = MatrixXc::Identity(16, 16);
  for (int n = 0; n < 4; ++n) {
    const MatrixXc cn(ops.annihilate[static_cast<std::size_t>(n)]);
    CHECK(max_abs(cn - jw.c[static_cast<std::size_t>(n)]) < 1e-15);
    CHECK(max_abs(MatrixXc(ops.number[static_cast<std::size_t>(n)]) - jw.number(n)) < 1e-15);
    for (int m = 0; m < 4; ++m) {
      const MatrixXc cm(ops.annihilate[static_cast<std::size_t>(m)]);
      const MatrixXc cmd(ops.create[static_cast<std::size_t>(m)]);
      CHECK(max_abs(cn * cmd + cmd * cn - (n == m ? id : MatrixXc::Zero(16, 16))) < 1e-12);
      CHECK(max_abs(cn * cm + cm * cn) < 1e-12);
    }
  }
  try {
    dense::build_fock_operators(dense::kMaxModes + 1);
    FAIL("oversized Fock space accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resource);
  }
}

TEST_CASE("basis helpers and Slater vectors") {
  CHECK(dense::basis_index({true, false, true}) == 5);
  CHECK(dense::basis_vector({false, true})(1) == cplx(1.0));
  Rand rng(41);
  const OrbitalMatrix v = random_orbitals(rng, 4, 2);
  const VectorXc a = dense::slater_to_dense(v), b = JordanWigner(4).slater(v.entries);
  // Equal up to a global phase.
  CHECK(max_abs(MatrixXc(a * a.adjoint() - b * b.adjoint())) < 1e-12);
}

TEST_CASE("check_state rejects invalid density matrices") {
  auto kind_of = [](const MatrixXc& rho) {
    try {
      dense::check_state(dense::DenseState{rho, 1});
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  MatrixXc good = MatrixXc::Identity(2, 2) * 0.5;
  CHECK(kind_of(good) == ErrorKind::Io);
  MatrixXc trace = MatrixXc::Identity(2, 2);
  CHECK(kind_of(trace) == ErrorKind::InvalidState);
  MatrixXc herm = good;
  herm(0, 1) = 0.1;
  CHECK(kind_of(herm) == ErrorKind::InvalidState);
  MatrixXc negative(2, 2);
  negative << 1.5, 0, 0, -0.5;
  CHECK(kind_of(negative) == ErrorKind::InvalidState);
}

TEST_CASE("closed evolution keeps purity and trace") {
  Rand rng(42);
  const LatticeModel m = model(2, Layout::SB, 0.0);
  const auto states = dense::evolve_lindblad(random_pure(rng, 4), m, schedule(0.05, 2.0, 5));
  for (const auto& s : states) {
    CHECK(std::abs(s.rho.trace() - 1.0) < 1e-10);
    CHECK(dense::purity(s) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("pure dephasing damps coherences by the number of differing dissipative bits") {
  Rand rng(43);
  const double gamma = 0.7, t = 1.5;
  const LatticeModel m = model(2, Layout::SB, gamma, 0.0, 0.0);
  const dense::DenseState rho0 = random_pure(rng, 4);
  const auto states = dense::evolve_lindblad(rho0, m, schedule(0.01, t, 150));
  const MatrixXc& rho = states.back().rho;
  // Modes 2 and 3 (the B chain) are the two least significant bits.
  double worst = 0.0;
  for (Index x = 0; x < 16; ++x)
    for (Index y = 0; y < 16; ++y) {
      const int differing = std::popcount(static_cast<unsigned>((x ^ y) & 0b11));
      const cplx expected = rho0.rho(x, y) * std::exp(-0.5 * gamma * t * differing);
      worst = std::max(worst, std::abs(rho(x, y) - expected));
    }
  CHECK(worst < 1e-9);
  for (const auto& s : states) CHECK(std::abs(s.rho.trace() - 1.0) < 1e-12);
}

TEST_CASE("a particle oscillates across a single rung") {
  const LatticeModel m = model(1, Layout::SB, 0.0);
  const auto pattern = std::vector<bool>{true, false};
  const ScheduleConfig s = schedule(0.02, 3.0, 10);
  const auto series = dense::correlation_series(m, s, dense::basis_vector(pattern), m.s_modes());
  const auto times = s.sample_times();
  for (std::size_t k = 0; k < times.size(); ++k)
    CHECK(std::abs(series[k](0, 0).real() - std::pow(std::cos(times[k]), 2)) < 1e-6);
}

TEST_CASE("distance examples") {
  const dense::DenseState zero = dense::pure_state(dense::basis_vector({false}), 1);
  const dense::DenseState one = dense::pure_state(dense::basis_vector({true}), 1);
  CHECK(dense::trace_distance(zero, one) == doctest::Approx(1.0));
  CHECK(dense::hs_distance_dense(zero, one) == doctest::Approx(1.0));
  CHECK(dense::trace_distance(zero, zero) == doctest::Approx(0.0));
  const dense::DenseState mixed{MatrixXc::Identity(2, 2) * 0.5, 1};
  CHECK(dense::trace_distance(zero, mixed) == doctest::Approx(0.5));
  CHECK(dense::hs_distance_dense(zero, mixed) == doctest::Approx(0.5));
  CHECK_THROWS_AS(dense::hs_distance_dense(zero, dense::DenseState{MatrixXc::Identity(4, 4) * 0.25, 2}), Error);
}

TEST_CASE("dense Hilbert-Schmidt distance agrees with Gaussian overlaps") {
  Rand rng(44);
  for (int modes = 1; modes <= 3; ++modes) {
    const JordanWigner jw(modes);
    for (int trial = 0; trial < 5; ++trial) {
      const CorrelationMatrix a = random_mixed_c(rng, modes), b = random_mixed_c(rng, modes);
      const dense::DenseState ra{jw.gaussian_state(a.entries), modes}, rb{jw.gaussian_state(b.entries), modes};
      const double d2 = 0.5 * (overlap_c(a, a) + overlap_c(b, b) - 2.0 * overlap_c(a, b));
      CHECK(std::pow(dense::hs_distance_dense(ra, rb), 2) == doctest::Approx(d2).epsilon(1e-8));
      CHECK(max_abs(dense::c_from_dense(ra).entries - a.entries) < 1e-10);
    }
  }
}

TEST_CASE("entropies of a Bell pair") {
  VectorXc psi = VectorXc::Zero(4);
  psi(0b10) = psi(0b01) = 1.0 / std::sqrt(2.0);
  const dense::DenseState bell = dense::pure_state(psi, 2);
  CHECK(std::abs(dense::von_neumann_entropy(bell)) < 1e-12);
  CHECK(dense::von_neumann_entropy(dense::partial_trace(bell, ModeSubset({0}, 2))) == doctest::Approx(std::log(2.0)));
  CHECK(dense::vn_mutual_info(bell, ModeSubset({0}, 2)) == doctest::Approx(2 * std::log(2.0)));
  const dense::DenseState product = dense::pure_state(dense::basis_vector({true, false}), 2);
  CHECK(std::abs(dense::vn_mutual_info(product, ModeSubset({0}, 2))) < 1e-12);
}

TEST_CASE("distances contract under direct dephasing") {
  ModelParams p;
  p.L = 3;
  p.layout = Layout::SOnly;
  p.gamma = 1.0;
  const LatticeModel m = build_model(p);
  Rand rng(45);
  const ScheduleConfig s = schedule(0.02, 3.0, 5);
  const auto a = dense::evolve_lindblad(random_pure(rng, 3), m, s);
  const auto b = dense::evolve_lindblad(random_pure(rng, 3), m, s);
  for (std::size_t k = 1; k < a.size(); ++k) {
    CHECK(dense::trace_distance(a[k], b[k]) <= dense::trace_distance(a[k - 1], b[k - 1]) + 1e-8);
    CHECK(dense::hs_distance_dense(a[k], b[k]) <= dense::hs_distance_dense(a[k - 1], b[k - 1]) + 1e-8);
  }
}

TEST_CASE("exact measure series at t = 0") {
  const LatticeModel sb = model(2, Layout::SB, 1.0);
  const ScheduleConfig s = schedule(0.02, 0.4, 5);
  const auto d = dense::hs_distance_series(sb, s, embed_pattern(sb, neel_pattern(2)), embed_pattern(sb, anti_neel_pattern(2)));
  CHECK(d.values.front() == doctest::Approx(1.0));
  CHECK(d.times.size() == s.sample_times().size());
  CHECK(d.peak_bytes > 0);

  const LatticeModel sab = model(1, Layout::SAB, 1.0);
  const VectorXc bell = dense::slater_to_dense(bell_pairs(sab));
  CHECK(std::abs(dense::renyi2_mi_series(sab, s, bell).values.front()) < 1e-12);
  CHECK(dense::renyi2_mi_series(sab, s, bell, true).values.front() == doctest::Approx(2 * std::log(2.0)));
  const VectorXc product = dense::basis_vector({true, true, false});
  CHECK(dense::renyi2_mi_series(sab, s, product).values.front() == doctest::Approx(1.0));
}

TEST_CASE("oversized steps are reported") {
  const LatticeModel m = model(1, Layout::SB, 1.0);
  try {
    dense::evolve_lindblad(dense::pure_state(dense::basis_vector({true, false}), 2), m, schedule(1e4, 1e4));
    FAIL("unstable step accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IntegrationFailure);
  }
}
