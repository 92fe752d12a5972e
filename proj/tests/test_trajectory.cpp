#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fnm/dense.hpp"
#include "fnm/trajectory.hpp"
#include "helpers.hpp"

using namespace fnm;
using namespace fnm::testing;

namespace {

LatticeModel ladder(int L, double gamma = 1.0) {
  ModelParams p;
  p.L = L;
  p.gamma = gamma;
  return build_model(p);
}

ScheduleConfig schedule(double dt, double t_max, int n_traj = 1, int stride = 1) {
  ScheduleConfig s;
  s.dt = dt;
  s.t_max = t_max;
  s.n_traj = n_traj;
  s.sample_stride = stride;
  return s;
}

/// Exact average of C over all outcomes of one step.
MatrixXc one_step_average(const TrajectoryStepper& stepper, const OrbitalMatrix& v) {
  const auto p = stepper.jump_probabilities(v);
  double total = 0.0;
  MatrixXc mean = MatrixXc::Zero(v.modes(), v.modes());
  const auto& sites = stepper.model().dissipative_sites;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (p[k] == 0.0) continue;
    mean += p[k] * c_from_orbitals(stepper.apply(v, sites[k])).entries;
    total += p[k];
  }
  mean += (1.0 - total) * c_from_orbitals(stepper.apply(v, -1)).entries;
  return mean;
}

}  // namespace

TEST_CASE("schedule grid and validation") {
  const ScheduleConfig s = schedule(0.1, 1.0, 1, 3);
  CHECK(s.steps() == 10);
  CHECK(s.sample_steps() == std::vector<long>{0, 3, 6, 9, 10});
  CHECK(s.sample_times().back() == doctest::Approx(1.0));
  CHECK_THROWS_AS(validate(schedule(0.0, 1.0)), Error);
  CHECK_THROWS_AS(validate(schedule(0.1, 0.01)), Error);
  CHECK_THROWS_AS(validate(schedule(0.1, 1.0, 0)), Error);
  CHECK_THROWS_AS(validate(schedule(0.1, 1.0, 1, 0)), Error);
}

TEST_CASE("seed derivation is a pure function with distinct outputs") {
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 1000; ++a) seen.insert(derive_seed(20240611, a));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("jump_update examples") {
  OrbitalMatrix v{MatrixXc::Constant(2, 1, 1.0 / std::sqrt(2.0))};
  MatrixXc occupied = MatrixXc::Zero(2, 2);
  occupied(0, 0) = 1.0;
  CHECK(max_abs(c_from_orbitals(jump_update(v, 0, JumpOutcome::Occupied)).entries - occupied) < 1e-14);
  MatrixXc empty = MatrixXc::Zero(2, 2);
  empty(1, 1) = 1.0;
  CHECK(max_abs(c_from_orbitals(jump_update(v, 0, JumpOutcome::Empty)).entries - empty) < 1e-14);

  const OrbitalMatrix fock = initial_product_state(parse_pattern("10"));
  try {
    jump_update(fock, 1, JumpOutcome::Occupied);
    FAIL("impossible outcome accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ImpossibleOutcome);
  }
  CHECK_THROWS_AS(jump_update(fock, 0, JumpOutcome::Empty), Error);
  CHECK_THROWS_AS(jump_update(fock, 2, JumpOutcome::Occupied), Error);
}

TEST_CASE("jump_update agrees with the dense projective measurement") {
  Rand rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Index particles = 1 + trial % 3;
    const OrbitalMatrix v = random_orbitals(rng, 4, particles);
    const Index site = trial % 4;
    const JumpOutcome outcome = (trial / 4) % 2 ? JumpOutcome::Empty : JumpOutcome::Occupied;
    const OrbitalMatrix w = jump_update(v, site, outcome);
    CHECK(isometry_defect(w) < 1e-12);
    const VectorXc psi = dense::projective_jump_dense(dense::slater_to_dense(v), 4, site, outcome);
    const auto exact = dense::c_from_dense(dense::pure_state(psi, 4));
    CHECK(max_abs(c_from_orbitals(w).entries - exact.entries) < 1e-10);
  }
}

TEST_CASE("closed evolution is exact unitary propagation") {
  Rand rng(32);
  const LatticeModel m = ladder(3, 0.0);
  const OrbitalMatrix v = random_orbitals(rng, 6, 3);
  const ScheduleConfig s = schedule(0.05, 2.5);
  const auto snaps = run_trajectory(m, s, v, ModeSubset::all(6), 1);
  const MatrixXc u = (cplx(0, -2.5) * m.h).exp();
  const MatrixXc expected = c_from_orbitals(OrbitalMatrix{u * v.entries}).entries;
  CHECK(max_abs(snaps.back().entries - expected) < 1e-10);
  // Energy and particle number are constants of the motion.
  const double e0 = (m.h * snaps.front().entries.transpose()).trace().real();
  for (const auto& c : snaps) {
    CHECK(std::abs((m.h * c.entries.transpose()).trace().real() - e0) < 1e-10);
    CHECK(std::abs(c.entries.trace().real() - 3.0) < 1e-10);
  }
}

TEST_CASE("product states are fixed points without hopping") {
  ModelParams p;
  p.L = 3;
  p.t_par = 0.0;
  p.t_perp = 0.0;
  p.gamma = 1.0;
  const LatticeModel m = build_model(p);
  const OrbitalMatrix v = initial_product_state(parse_pattern("101011"));
  const auto c0 = c_from_orbitals(v).entries;
  ScheduleConfig s = schedule(0.02, 4.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    for (const auto& c : run_trajectory(m, s, v, ModeSubset::all(6), seed)) CHECK(max_abs(c.entries - c0) < 1e-12);
}

TEST_CASE("trajectories keep a pure state with fixed particle number") {
  Rand rng(33);
  const LatticeModel m = ladder(3);
  const OrbitalMatrix v = random_orbitals(rng, 6, 2);
  const auto snaps = run_trajectory(m, schedule(0.02, 5.0), v, ModeSubset::all(6), 99);
  for (const auto& c : snaps) {
    CHECK(std::abs(c.entries.trace().real() - 2.0) < 1e-10);
    CHECK(max_abs(c.entries * c.entries - c.entries) < 1e-10);
    CHECK(max_abs(c.entries - c.entries.adjoint()) == 0.0);
  }
}

TEST_CASE("large gamma * dt warns") {
  const std::size_t before = warning_count();
  TrajectoryStepper(ladder(2, 10.0), 0.02);
  CHECK(warning_count() == before + 1);
  TrajectoryStepper(ladder(2, 1.0), 0.02);
  CHECK(warning_count() == before + 1);
}

TEST_CASE("ensembles are reproducible and independent of the thread count") {
  const LatticeModel m = ladder(2);
  const OrbitalMatrix v = initial_product_state(embed_pattern(m, neel_pattern(2)));
  const ScheduleConfig s = schedule(0.02, 2.0, 12, 10);
  const auto a = run_ensemble(m, s, v, m.s_modes(), 1);
  const auto b = run_ensemble(m, s, v, m.s_modes(), 3);
  const auto c = run_ensemble(m, s, v, m.s_modes(), 1);
  REQUIRE(a.snapshots.size() == 12 * a.n_times());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k] == b.snapshots[k]);
    CHECK(a.snapshots[k] == c.snapshots[k]);
  }
  for (std::size_t t = 0; t < a.n_traj(); ++t) CHECK(a.seeds[t] == derive_seed(s.master_seed, t));
  // Trajectory alpha does not depend on how many others run.
  ScheduleConfig single = s;
  single.n_traj = 1;
  const auto one = run_ensemble(m, single, v, m.s_modes());
  for (std::size_t t = 0; t < one.n_times(); ++t) CHECK(one.at(0, t) == a.at(0, t));
  CHECK(a.memory_bytes() == a.snapshots.size() * 4 * sizeof(cplx));
}

TEST_CASE("jump frequency follows gamma dt C_ii") {
  const LatticeModel m = ladder(1);
  const OrbitalMatrix v{MatrixXc::Constant(2, 1, 1.0 / std::sqrt(2.0))};
  const TrajectoryStepper stepper(m, 0.02);
  const double p = stepper.jump_probabilities(v)[0];
  CHECK(p == doctest::Approx(0.01));
  Rng rng(34);
  const int samples = 100000;
  int jumps = 0;
  for (int k = 0; k < samples; ++k) {
    const auto next = c_from_orbitals(stepper.step(v, rng)).entries;
    if (std::abs(next(1, 1) - 1.0) < 1e-12) ++jumps;
  }
  const double mean = samples * p, sd = std::sqrt(samples * p * (1 - p));
  CHECK(std::abs(jumps - mean) < 5 * sd);
}

TEST_CASE("ensemble average tracks the Lindblad solution") {
  const LatticeModel m = ladder(1);
  const auto pattern = embed_pattern(m, parse_pattern("1"));
  const ScheduleConfig s = schedule(0.02, 3.0, 2000, 25);
  const auto ens = run_ensemble(m, s, initial_product_state(pattern), m.s_modes());
  const auto mean = ensemble_mean(ens);
  const auto exact = dense::correlation_series(m, s, dense::basis_vector(pattern), m.s_modes());
  REQUIRE(exact.size() == mean.size());
  // n_S lies in [0, 1], so one trajectory has standard deviation at most 1/2.
  const double bound = 4 * 0.5 / std::sqrt(2000.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < mean.size(); ++t) worst = std::max(worst, std::abs(mean[t](0, 0) - exact[t](0, 0)));
  CHECK(worst < bound);
}

TEST_CASE("one-step averaged error is second order in dt") {
  Rand rng(35);
  const LatticeModel m = ladder(2);
  const OrbitalMatrix v = random_orbitals(rng, 4, 2);
  const VectorXc psi = dense::slater_to_dense(v);
  auto deviation = [&](double dt) {
    const MatrixXc averaged = one_step_average(TrajectoryStepper(m, dt), v);
    ScheduleConfig fine = schedule(dt / 50, dt);
    fine.sample_stride = 50;
    const auto exact = dense::correlation_series(m, fine, psi, ModeSubset::all(4));
    return max_abs(averaged - exact.back());
  };
  const double dt = 0.04;
  const double ratio = (deviation(dt) / dt) / (deviation(dt / 2) / (dt / 2));
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);
}

TEST_CASE("snapshot dumps round trip") {
  const LatticeModel m = ladder(2);
  const OrbitalMatrix v = initial_product_state(embed_pattern(m, neel_pattern(2)));
  const auto ens = run_ensemble(m, schedule(0.02, 0.2, 3, 5), v, m.s_modes());
  std::stringstream bin;
  write_snapshots_binary(ens, bin);
  const auto back = read_snapshots_binary(bin);
  CHECK(back.times == ens.times);
  CHECK(back.seeds == ens.seeds);
  CHECK(back.schedule.master_seed == ens.schedule.master_seed);
  REQUIRE(back.snapshots.size() == ens.snapshots.size());
  for (std::size_t k = 0; k < ens.snapshots.size(); ++k) CHECK(back.snapshots[k] == ens.snapshots[k]);

  std::stringstream garbage("NOTASNAP");
  CHECK_THROWS_AS(read_snapshots_binary(garbage), Error);

  std::stringstream csv;
  write_snapshots_csv(ens, csv);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line))
    if (!line.empty() && line[0] != '#' && line.rfind("traj", 0) != 0) ++rows;
  CHECK(rows == ens.snapshots.size() * 4);
}
