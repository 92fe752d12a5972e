#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "fnm/gaussian.hpp"
#include "fnm/lattice.hpp"

namespace fnm {

struct ScheduleConfig {
  double dt = 0.02;
  double t_max = 10.0;
  int n_traj = 500;
  int sample_stride = 1;
  std::uint64_t master_seed = 20240611;

  /// Number of integration steps, round(t_max / dt).
  long steps() const;
  /// Recorded times: every `sample_stride` steps, plus the final step.
  std::vector<double> sample_times() const;
  std::vector<long> sample_steps() const;
};

/// Throws Config on invalid schedules.
void validate(const ScheduleConfig& schedule);

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits (portable across
/// standard libraries, unlike std::uniform_real_distribution).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t splitmix64(std::uint64_t x);
/// Per-trajectory seed; a pure function of (master, trajectory index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trajectory);

enum class JumpOutcome { Occupied, Empty };

/// Post-measurement Slater determinant n_i|psi>/|.| or (1 - n_i)|psi>/|.|.
OrbitalMatrix jump_update(const OrbitalMatrix& state, Index site, JumpOutcome outcome);

/// Thin QR of the orbital columns; throws NumericalInstability on failure.
OrbitalMatrix orthonormalize(const MatrixXc& orbitals);

/// First-order quantum-jump integrator for one model and time step.
///
/// The no-click propagator exp(-i h_eff dt), h_eff = h - (i gamma / 2) P_diss,
/// is computed once at construction. Each step draws at most one jump.
class TrajectoryStepper {
 public:
  TrajectoryStepper(const LatticeModel& model, double dt);

  const LatticeModel& model() const noexcept { return model_; }
  double dt() const noexcept { return dt_; }
  const MatrixXc& propagator() const noexcept { return propagator_; }

  /// Jump probabilities gamma * dt * C_ii for every dissipative site.
  std::vector<double> jump_probabilities(const OrbitalMatrix& state) const;

  /// Advances by a given outcome: `site < 0` means no click.
  OrbitalMatrix apply(const OrbitalMatrix& state, Index site) const;

  OrbitalMatrix step(const OrbitalMatrix& state, Rng& rng) const;

 private:
  LatticeModel model_;
  double dt_;
  MatrixXc propagator_;
};

/// Convenience form that builds the propagator on every call.
OrbitalMatrix step(const OrbitalMatrix& state, const LatticeModel& model, double dt, Rng& rng);

/// One deterministic trajectory; snapshots are the reduced C on `observe`.
std::vector<CorrelationMatrix> run_trajectory(const TrajectoryStepper& stepper, const ScheduleConfig& schedule,
                                              const OrbitalMatrix& initial, const ModeSubset& observe,
                                              std::uint64_t seed);

std::vector<CorrelationMatrix> run_trajectory(const LatticeModel& model, const ScheduleConfig& schedule,
                                              const OrbitalMatrix& initial, const ModeSubset& observe,
                                              std::uint64_t seed);

struct TrajectoryEnsemble {
  std::vector<double> times;
  ModeSubset observe;
  std::vector<std::uint64_t> seeds;
  ScheduleConfig schedule;
  /// snapshots[traj * times.size() + t]
  std::vector<MatrixXc> snapshots;

  std::size_t n_traj() const noexcept { return seeds.size(); }
  std::size_t n_times() const noexcept { return times.size(); }
  const MatrixXc& at(std::size_t traj, std::size_t t) const { return snapshots[traj * times.size() + t]; }
  std::size_t memory_bytes() const;
};

/// Trajectory alpha runs with derive_seed(master_seed, alpha); the result does
/// not depend on `threads` or on execution order.
TrajectoryEnsemble run_ensemble(const LatticeModel& model, const ScheduleConfig& schedule,
                                const OrbitalMatrix& initial, const ModeSubset& observe, int threads = 1);

/// Trajectory-averaged correlation matrix at each recorded time.
std::vector<MatrixXc> ensemble_mean(const TrajectoryEnsemble& ensemble);

/// Snapshot dump. Binary layout (little-endian):
///   char[8] "FNMSNAP1"; u64 n_traj; u64 n_times; u64 dim; u64 master_seed;
///   f64 times[n_times]; u64 seeds[n_traj];
///   then for each (traj, time): dim*dim complex entries, column-major,
///   each as f64 real followed by f64 imag.
void write_snapshots_binary(const TrajectoryEnsemble& ensemble, std::ostream& out);
TrajectoryEnsemble read_snapshots_binary(std::istream& in);

/// CSV dump: header comment lines with dims and seed, then rows
/// traj,seed,t,n,m,re,im.
void write_snapshots_csv(const TrajectoryEnsemble& ensemble, std::ostream& out);

}  // namespace fnm
