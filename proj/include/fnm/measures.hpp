#pragma once

#include <span>
#include <string>
#include <vector>

#include "fnm/gaussian.hpp"
#include "fnm/lattice.hpp"
#include "fnm/trajectory.hpp"

namespace fnm {

enum class SeriesKind { HsDistance, Renyi2Mi, Renyi2MiLog, Occupation };

std::string to_string(SeriesKind kind);

struct DistanceSeries {
  SeriesKind kind = SeriesKind::HsDistance;
  std::vector<double> times;
  std::vector<double> values;
  /// Bootstrap standard deviation per time (zero when not estimated).
  std::vector<double> sigma;
};

struct BlpPair {
  std::vector<bool> p;
  std::vector<bool> q;

  std::string label() const;
};

/// Candidate initial conditions for the maximization over initial states.
struct InitialPairCatalog {
  std::vector<BlpPair> pairs;
  std::vector<std::string> preparations;

  /// Neel vs anti-Neel and left vs right domain walls (deduplicated), plus
  /// the Bell-pair preparation for LFS.
  static InitialPairCatalog defaults(int L);
};

/// Parses "neel", "domain_wall" or explicit "1010:0101" entries.
std::vector<BlpPair> parse_pairs(const std::vector<std::string>& names, int L);

struct MeasureOptions {
  int threads = 1;
  /// Bootstrap resamples over trajectories; 0 disables error bars.
  int bootstrap = 200;
  /// Increments at or below this threshold are ignored by positive_variation.
  double deadband = 0.0;
  /// Use -ln Tr rho^2 instead of Tr rho^2 in the mutual information.
  bool log_variant = false;
  BathFilling bath = BathFilling::Empty;
};

struct MeasureResult {
  std::string measure;
  std::string method;
  double value = 0.0;
  double sigma = 0.0;
  std::size_t argmax = 0;
  std::vector<std::string> labels;
  std::vector<double> candidate_values;
  std::vector<double> candidate_sigma;
  std::vector<DistanceSeries> series;
  int n_traj = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  /// Largest working set of any candidate, from explicit buffer accounting.
  std::size_t peak_bytes = 0;

  const DistanceSeries& best() const { return series.at(argmax); }
  std::string argmax_label() const { return labels.at(argmax); }
};

/// Sum_k max(v[k+1] - v[k], 0), counting only increments above `deadband`.
double positive_variation(std::span<const double> values, double deadband = 0.0);

/// Symmetric N x N matrix K with (1/N^2) sum K = Tr|rho_p - rho_q|^2 at time t:
/// K_ab = D(p_a, p_b) + D(q_a, q_b) - D(p_a, q_b) - D(p_b, q_a).
MatrixXd hs_kernel(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q, std::size_t t, int threads = 1);

/// Symmetric N x N matrix of D(C_X^a, C_X^b) for the observed positions `local`.
MatrixXd purity_kernel(const TrajectoryEnsemble& ens, const std::vector<Index>& local, std::size_t t, int threads = 1);

/// (1/N^2) sum_ab K_ab using only the upper triangle with double-count weights.
double kernel_mean(const MatrixXd& kernel);

/// Ensemble Hilbert-Schmidt distance d2 at time index t.
double hs_distance(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q, std::size_t t, int threads = 1);

/// Renyi-2 mutual information between `split` (global mode indices) and the
/// rest of the observed modes at time index t.
double renyi2_mi(const TrajectoryEnsemble& ens, const ModeSubset& split, std::size_t t, bool log_variant = false,
                 int threads = 1);

/// Multinomial resampling counts, one row per replicate.
MatrixXd bootstrap_weights(std::size_t n, int replicates, std::uint64_t seed);

/// w_b^T K w_b / N^2 for each replicate row w_b.
VectorXd bootstrap_means(const MatrixXd& kernel, const MatrixXd& weights);

/// d2(t) over the whole recorded grid with bootstrap error bars. When
/// `replicate_n` is non-null it receives the positive variation of every
/// bootstrap replicate series.
DistanceSeries hs_distance_series(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q, const MeasureOptions& options,
                                  std::vector<double>* replicate_n = nullptr);

DistanceSeries renyi2_mi_series(const TrajectoryEnsemble& ens, const ModeSubset& split, const MeasureOptions& options,
                                std::vector<double>* replicate_n = nullptr);

/// Hilbert-Schmidt BLP measure from Gaussian trajectory ensembles.
MeasureResult blp2(const LatticeModel& model, const ScheduleConfig& schedule, const InitialPairCatalog& catalog,
                   const MeasureOptions& options = {});

/// Renyi-2 LFS measure from Gaussian trajectory ensembles over S+A+B.
MeasureResult lfs2(const LatticeModel& model, const ScheduleConfig& schedule, const std::vector<std::string>& preparations,
                   const MeasureOptions& options = {});

/// Same protocols evaluated on the dense Lindblad solution.
MeasureResult blp2_dense(const LatticeModel& model, const ScheduleConfig& schedule, const InitialPairCatalog& catalog,
                         const MeasureOptions& options = {});
MeasureResult lfs2_dense(const LatticeModel& model, const ScheduleConfig& schedule,
                         const std::vector<std::string>& preparations, const MeasureOptions& options = {});

/// Orbital matrix for a named LFS preparation ("bell" or "product").
OrbitalMatrix lfs_preparation(const LatticeModel& model, const std::string& name, BathFilling bath);

struct ValidationReport {
  DistanceSeries gaussian;
  DistanceSeries dense;
  double max_abs_deviation = 0.0;
  double n_gaussian = 0.0;
  double n_gaussian_sigma = 0.0;
  double n_dense = 0.0;
  double seconds = 0.0;
};

/// Gaussian-vs-dense d2(t) comparison for one orthogonal pair.
ValidationReport validate_against_dense(const LatticeModel& model, const ScheduleConfig& schedule, const BlpPair& pair,
                                        const MeasureOptions& options = {});

}  // namespace fnm
