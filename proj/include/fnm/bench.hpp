#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fnm/lattice.hpp"
#include "fnm/trajectory.hpp"

namespace fnm {

enum class Method { Gaussian, Dense };

Method parse_method(std::string_view name);
std::string to_string(Method method);

/// Largest L for which the dense S+B reference is attempted.
inline constexpr int kDenseMaxL = 6;

struct TimingRow {
  Method method = Method::Gaussian;
  int L = 0;
  int n_traj = 0;
  double seconds = 0.0;
  std::size_t peak_bytes = 0;
};

struct TimingTable {
  std::vector<TimingRow> rows;

  std::vector<TimingRow> of(Method method) const;
  bool has(Method method) const;
};

struct BenchOptions {
  /// Threads for Gaussian cells; timings with more than one thread are
  /// labelled as such by the caller.
  int threads = 1;
  /// Run each cell once on a one-step schedule before timing it.
  bool warmup = true;
};

/// Times the full d2 pipeline (both ensembles or both dense evolutions plus
/// the distance series) for every (method, L). Cells run one after another.
TimingTable time_grid(const std::vector<Method>& methods, const std::vector<int>& L_grid, const ModelParams& base,
                      const ScheduleConfig& schedule, const BenchOptions& options = {});

/// Times only the d2 series evaluation at fixed L for each trajectory count.
TimingTable time_measure_pipeline(const std::vector<int>& n_traj_grid, int L, const ModelParams& base,
                                  const ScheduleConfig& schedule, int threads = 1);

enum class ScalingModel { Exponential, PowerLaw };

std::string to_string(ScalingModel model);

struct FitOptions {
  int min_L = 0;
  double min_seconds = 0.0;
  /// Fit against n_traj instead of L (power law only).
  bool versus_n_traj = false;
};

struct ScalingFit {
  ScalingModel model = ScalingModel::PowerLaw;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t rows_used = 0;
};

/// Least squares on (L, log2 T) or (ln x, ln T). Throws InsufficientData with
/// fewer than three rows left after the floors.
ScalingFit fit_scaling(const std::vector<TimingRow>& rows, ScalingModel model, const FitOptions& options = {});

struct CrossoverReport {
  bool found = false;
  int L_star = 0;
  std::vector<int> overlap;
  std::string summary;
};

/// Smallest overlapping L with Gaussian faster than dense. Throws
/// InsufficientData if the methods share no L.
CrossoverReport crossover_report(const TimingTable& table);

/// Complexity summary with measured exponents next to the expected forms.
std::string complexity_summary(const ScalingFit* gaussian, const ScalingFit* dense, const CrossoverReport& crossover);

}  // namespace fnm
