#include "fnm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fnm/measures.hpp"

namespace fnm {

namespace {

using Clock = std::chrono::steady_clock;

struct Cell {
  double seconds;
  std::size_t peak_bytes;
};

Cell run_cell(Method method, const LatticeModel& model, const ScheduleConfig& schedule, int threads) {
  InitialPairCatalog catalog;
  catalog.pairs.push_back({neel_pattern(model.L()), anti_neel_pattern(model.L())});
  MeasureOptions options;
  options.threads = threads;
  options.bootstrap = 0;
  const auto start = Clock::now();
  const MeasureResult r = method == Method::Gaussian ? blp2(model, schedule, catalog, options)
                                                     : blp2_dense(model, schedule, catalog, options);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return {std::max(seconds, 1e-9), r.peak_bytes};
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "gaussian") return Method::Gaussian;
  if (name == "dense") return Method::Dense;
  throw Error(ErrorKind::Usage, "unknown method '" + std::string(name) + "' (expected gaussian or dense)");
}

std::string to_string(Method method) { return method == Method::Gaussian ? "gaussian" : "dense"; }

std::string to_string(ScalingModel model) { return model == ScalingModel::Exponential ? "exponential" : "powerlaw"; }

std::vector<TimingRow> TimingTable::of(Method method) const {
  std::vector<TimingRow> out;
  for (const auto& row : rows)
    if (row.method == method) out.push_back(row);
  return out;
}

bool TimingTable::has(Method method) const {
  return std::any_of(rows.begin(), rows.end(), [&](const TimingRow& r) { return r.method == method; });
}

TimingTable time_grid(const std::vector<Method>& methods, const std::vector<int>& L_grid, const ModelParams& base,
                      const ScheduleConfig& schedule, const BenchOptions& options) {
  validate(schedule);
  std::vector<int> grid = L_grid;
  std::sort(grid.begin(), grid.end());
  for (Method m : methods)
    for (int L : grid)
      if (m == Method::Dense && L > kDenseMaxL)
        throw Error(ErrorKind::Resource, "dense simulation refused for L = " + std::to_string(L) +
                                             " (limit " + std::to_string(kDenseMaxL) + ")");
  TimingTable table;
  for (int L : grid) {
    for (Method m : methods) {
      ModelParams params = base;
      params.L = L;
      const LatticeModel model = build_model(params);
      if (options.warmup) {
        ScheduleConfig tiny = schedule;
        tiny.t_max = schedule.dt;
        tiny.sample_stride = 1;
        run_cell(m, model, tiny, options.threads);
      }
      const Cell cell = run_cell(m, model, schedule, options.threads);
      table.rows.push_back({m, L, m == Method::Gaussian ? schedule.n_traj : 0, cell.seconds, cell.peak_bytes});
    }
  }
  return table;
}

TimingTable time_measure_pipeline(const std::vector<int>& n_traj_grid, int L, const ModelParams& base,
                                  const ScheduleConfig& schedule, int threads) {
  ModelParams params = base;
  params.L = L;
  const LatticeModel model = build_model(params);
  const ModeSubset s = model.s_modes();
  MeasureOptions options;
  options.threads = threads;
  options.bootstrap = 0;
  std::vector<int> grid = n_traj_grid;
  std::sort(grid.begin(), grid.end());
  TimingTable table;
  for (int n : grid) {
    ScheduleConfig sc = schedule;
    sc.n_traj = n;
    const auto p = run_ensemble(model, sc, initial_product_state(embed_pattern(model, neel_pattern(L))), s, threads);
    const auto q = run_ensemble(model, sc, initial_product_state(embed_pattern(model, anti_neel_pattern(L))), s, threads);
    hs_distance(p, q, 0, threads);  // warm-up
    const auto start = Clock::now();
    hs_distance_series(p, q, options);
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    table.rows.push_back({Method::Gaussian, L, n, std::max(seconds, 1e-9), p.memory_bytes() + q.memory_bytes()});
  }
  return table;
}

ScalingFit fit_scaling(const std::vector<TimingRow>& rows, ScalingModel model, const FitOptions& options) {
  if (options.versus_n_traj && model != ScalingModel::PowerLaw)
    throw Error(ErrorKind::Usage, "n_traj scaling is fitted as a power law");
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    if (row.L < options.min_L || row.seconds < options.min_seconds || row.seconds <= 0.0) continue;
    const double x = options.versus_n_traj ? static_cast<double>(row.n_traj) : static_cast<double>(row.L);
    if (model == ScalingModel::Exponential) {
      xs.push_back(x);
      ys.push_back(std::log2(row.seconds));
    } else {
      if (x <= 0.0) continue;
      xs.push_back(std::log(x));
      ys.push_back(std::log(row.seconds));
    }
  }
  if (xs.size() < 3)
    throw Error(ErrorKind::InsufficientData,
                "scaling fit needs at least 3 usable rows, have " + std::to_string(xs.size()));
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorKind::InsufficientData, "scaling fit needs distinct abscissae");
  ScalingFit fit;
  fit.model = model;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.rows_used = xs.size();
  return fit;
}

CrossoverReport crossover_report(const TimingTable& table) {
  const auto g = table.of(Method::Gaussian);
  const auto d = table.of(Method::Dense);
  CrossoverReport report;
  for (const auto& gr : g) {
    for (const auto& dr : d) {
      if (gr.L != dr.L) continue;
      report.overlap.push_back(gr.L);
    }
  }
  if (report.overlap.empty())
    throw Error(ErrorKind::InsufficientData, "gaussian and dense timings share no system size");
  std::sort(report.overlap.begin(), report.overlap.end());
  report.overlap.erase(std::unique(report.overlap.begin(), report.overlap.end()), report.overlap.end());
  auto seconds_at = [](const std::vector<TimingRow>& rows, int L) {
    for (const auto& r : rows)
      if (r.L == L) return r.seconds;
    return 0.0;
  };
  for (int L : report.overlap) {
    if (seconds_at(g, L) < seconds_at(d, L)) {
      report.found = true;
      report.L_star = L;
      break;
    }
  }
  if (report.found) {
    report.summary = "crossover at L* = " + std::to_string(report.L_star);
  } else {
    report.summary = "no crossover in range";
  }
  return report;
}

std::string complexity_summary(const ScalingFit* gaussian, const ScalingFit* dense, const CrossoverReport& crossover) {
  std::ostringstream out;
  char buf[160];
  out << "method     expected              measured\n";
  if (dense) {
    std::snprintf(buf, sizeof buf, "dense      O(2^(2L)) per state   T ~ 2^(%.2f L)  (R^2 = %.3f, %zu rows)\n",
                  dense->slope, dense->r2, dense->rows_used);
    out << buf;
  } else {
    out << "dense      O(2^(2L)) per state   not measured\n";
  }
  if (gaussian) {
    std::snprintf(buf, sizeof buf, "gaussian   O(N_tr^2 L^2.38)      T ~ L^%.2f  (R^2 = %.3f, %zu rows)\n",
                  gaussian->slope, gaussian->r2, gaussian->rows_used);
    out << buf;
  } else {
    out << "gaussian   O(N_tr^2 L^2.38)      not measured\n";
  }
  out << crossover.summary << "\n";
  return out.str();
}

}  // namespace fnm
