#include "fnm/dispatch.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "fnm/dense.hpp"
#include "fnm/io.hpp"
#include "fnm/measures.hpp"

#ifndef FNM_VERSION
#define FNM_VERSION "0.1.0"
#endif

namespace fnm {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

MeasureOptions measure_options(const RunConfig& c) {
  MeasureOptions o;
  o.threads = c.threads;
  o.bootstrap = c.bootstrap;
  o.deadband = c.deadband;
  o.log_variant = c.log_i2;
  o.bath = c.bath;
  return o;
}

nlohmann::json envelope(const RunConfig& c) {
  return {{"command", to_string(c.command)}, {"version", version()}, {"seed", c.schedule.master_seed}};
}

void finish(nlohmann::json& result, const RunConfig& c, double seconds, std::size_t peak_bytes) {
  result["config"] = config_echo(c);
  result["timing"] = {{"seconds", seconds}, {"peak_bytes", peak_bytes}};
}

std::string csv(const DistanceSeries& series) {
  std::ostringstream ss;
  write_series_csv(ss, series);
  return ss.str();
}

std::string safe_label(const std::string& label) {
  std::string out = label;
  for (auto& ch : out)
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  return out;
}

void write_measure(const fs::path& dir, const MeasureResult& r) {
  write_file(dir / "series.csv", csv(r.best()));
  for (std::size_t k = 0; k < r.series.size(); ++k)
    write_file(dir / ("series_" + std::to_string(k) + "_" + safe_label(r.labels[k]) + ".csv"), csv(r.series[k]));
}

InitialPairCatalog catalog_of(const RunConfig& c) {
  InitialPairCatalog cat;
  cat.pairs = parse_pairs(c.catalog, c.model.L);
  cat.preparations = c.preparations;
  return cat;
}

OrbitalMatrix simulate_initial(const RunConfig& c, const LatticeModel& model) {
  if (model.has_a()) return lfs_preparation(model, c.preparations.front(), c.bath);
  const auto pairs = parse_pairs(c.catalog, c.model.L);
  if (pairs.empty()) throw Error(ErrorKind::Catalog, "simulate needs a catalog entry for its initial pattern");
  return initial_product_state(embed_pattern(model, pairs.front().p, c.bath));
}

double imbalance(const MatrixXc& c, int L) {
  double acc = 0.0;
  for (int i = 0; i < L; ++i) acc += (i % 2 == 0 ? 1.0 : -1.0) * c(i, i).real();
  return acc / L;
}

int run_simulate(const RunConfig& c, const fs::path& dir, std::ostream& out) {
  const auto start = Clock::now();
  const LatticeModel model = build_model(c.model);
  const OrbitalMatrix v0 = simulate_initial(c, model);
  const ModeSubset s = model.s_modes();
  DistanceSeries series;
  series.kind = SeriesKind::Occupation;
  std::ostringstream occ;
  occ << "t,site,value,sigma\n";
  std::size_t peak = 0;
  if (c.method == Method::Gaussian) {
    const auto ens = run_ensemble(model, c.schedule, v0, s, c.threads);
    peak = ens.memory_bytes();
    series.times = ens.times;
    const double n = static_cast<double>(ens.n_traj());
    for (std::size_t t = 0; t < ens.n_times(); ++t) {
      double sum = 0, sum2 = 0;
      for (std::size_t a = 0; a < ens.n_traj(); ++a) {
        const double x = imbalance(ens.at(a, t), c.model.L);
        sum += x;
        sum2 += x * x;
      }
      const double mean = sum / n;
      const double var = n > 1 ? std::max(sum2 / n - mean * mean, 0.0) * n / (n - 1) : 0.0;
      series.values.push_back(mean);
      series.sigma.push_back(std::sqrt(var / n));
      for (int i = 0; i < c.model.L; ++i) {
        double si = 0, si2 = 0;
        for (std::size_t a = 0; a < ens.n_traj(); ++a) {
          const double x = ens.at(a, t)(i, i).real();
          si += x;
          si2 += x * x;
        }
        const double mi = si / n;
        const double vi = n > 1 ? std::max(si2 / n - mi * mi, 0.0) * n / (n - 1) : 0.0;
        occ << format_double(ens.times[t]) << ',' << i << ',' << format_double(mi) << ','
            << format_double(std::sqrt(vi / n)) << '\n';
      }
    }
    if (c.snapshots) {
      std::ostringstream bin;
      write_snapshots_binary(ens, bin);
      write_file(dir / "snapshots.bin", bin.str());
    }
  } else {
    const VectorXc psi0 = dense::slater_to_dense(v0);
    const auto cs = dense::correlation_series(model, c.schedule, psi0, s);
    series.times = c.schedule.sample_times();
    for (std::size_t t = 0; t < cs.size(); ++t) {
      series.values.push_back(imbalance(cs[t], c.model.L));
      series.sigma.push_back(0.0);
      for (int i = 0; i < c.model.L; ++i)
        occ << format_double(series.times[t]) << ',' << i << ',' << format_double(cs[t](i, i).real()) << ",0\n";
    }
  }
  write_file(dir / "series.csv", csv(series));
  write_file(dir / "occupations.csv", occ.str());
  nlohmann::json result = envelope(c);
  result["measure"] = "imbalance";
  result["method"] = to_string(c.method);
  result["n_traj"] = c.method == Method::Gaussian ? c.schedule.n_traj : 0;
  result["final_value"] = series.values.back();
  finish(result, c, seconds_since(start), peak);
  write_file(dir / "result.json", result.dump(2) + "\n");
  out << "imbalance(t_max) = " << format_double(series.values.back()) << "\n";
  return exit_status::ok;
}

int run_measure(const RunConfig& c, const fs::path& dir, std::ostream& out) {
  const LatticeModel model = build_model(c.model);
  const MeasureOptions options = measure_options(c);
  MeasureResult r;
  if (c.command == Subcommand::Blp) {
    const auto cat = catalog_of(c);
    r = c.method == Method::Gaussian ? blp2(model, c.schedule, cat, options) : blp2_dense(model, c.schedule, cat, options);
  } else {
    r = c.method == Method::Gaussian ? lfs2(model, c.schedule, c.preparations, options)
                                     : lfs2_dense(model, c.schedule, c.preparations, options);
  }
  write_measure(dir, r);
  nlohmann::json result = envelope(c);
  result.update(to_json(r));
  finish(result, c, r.seconds, r.peak_bytes);
  write_file(dir / "result.json", result.dump(2) + "\n");
  out << r.measure << " (" << r.method << ") = " << format_double(r.value);
  if (r.sigma > 0) out << " +- " << format_double(r.sigma);
  out << "  argmax " << r.argmax_label() << "\n";
  return exit_status::ok;
}

int run_validate(const RunConfig& c, const fs::path& dir, std::ostream& out) {
  const LatticeModel model = build_model(c.model);
  const auto pairs = parse_pairs(c.catalog, c.model.L);
  const auto report = validate_against_dense(model, c.schedule, pairs.front(), measure_options(c));
  write_file(dir / "series.csv", csv(report.gaussian));
  write_file(dir / "dense_series.csv", csv(report.dense));
  nlohmann::json result = envelope(c);
  result["measure"] = "validate";
  result["pair"] = pairs.front().label();
  result["n_traj"] = c.schedule.n_traj;
  result["max_abs_deviation"] = report.max_abs_deviation;
  result["n_gaussian"] = report.n_gaussian;
  result["n_gaussian_sigma"] = report.n_gaussian_sigma;
  result["n_dense"] = report.n_dense;
  finish(result, c, report.seconds, 0);
  write_file(dir / "result.json", result.dump(2) + "\n");
  out << "max |d2_gaussian - d2_dense| = " << format_double(report.max_abs_deviation) << "\n"
      << "N_gaussian = " << format_double(report.n_gaussian) << " +- " << format_double(report.n_gaussian_sigma)
      << ", N_dense = " << format_double(report.n_dense) << "\n";
  return exit_status::ok;
}

int run_bench(const RunConfig& c, const fs::path& dir, std::ostream& out) {
  const auto start = Clock::now();
  const auto& b = c.bench;
  ScheduleConfig sc = c.schedule;
  sc.n_traj = b.n_traj;
  sc.t_max = b.t_max;
  sc.sample_stride = b.sample_stride;
  BenchOptions options;
  options.threads = c.threads;

  TimingTable table;
  if (!b.gaussian_L.empty()) table = time_grid({Method::Gaussian}, b.gaussian_L, c.model, sc, options);
  if (!b.dense_L.empty()) {
    const auto dense = time_grid({Method::Dense}, b.dense_L, c.model, sc, options);
    table.rows.insert(table.rows.end(), dense.rows.begin(), dense.rows.end());
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const TimingRow& x, const TimingRow& y) { return x.L < y.L; });

  nlohmann::json result = envelope(c);
  result["measure"] = "bench";
  result["rows"] = to_json(table);
  std::optional<ScalingFit> gfit, dfit;
  auto try_fit = [&](Method m, ScalingModel model, int min_L, const char* key) -> std::optional<ScalingFit> {
    try {
      FitOptions fo;
      fo.min_L = min_L;
      fo.min_seconds = b.fit_min_seconds;
      const auto fit = fit_scaling(table.of(m), model, fo);
      result["fits"][key] = to_json(fit);
      return fit;
    } catch (const Error& e) {
      result["fits"][key] = {{"error", e.what()}};
      return std::nullopt;
    }
  };
  gfit = try_fit(Method::Gaussian, ScalingModel::PowerLaw, b.gaussian_fit_min_L, "gaussian_powerlaw");
  dfit = try_fit(Method::Dense, ScalingModel::Exponential, b.dense_fit_min_L, "dense_exponential");
  CrossoverReport cross;
  try {
    cross = crossover_report(table);
    result["crossover"] = to_json(cross);
  } catch (const Error& e) {
    cross.summary = e.what();
    result["crossover"] = {{"error", e.what()}};
  }

  if (!b.ntr_grid.empty()) {
    const auto ntr = time_measure_pipeline(b.ntr_grid, b.ntr_L, c.model, sc, c.threads);
    std::ostringstream ss;
    write_timing_csv(ss, ntr);
    write_file(dir / "timing_ntr.csv", ss.str());
    result["ntr_rows"] = to_json(ntr);
    try {
      FitOptions fo;
      fo.versus_n_traj = true;
      result["fits"]["ntr_powerlaw"] = to_json(fit_scaling(ntr.rows, ScalingModel::PowerLaw, fo));
    } catch (const Error& e) {
      result["fits"]["ntr_powerlaw"] = {{"error", e.what()}};
    }
  }

  const std::string summary = complexity_summary(gfit ? &*gfit : nullptr, dfit ? &*dfit : nullptr, cross);
  result["summary"] = summary;
  std::ostringstream timing;
  write_timing_csv(timing, table);
  write_file(dir / "timing.csv", timing.str());
  if (b.gnuplot) {
    std::ostringstream gp;
    write_gnuplot(gp, table);
    write_file(dir / "timing_gnuplot.dat", gp.str());
  }
  finish(result, c, seconds_since(start), 0);
  write_file(dir / "result.json", result.dump(2) + "\n");
  out << summary;
  return exit_status::ok;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Config:
    case ErrorKind::Catalog:
    case ErrorKind::Shape:
    case ErrorKind::InvalidState: return exit_status::usage;
    case ErrorKind::Resource: return exit_status::resource;
    case ErrorKind::SingularState:
    case ErrorKind::NumericalDegeneracy:
    case ErrorKind::NumericalInstability:
    case ErrorKind::ImpossibleOutcome:
    case ErrorKind::IntegrationFailure:
    case ErrorKind::InsufficientData: return exit_status::numerical;
    case ErrorKind::Io: return exit_status::io;
  }
  return exit_status::failure;
}

std::string version() { return FNM_VERSION; }

int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const fs::path dir = output_directory(config);
    switch (config.command) {
      case Subcommand::Simulate: return run_simulate(config, dir, out);
      case Subcommand::Blp:
      case Subcommand::Lfs: return run_measure(config, dir, out);
      case Subcommand::Validate: return run_validate(config, dir, out);
      case Subcommand::Bench: return run_bench(config, dir, out);
    }
  } catch (const Error& e) {
    err << "fnm: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "fnm: io: " << e.what() << "\n";
    return exit_status::io;
  } catch (const std::exception& e) {
    err << "fnm: " << e.what() << "\n";
    return exit_status::failure;
  }
  return exit_status::failure;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_config(args);
  } catch (const Error& e) {
    err << "fnm: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  if (!config.help.empty()) {
    out << config.help;
    return exit_status::ok;
  }
  return dispatch(config, out, err);
}

}  // namespace fnm
