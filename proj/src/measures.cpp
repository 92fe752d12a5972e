#include "fnm/measures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fnm/dense.hpp"
#include "fnm/parallel.hpp"

namespace fnm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Sums the symmetric kernel over a <= b, row by row, with off-diagonal
// entries counted twice. Rows run in parallel; the reduction is in row order.
template <class Entry>
double upper_triangle_sum(std::size_t n, int threads, Entry&& entry, MatrixXd* store) {
  std::vector<double> rows(n, 0.0);
  if (store) store->resize(static_cast<Index>(n), static_cast<Index>(n));
  parallel_for(n, threads, [&](std::size_t a) {
    const double diag = entry(a, a);
    double off = 0.0;
    if (store) (*store)(static_cast<Index>(a), static_cast<Index>(a)) = diag;
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = entry(a, b);
      off += v;
      if (store) {
        (*store)(static_cast<Index>(a), static_cast<Index>(b)) = v;
        (*store)(static_cast<Index>(b), static_cast<Index>(a)) = v;
      }
    }
    rows[a] = diag + 2.0 * off;
  });
  double total = 0.0;
  for (double r : rows) total += r;
  const double nn = static_cast<double>(n);
  return total / (nn * nn);
}

void require_compatible(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q) {
  if (p.n_traj() != q.n_traj()) throw Error(ErrorKind::Shape, "ensembles have different trajectory counts");
  if (p.times != q.times) throw Error(ErrorKind::Shape, "ensembles have different time grids");
  if (!(p.observe == q.observe)) throw Error(ErrorKind::Shape, "ensembles observe different modes");
  if (p.n_traj() == 0) throw Error(ErrorKind::Shape, "empty ensemble");
}

// One time slice of an ensemble, every trajectory's k x k block stored
// back to back so the pair loops stream through contiguous memory.
struct Slice {
  Index k = 0;
  std::vector<cplx> data;
  std::size_t size() const { return k == 0 ? 0 : data.size() / static_cast<std::size_t>(k * k); }
  const cplx* at(std::size_t a) const { return data.data() + a * static_cast<std::size_t>(k * k); }
  double overlap(std::size_t a, const Slice& other, std::size_t b) const {
    return std::real(overlap_det(at(a), other.at(b), k));
  }
};

Slice pack(const TrajectoryEnsemble& ens, std::size_t t) {
  Slice s;
  s.k = ens.observe.size();
  const auto block = static_cast<std::size_t>(s.k * s.k);
  s.data.resize(ens.n_traj() * block);
  for (std::size_t a = 0; a < ens.n_traj(); ++a) std::copy_n(ens.at(a, t).data(), block, s.data.data() + a * block);
  return s;
}

double hs_entry(const Slice& p, const Slice& q, std::size_t a, std::size_t b) {
  if (a == b) {
    const double like = p.overlap(a, p, a) + q.overlap(a, q, a);
    return like - (p.overlap(a, q, a) + q.overlap(a, p, a));
  }
  // Arguments are ordered by trajectory index so that p <-> q swaps and
  // identical ensembles reproduce the same floating-point values.
  const double like = p.overlap(a, p, b) + q.overlap(a, q, b);
  return like - (p.overlap(a, q, b) + q.overlap(a, p, b));
}

double hs_trace(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q, std::size_t t, int threads, MatrixXd* store) {
  const Slice sp = pack(p, t), sq = pack(q, t);
  return upper_triangle_sum(
      p.n_traj(), threads, [&](std::size_t a, std::size_t b) { return hs_entry(sp, sq, a, b); }, store);
}

double d2_from_trace(double trace) {
  if (trace < -tol::negative_det)
    throw Error(ErrorKind::NumericalDegeneracy, "Tr|rho_p - rho_q|^2 estimate is negative: " + std::to_string(trace));
  return std::sqrt(0.5 * std::max(trace, 0.0));
}

Slice reduced_slice(const TrajectoryEnsemble& ens, const std::vector<Index>& local, std::size_t t) {
  Slice s;
  s.k = static_cast<Index>(local.size());
  const auto block = static_cast<std::size_t>(s.k * s.k);
  s.data.resize(ens.n_traj() * block);
  for (std::size_t a = 0; a < ens.n_traj(); ++a) {
    const MatrixXc& c = ens.at(a, t);
    cplx* r = s.data.data() + a * block;
    for (Index j = 0; j < s.k; ++j)
      for (Index i = 0; i < s.k; ++i)
        r[i + j * s.k] = c(local[static_cast<std::size_t>(i)], local[static_cast<std::size_t>(j)]);
  }
  return s;
}

double purity_sum(const Slice& snaps, int threads, MatrixXd* store) {
  return upper_triangle_sum(
      snaps.size(), threads, [&](std::size_t a, std::size_t b) { return snaps.overlap(a, snaps, b); }, store);
}

struct SplitPositions {
  std::vector<Index> s, a, all;
};

SplitPositions split_positions(const TrajectoryEnsemble& ens, const ModeSubset& split) {
  SplitPositions out;
  for (Index mode : split.indices()) {
    const Index pos = ens.observe.position(mode);
    if (pos < 0) throw Error(ErrorKind::Shape, "split mode " + std::to_string(mode) + " is not among the observed modes");
  }
  for (Index k = 0; k < ens.observe.size(); ++k) {
    out.all.push_back(k);
    (split.contains(ens.observe[k]) ? out.s : out.a).push_back(k);
  }
  if (out.a.empty()) throw Error(ErrorKind::Shape, "split leaves no complementary modes");
  return out;
}

double combine_mi(double ps, double pa, double psa, bool log_variant) {
  if (log_variant) return -std::log(ps) - std::log(pa) + std::log(psa);
  return ps + pa - psa;
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::uint64_t bootstrap_seed(std::uint64_t master) { return derive_seed(master ^ 0xb0075742a9ULL, 0); }

// Fills sigma and, optionally, replicate positive variations from a
// (replicates x times) table.
void finish_replicates(const MatrixXd& table, double deadband, DistanceSeries& series, std::vector<double>* replicate_n) {
  const Index reps = table.rows();
  series.sigma.assign(series.times.size(), 0.0);
  if (reps == 0) return;
  for (Index t = 0; t < table.cols(); ++t) {
    std::vector<double> col(static_cast<std::size_t>(reps));
    for (Index b = 0; b < reps; ++b) col[static_cast<std::size_t>(b)] = table(b, t);
    series.sigma[static_cast<std::size_t>(t)] = stddev(col);
  }
  if (replicate_n) {
    replicate_n->clear();
    for (Index b = 0; b < reps; ++b) {
      std::vector<double> row(static_cast<std::size_t>(table.cols()));
      for (Index t = 0; t < table.cols(); ++t) row[static_cast<std::size_t>(t)] = table(b, t);
      replicate_n->push_back(positive_variation(row, deadband));
    }
  }
}

}  // namespace

std::string to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::HsDistance: return "d2";
    case SeriesKind::Renyi2Mi: return "I2";
    case SeriesKind::Renyi2MiLog: return "I2_log";
    case SeriesKind::Occupation: return "occupation";
  }
  return "?";
}

std::string BlpPair::label() const { return pattern_string(p) + ":" + pattern_string(q); }

InitialPairCatalog InitialPairCatalog::defaults(int L) {
  InitialPairCatalog cat;
  cat.pairs.push_back({neel_pattern(L), anti_neel_pattern(L)});
  BlpPair wall{left_domain_wall(L), right_domain_wall(L)};
  const bool duplicate = wall.p == cat.pairs[0].p && wall.q == cat.pairs[0].q;
  if (!duplicate && wall.p != wall.q) cat.pairs.push_back(wall);
  cat.preparations = {"bell"};
  return cat;
}

std::vector<BlpPair> parse_pairs(const std::vector<std::string>& names, int L) {
  std::vector<BlpPair> out;
  for (const auto& name : names) {
    if (name == "neel") {
      out.push_back({neel_pattern(L), anti_neel_pattern(L)});
    } else if (name == "domain_wall") {
      out.push_back({left_domain_wall(L), right_domain_wall(L)});
    } else {
      const auto colon = name.find(':');
      if (colon == std::string::npos)
        throw Error(ErrorKind::Config, "catalog entry '" + name + "' is neither neel, domain_wall nor p:q");
      BlpPair pair{parse_pattern(name.substr(0, colon)), parse_pattern(name.substr(colon + 1))};
      if (static_cast<int>(pair.p.size()) != L || static_cast<int>(pair.q.size()) != L)
        throw Error(ErrorKind::Config, "catalog entry '" + name + "' does not have L = " + std::to_string(L) + " sites");
      out.push_back(std::move(pair));
    }
    // At small L different names can produce the same pair.
    const auto& last = out.back();
    for (std::size_t k = 0; k + 1 < out.size(); ++k)
      if (out[k].p == last.p && out[k].q == last.q) {
        out.pop_back();
        break;
      }
  }
  return out;
}

double positive_variation(std::span<const double> values, double deadband) {
  if (values.empty()) throw Error(ErrorKind::Shape, "positive_variation of an empty series");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double inc = values[k + 1] - values[k];
    if (inc > deadband) total += inc;
  }
  return total;
}

MatrixXd hs_kernel(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q, std::size_t t, int threads) {
  require_compatible(p, q);
  MatrixXd k;
  hs_trace(p, q, t, threads, &k);
  return k;
}

MatrixXd purity_kernel(const TrajectoryEnsemble& ens, const std::vector<Index>& local, std::size_t t, int threads) {
  MatrixXd k;
  purity_sum(reduced_slice(ens, local, t), threads, &k);
  return k;
}

double kernel_mean(const MatrixXd& kernel) {
  const auto n = static_cast<std::size_t>(kernel.rows());
  return upper_triangle_sum(
      n, 1, [&](std::size_t a, std::size_t b) { return kernel(static_cast<Index>(a), static_cast<Index>(b)); }, nullptr);
}

double hs_distance(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q, std::size_t t, int threads) {
  require_compatible(p, q);
  if (t >= p.n_times()) throw Error(ErrorKind::Shape, "time index out of range");
  return d2_from_trace(hs_trace(p, q, t, threads, nullptr));
}

double renyi2_mi(const TrajectoryEnsemble& ens, const ModeSubset& split, std::size_t t, bool log_variant, int threads) {
  if (t >= ens.n_times()) throw Error(ErrorKind::Shape, "time index out of range");
  const auto pos = split_positions(ens, split);
  const double ps = purity_sum(reduced_slice(ens, pos.s, t), threads, nullptr);
  const double pa = purity_sum(reduced_slice(ens, pos.a, t), threads, nullptr);
  const double psa = purity_sum(reduced_slice(ens, pos.all, t), threads, nullptr);
  return combine_mi(ps, pa, psa, log_variant);
}

MatrixXd bootstrap_weights(std::size_t n, int replicates, std::uint64_t seed) {
  MatrixXd w = MatrixXd::Zero(std::max(replicates, 0), static_cast<Index>(n));
  for (int b = 0; b < replicates; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    for (std::size_t k = 0; k < n; ++k) {
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1);
      w(b, static_cast<Index>(idx)) += 1.0;
    }
  }
  return w;
}

VectorXd bootstrap_means(const MatrixXd& kernel, const MatrixXd& weights) {
  if (weights.rows() == 0) return VectorXd();
  const double n = static_cast<double>(kernel.rows());
  const MatrixXd wk = weights * kernel;
  return wk.cwiseProduct(weights).rowwise().sum() / (n * n);
}

DistanceSeries hs_distance_series(const TrajectoryEnsemble& p, const TrajectoryEnsemble& q, const MeasureOptions& options,
                                  std::vector<double>* replicate_n) {
  require_compatible(p, q);
  DistanceSeries series;
  series.kind = SeriesKind::HsDistance;
  series.times = p.times;
  const MatrixXd weights = bootstrap_weights(p.n_traj(), options.bootstrap, bootstrap_seed(p.schedule.master_seed));
  MatrixXd table(weights.rows(), static_cast<Index>(p.n_times()));
  for (std::size_t t = 0; t < p.n_times(); ++t) {
    if (weights.rows() == 0) {
      series.values.push_back(hs_distance(p, q, t, options.threads));
      continue;
    }
    MatrixXd k;
    const double trace = hs_trace(p, q, t, options.threads, &k);
    series.values.push_back(d2_from_trace(trace));
    const VectorXd reps = bootstrap_means(k, weights);
    for (Index b = 0; b < reps.size(); ++b) table(b, static_cast<Index>(t)) = std::sqrt(0.5 * std::max(reps(b), 0.0));
  }
  finish_replicates(table, options.deadband, series, replicate_n);
  return series;
}

DistanceSeries renyi2_mi_series(const TrajectoryEnsemble& ens, const ModeSubset& split, const MeasureOptions& options,
                                std::vector<double>* replicate_n) {
  const auto pos = split_positions(ens, split);
  DistanceSeries series;
  series.kind = options.log_variant ? SeriesKind::Renyi2MiLog : SeriesKind::Renyi2Mi;
  series.times = ens.times;
  const MatrixXd weights = bootstrap_weights(ens.n_traj(), options.bootstrap, bootstrap_seed(ens.schedule.master_seed));
  MatrixXd table(weights.rows(), static_cast<Index>(ens.n_times()));
  const bool want_kernels = weights.rows() > 0;
  for (std::size_t t = 0; t < ens.n_times(); ++t) {
    MatrixXd ks, ka, ksa;
    const double ps = purity_sum(reduced_slice(ens, pos.s, t), options.threads, want_kernels ? &ks : nullptr);
    const double pa = purity_sum(reduced_slice(ens, pos.a, t), options.threads, want_kernels ? &ka : nullptr);
    const double psa = purity_sum(reduced_slice(ens, pos.all, t), options.threads, want_kernels ? &ksa : nullptr);
    series.values.push_back(combine_mi(ps, pa, psa, options.log_variant));
    if (!want_kernels) continue;
    const VectorXd rs = bootstrap_means(ks, weights);
    const VectorXd ra = bootstrap_means(ka, weights);
    const VectorXd rsa = bootstrap_means(ksa, weights);
    for (Index b = 0; b < rs.size(); ++b)
      table(b, static_cast<Index>(t)) = combine_mi(rs(b), ra(b), rsa(b), options.log_variant);
  }
  finish_replicates(table, options.deadband, series, replicate_n);
  return series;
}

namespace {

void check_pair(const LatticeModel& model, const BlpPair& pair, BathFilling bath) {
  const auto p = embed_pattern(model, pair.p, bath);
  const auto q = embed_pattern(model, pair.q, bath);
  auto diag = [](const std::vector<bool>& x) {
    VectorXc d(static_cast<Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) d(static_cast<Index>(k)) = x[k] ? 1.0 : 0.0;
    return CorrelationMatrix{d.asDiagonal()};
  };
  if (std::abs(overlap_c(diag(p), diag(q))) > 1e-12)
    throw Error(ErrorKind::Catalog, "initial pair " + pair.label() + " is not orthogonal");
}

void select_best(MeasureResult& r) {
  r.argmax = 0;
  for (std::size_t k = 1; k < r.candidate_values.size(); ++k)
    if (r.candidate_values[k] > r.candidate_values[r.argmax]) r.argmax = k;
  r.value = r.candidate_values.empty() ? 0.0 : r.candidate_values[r.argmax];
  r.sigma = r.candidate_sigma.empty() ? 0.0 : r.candidate_sigma[r.argmax];
}

}  // namespace

MeasureResult blp2(const LatticeModel& model, const ScheduleConfig& schedule, const InitialPairCatalog& catalog,
                   const MeasureOptions& options) {
  const auto start = Clock::now();
  if (model.has_a()) throw Error(ErrorKind::Config, "blp2 expects an S or S+B layout");
  if (catalog.pairs.empty()) throw Error(ErrorKind::Catalog, "empty initial-pair catalog");
  for (const auto& pair : catalog.pairs) check_pair(model, pair, options.bath);

  MeasureResult r;
  r.measure = "blp2";
  r.method = "gaussian";
  r.n_traj = schedule.n_traj;
  r.seed = schedule.master_seed;
  const ModeSubset s = model.s_modes();
  for (const auto& pair : catalog.pairs) {
    const auto vp = initial_product_state(embed_pattern(model, pair.p, options.bath));
    const auto vq = initial_product_state(embed_pattern(model, pair.q, options.bath));
    const auto ens_p = run_ensemble(model, schedule, vp, s, options.threads);
    const auto ens_q = run_ensemble(model, schedule, vq, s, options.threads);
    std::vector<double> reps;
    auto series = hs_distance_series(ens_p, ens_q, options, &reps);
    const auto n = static_cast<std::size_t>(schedule.n_traj);
    const std::size_t kernel = options.bootstrap > 0 ? n * n * sizeof(double) * 2 : 0;
    r.peak_bytes = std::max(r.peak_bytes, ens_p.memory_bytes() + ens_q.memory_bytes() + kernel + n * sizeof(double));
    r.labels.push_back(pair.label());
    r.candidate_values.push_back(positive_variation(series.values, options.deadband));
    r.candidate_sigma.push_back(stddev(reps));
    r.series.push_back(std::move(series));
  }
  select_best(r);
  r.seconds = seconds_since(start);
  return r;
}

OrbitalMatrix lfs_preparation(const LatticeModel& model, const std::string& name, BathFilling bath) {
  if (!model.has_a()) throw Error(ErrorKind::Config, "LFS preparations need an S+A+B layout");
  if (name == "bell") return bell_pairs(model, bath);
  if (name == "product") {
    auto full = embed_pattern(model, neel_pattern(model.L()), bath);
    const auto a = neel_pattern(model.L());
    for (int i = 0; i < model.L(); ++i) full[static_cast<std::size_t>(model.a_mode(i))] = a[static_cast<std::size_t>(i)];
    return initial_product_state(full);
  }
  throw Error(ErrorKind::Config, "unknown LFS preparation '" + name + "' (expected bell or product)");
}

MeasureResult lfs2(const LatticeModel& model, const ScheduleConfig& schedule, const std::vector<std::string>& preparations,
                   const MeasureOptions& options) {
  const auto start = Clock::now();
  if (!model.has_a()) throw Error(ErrorKind::Config, "lfs2 requires the S+A+B layout");
  if (preparations.empty()) throw Error(ErrorKind::Catalog, "empty preparation list");
  MeasureResult r;
  r.measure = options.log_variant ? "lfs2_log" : "lfs2";
  r.method = "gaussian";
  r.n_traj = schedule.n_traj;
  r.seed = schedule.master_seed;
  const ModeSubset sa = model.sa_modes();
  const ModeSubset s = model.s_modes();
  for (const auto& name : preparations) {
    const auto v0 = lfs_preparation(model, name, options.bath);
    const auto ens = run_ensemble(model, schedule, v0, sa, options.threads);
    std::vector<double> reps;
    auto series = renyi2_mi_series(ens, s, options, &reps);
    const auto n = static_cast<std::size_t>(schedule.n_traj);
    const std::size_t kernel = options.bootstrap > 0 ? 3 * n * n * sizeof(double) : 0;
    r.peak_bytes = std::max(r.peak_bytes, ens.memory_bytes() + kernel + n * sizeof(double));
    r.labels.push_back(name);
    r.candidate_values.push_back(positive_variation(series.values, options.deadband));
    r.candidate_sigma.push_back(stddev(reps));
    r.series.push_back(std::move(series));
  }
  select_best(r);
  r.seconds = seconds_since(start);
  return r;
}

MeasureResult blp2_dense(const LatticeModel& model, const ScheduleConfig& schedule, const InitialPairCatalog& catalog,
                         const MeasureOptions& options) {
  const auto start = Clock::now();
  if (model.has_a()) throw Error(ErrorKind::Config, "blp2 expects an S or S+B layout");
  if (catalog.pairs.empty()) throw Error(ErrorKind::Catalog, "empty initial-pair catalog");
  for (const auto& pair : catalog.pairs) check_pair(model, pair, options.bath);
  MeasureResult r;
  r.measure = "blp2";
  r.method = "dense";
  r.seed = schedule.master_seed;
  for (const auto& pair : catalog.pairs) {
    const auto d = dense::hs_distance_series(model, schedule, embed_pattern(model, pair.p, options.bath),
                                             embed_pattern(model, pair.q, options.bath));
    r.peak_bytes = std::max(r.peak_bytes, d.peak_bytes);
    DistanceSeries series{SeriesKind::HsDistance, d.times, d.values, std::vector<double>(d.times.size(), 0.0)};
    r.labels.push_back(pair.label());
    r.candidate_values.push_back(positive_variation(series.values, options.deadband));
    r.candidate_sigma.push_back(0.0);
    r.series.push_back(std::move(series));
  }
  select_best(r);
  r.seconds = seconds_since(start);
  return r;
}

MeasureResult lfs2_dense(const LatticeModel& model, const ScheduleConfig& schedule,
                         const std::vector<std::string>& preparations, const MeasureOptions& options) {
  const auto start = Clock::now();
  if (!model.has_a()) throw Error(ErrorKind::Config, "lfs2 requires the S+A+B layout");
  if (preparations.empty()) throw Error(ErrorKind::Catalog, "empty preparation list");
  MeasureResult r;
  r.measure = options.log_variant ? "lfs2_log" : "lfs2";
  r.method = "dense";
  r.seed = schedule.master_seed;
  for (const auto& name : preparations) {
    const VectorXc psi0 = dense::slater_to_dense(lfs_preparation(model, name, options.bath));
    const auto d = dense::renyi2_mi_series(model, schedule, psi0, options.log_variant);
    r.peak_bytes = std::max(r.peak_bytes, d.peak_bytes);
    DistanceSeries series{options.log_variant ? SeriesKind::Renyi2MiLog : SeriesKind::Renyi2Mi, d.times, d.values,
                          std::vector<double>(d.times.size(), 0.0)};
    r.labels.push_back(name);
    r.candidate_values.push_back(positive_variation(series.values, options.deadband));
    r.candidate_sigma.push_back(0.0);
    r.series.push_back(std::move(series));
  }
  select_best(r);
  r.seconds = seconds_since(start);
  return r;
}

ValidationReport validate_against_dense(const LatticeModel& model, const ScheduleConfig& schedule, const BlpPair& pair,
                                        const MeasureOptions& options) {
  const auto start = Clock::now();
  InitialPairCatalog catalog;
  catalog.pairs = {pair};
  const auto gauss = blp2(model, schedule, catalog, options);
  const auto dense = blp2_dense(model, schedule, catalog, options);
  ValidationReport report;
  report.gaussian = gauss.best();
  report.dense = dense.best();
  for (std::size_t t = 0; t < report.gaussian.values.size(); ++t)
    report.max_abs_deviation =
        std::max(report.max_abs_deviation, std::abs(report.gaussian.values[t] - report.dense.values[t]));
  report.n_gaussian = gauss.value;
  report.n_gaussian_sigma = gauss.sigma;
  report.n_dense = dense.value;
  report.seconds = seconds_since(start);
  return report;
}

}  // namespace fnm
