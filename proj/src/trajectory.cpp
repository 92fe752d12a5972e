#include "fnm/trajectory.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include "fnm/parallel.hpp"

namespace fnm {

long ScheduleConfig::steps() const { return std::lround(t_max / dt); }

std::vector<long> ScheduleConfig::sample_steps() const {
  std::vector<long> out;
  const long n = steps();
  const long stride = std::max(sample_stride, 1);
  for (long k = 0; k <= n; k += stride) out.push_back(k);
  if (out.back() != n) out.push_back(n);
  return out;
}

std::vector<double> ScheduleConfig::sample_times() const {
  std::vector<double> out;
  for (long k : sample_steps()) out.push_back(static_cast<double>(k) * dt);
  return out;
}

void validate(const ScheduleConfig& schedule) {
  if (!(schedule.dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
  if (!(schedule.t_max >= schedule.dt)) throw Error(ErrorKind::Config, "t_max must be at least dt");
  if (schedule.n_traj < 1) throw Error(ErrorKind::Config, "n_traj must be at least 1");
  if (schedule.sample_stride < 1) throw Error(ErrorKind::Config, "sample_stride must be at least 1");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trajectory) {
  return splitmix64(splitmix64(master) ^ (trajectory * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

OrbitalMatrix orthonormalize(const MatrixXc& orbitals) {
  const Index m = orbitals.rows();
  const Index n = orbitals.cols();
  if (n == 0) return OrbitalMatrix{orbitals};
  const Eigen::HouseholderQR<MatrixXc> qr(orbitals);
  const auto& r = qr.matrixQR();
  for (Index k = 0; k < n; ++k) {
    if (!(std::abs(r(k, k)) > 1e-300))
      throw Error(ErrorKind::NumericalInstability, "orbital matrix lost rank during renormalization");
  }
  OrbitalMatrix out{qr.householderQ() * MatrixXc::Identity(m, n)};
  return out;
}

OrbitalMatrix jump_update(const OrbitalMatrix& state, Index site, JumpOutcome outcome) {
  const Index m = state.modes();
  const Index n = state.particles();
  if (site < 0 || site >= m) throw Error(ErrorKind::Shape, "jump site out of range");
  const double occupation = state.entries.row(site).squaredNorm();
  const double probability = outcome == JumpOutcome::Occupied ? occupation : 1.0 - occupation;
  if (!(probability > 1e-12))
    throw Error(ErrorKind::ImpossibleOutcome,
                "jump outcome has probability " + std::to_string(probability) + " at site " + std::to_string(site));
  if (n == 0) return state;

  // Rotate the occupied orbitals so that only column 0 has weight on `site`.
  const VectorXc u = state.entries.row(site).adjoint() / std::sqrt(occupation);
  const Eigen::HouseholderQR<MatrixXc> qr(u);
  const MatrixXc q = qr.householderQ();
  MatrixXc rotated = state.entries * q;
  rotated.row(site).tail(n - 1).setZero();

  if (outcome == JumpOutcome::Occupied) {
    rotated.col(0).setZero();
    rotated(site, 0) = 1.0;
  } else {
    rotated(site, 0) = 0.0;
    rotated.col(0).normalize();
  }
  return orthonormalize(rotated);
}

TrajectoryStepper::TrajectoryStepper(const LatticeModel& model, double dt) : model_(model), dt_(dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
  const double gamma = model.params.gamma;
  if (gamma * dt > 0.1) warn("gamma * dt = " + std::to_string(gamma * dt) + " exceeds 0.1; first-order unraveling is inaccurate");
  MatrixXc h_eff = model.h;
  for (Index site : model.dissipative_sites) h_eff(site, site) -= cplx(0.0, 0.5 * gamma);
  const MatrixXc generator = cplx(0.0, -dt) * h_eff;
  propagator_ = generator.exp();
}

std::vector<double> TrajectoryStepper::jump_probabilities(const OrbitalMatrix& state) const {
  std::vector<double> p;
  p.reserve(model_.dissipative_sites.size());
  const double rate = model_.params.gamma * dt_;
  for (Index site : model_.dissipative_sites) p.push_back(rate * state.entries.row(site).squaredNorm());
  return p;
}

OrbitalMatrix TrajectoryStepper::apply(const OrbitalMatrix& state, Index site) const {
  if (site >= 0) return jump_update(state, site, JumpOutcome::Occupied);
  OrbitalMatrix next = orthonormalize(propagator_ * state.entries);
  const double defect = isometry_defect(next);
  if (!(defect <= 1e-6))
    throw Error(ErrorKind::NumericalInstability, "isometry lost after renormalization (defect " + std::to_string(defect) + ")");
  return next;
}

OrbitalMatrix TrajectoryStepper::step(const OrbitalMatrix& state, Rng& rng) const {
  const auto p = jump_probabilities(state);
  double total = 0.0;
  for (double x : p) total += x;
  if (total > 1.0) warn("total jump probability exceeds 1 in a single step; reduce dt");
  const double r = uniform01(rng);
  if (r < total) {
    double cumulative = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      cumulative += p[k];
      if (r < cumulative) return apply(state, model_.dissipative_sites[k]);
    }
    // Rounding can leave r in [cumulative, total); use the last site with weight.
    for (std::size_t k = p.size(); k-- > 0;)
      if (p[k] > 0.0) return apply(state, model_.dissipative_sites[k]);
  }
  return apply(state, -1);
}

OrbitalMatrix step(const OrbitalMatrix& state, const LatticeModel& model, double dt, Rng& rng) {
  return TrajectoryStepper(model, dt).step(state, rng);
}

namespace {

MatrixXc observed_correlation(const OrbitalMatrix& v, const ModeSubset& observe) {
  const Index k = observe.size();
  MatrixXc rows(k, v.particles());
  for (Index i = 0; i < k; ++i) rows.row(i) = v.entries.row(observe[i]);
  MatrixXc c = rows.conjugate() * rows.transpose();
  symmetrize(c);
  return c;
}

template <class Sink>
void integrate(const TrajectoryStepper& stepper, const ScheduleConfig& schedule, const OrbitalMatrix& initial,
               const ModeSubset& observe, std::uint64_t seed, Sink&& sink) {
  validate(schedule);
  if (initial.modes() != stepper.model().modes())
    throw Error(ErrorKind::Shape, "initial state has " + std::to_string(initial.modes()) + " modes, model has " +
                                      std::to_string(stepper.model().modes()));
  for (Index idx : observe.indices())
    if (idx >= initial.modes()) throw Error(ErrorKind::Shape, "observed mode out of range");
  check_isometry(initial);
  Rng rng(seed);
  OrbitalMatrix state = initial;
  const auto samples = schedule.sample_steps();
  std::size_t next = 0;
  const long n = schedule.steps();
  for (long k = 0;; ++k) {
    if (next < samples.size() && samples[next] == k) {
      sink(observed_correlation(state, observe));
      ++next;
    }
    if (k == n) break;
    state = stepper.step(state, rng);
  }
}

}  // namespace

std::vector<CorrelationMatrix> run_trajectory(const TrajectoryStepper& stepper, const ScheduleConfig& schedule,
                                              const OrbitalMatrix& initial, const ModeSubset& observe,
                                              std::uint64_t seed) {
  std::vector<CorrelationMatrix> out;
  integrate(stepper, schedule, initial, observe, seed, [&](MatrixXc c) { out.push_back(CorrelationMatrix{std::move(c)}); });
  return out;
}

std::vector<CorrelationMatrix> run_trajectory(const LatticeModel& model, const ScheduleConfig& schedule,
                                              const OrbitalMatrix& initial, const ModeSubset& observe,
                                              std::uint64_t seed) {
  return run_trajectory(TrajectoryStepper(model, schedule.dt), schedule, initial, observe, seed);
}

std::size_t TrajectoryEnsemble::memory_bytes() const {
  const auto k = static_cast<std::size_t>(observe.size());
  return snapshots.size() * k * k * sizeof(cplx);
}

TrajectoryEnsemble run_ensemble(const LatticeModel& model, const ScheduleConfig& schedule, const OrbitalMatrix& initial,
                                const ModeSubset& observe, int threads) {
  validate(schedule);
  const TrajectoryStepper stepper(model, schedule.dt);
  TrajectoryEnsemble ens;
  ens.times = schedule.sample_times();
  ens.observe = observe;
  ens.schedule = schedule;
  const auto n_traj = static_cast<std::size_t>(schedule.n_traj);
  ens.seeds.resize(n_traj);
  for (std::size_t a = 0; a < n_traj; ++a) ens.seeds[a] = derive_seed(schedule.master_seed, a);
  ens.snapshots.resize(n_traj * ens.times.size());
  parallel_for(n_traj, threads, [&](std::size_t a) {
    std::size_t t = 0;
    integrate(stepper, schedule, initial, observe, ens.seeds[a],
              [&](MatrixXc c) { ens.snapshots[a * ens.times.size() + t++] = std::move(c); });
  });
  return ens;
}

std::vector<MatrixXc> ensemble_mean(const TrajectoryEnsemble& ensemble) {
  const Index k = ensemble.observe.size();
  std::vector<MatrixXc> out(ensemble.n_times(), MatrixXc::Zero(k, k));
  for (std::size_t a = 0; a < ensemble.n_traj(); ++a)
    for (std::size_t t = 0; t < ensemble.n_times(); ++t) out[t] += ensemble.at(a, t);
  for (auto& m : out) m /= static_cast<double>(ensemble.n_traj());
  return out;
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T> && sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

template <class T>
T get(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw Error(ErrorKind::Io, "truncated snapshot dump");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

constexpr char kMagic[8] = {'F', 'N', 'M', 'S', 'N', 'A', 'P', '1'};

}  // namespace

void write_snapshots_binary(const TrajectoryEnsemble& ens, std::ostream& out) {
  out.write(kMagic, 8);
  const auto dim = static_cast<std::uint64_t>(ens.observe.size());
  put<std::uint64_t>(out, ens.n_traj());
  put<std::uint64_t>(out, ens.n_times());
  put<std::uint64_t>(out, dim);
  put<std::uint64_t>(out, ens.schedule.master_seed);
  for (double t : ens.times) put(out, t);
  for (auto s : ens.seeds) put<std::uint64_t>(out, s);
  for (const auto& c : ens.snapshots) {
    for (Index k = 0; k < c.size(); ++k) {
      put(out, c.data()[k].real());
      put(out, c.data()[k].imag());
    }
  }
  if (!out) throw Error(ErrorKind::Io, "failed to write snapshot dump");
}

TrajectoryEnsemble read_snapshots_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorKind::Io, "not a snapshot dump");
  TrajectoryEnsemble ens;
  const auto n_traj = get<std::uint64_t>(in);
  const auto n_times = get<std::uint64_t>(in);
  const auto dim = static_cast<Index>(get<std::uint64_t>(in));
  ens.schedule.master_seed = get<std::uint64_t>(in);
  ens.schedule.n_traj = static_cast<int>(n_traj);
  ens.observe = ModeSubset::range(0, dim, dim);
  for (std::uint64_t t = 0; t < n_times; ++t) ens.times.push_back(get<double>(in));
  for (std::uint64_t a = 0; a < n_traj; ++a) ens.seeds.push_back(get<std::uint64_t>(in));
  ens.snapshots.resize(n_traj * n_times);
  for (auto& c : ens.snapshots) {
    c.resize(dim, dim);
    for (Index k = 0; k < c.size(); ++k) {
      const double re = get<double>(in);
      const double im = get<double>(in);
      c.data()[k] = cplx(re, im);
    }
  }
  return ens;
}

void write_snapshots_csv(const TrajectoryEnsemble& ens, std::ostream& out) {
  out << "# fnm snapshot dump\n";
  out << "# n_traj=" << ens.n_traj() << " n_times=" << ens.n_times() << " dim=" << ens.observe.size()
      << " master_seed=" << ens.schedule.master_seed << '\n';
  out << "traj,seed,t,n,m,re,im\n";
  out.precision(17);
  for (std::size_t a = 0; a < ens.n_traj(); ++a) {
    for (std::size_t t = 0; t < ens.n_times(); ++t) {
      const auto& c = ens.at(a, t);
      for (Index n = 0; n < c.rows(); ++n)
        for (Index m = 0; m < c.cols(); ++m)
          out << a << ',' << ens.seeds[a] << ',' << ens.times[t] << ',' << n << ',' << m << ',' << c(n, m).real()
              << ',' << c(n, m).imag() << '\n';
    }
  }
}

}  // namespace fnm
