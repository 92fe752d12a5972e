#include "fnm/dense.hpp"

#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace fnm::dense {

namespace {

using u64 = std::uint64_t;

constexpr cplx kI{0.0, 1.0};

u64 mode_bit(int modes, Index n) { return u64{1} << (modes - 1 - n); }

// (-1)^(number of occupied modes before n), i.e. bits above mode n's bit.
double jw_sign(u64 x, int modes, Index n) {
  const int shift = modes - static_cast<int>(n);
  const u64 above = shift >= 64 ? 0 : (x >> shift);
  return (std::popcount(above) & 1) ? -1.0 : 1.0;
}

// c_n^dag c_m |x> = sign |y>; returns false when the result vanishes.
bool hop(u64 x, int modes, Index n, Index m, u64& y, double& sign) {
  const u64 bm = mode_bit(modes, m);
  if (!(x & bm)) return false;
  const u64 x1 = x ^ bm;
  const u64 bn = mode_bit(modes, n);
  if (x1 & bn) return false;
  sign = jw_sign(x, modes, m) * jw_sign(x1, modes, n);
  y = x1 | bn;
  return true;
}

void require_modes(int modes) {
  if (modes < 0 || modes > kMaxModes)
    throw Error(ErrorKind::Resource, "dense oracle limited to " + std::to_string(kMaxModes) + " modes, requested " +
                                         std::to_string(modes));
}

int modes_of_dim(Index dim) {
  int m = 0;
  while ((Index{1} << m) < dim) ++m;
  if ((Index{1} << m) != dim) throw Error(ErrorKind::Shape, "dense dimension is not a power of two");
  return m;
}

double entropy_of(const MatrixXc& rho) {
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double p = es.eigenvalues()(k);
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

}  // namespace

FockOperatorSet build_fock_operators(int modes) {
  require_modes(modes);
  FockOperatorSet ops;
  ops.modes = modes;
  const Index dim = ops.dim();
  for (Index n = 0; n < modes; ++n) {
    std::vector<Eigen::Triplet<cplx>> c_trip, n_trip;
    const u64 bn = mode_bit(modes, n);
    for (u64 x = 0; x < static_cast<u64>(dim); ++x) {
      if (x & bn) {
        c_trip.emplace_back(static_cast<Index>(x ^ bn), static_cast<Index>(x), jw_sign(x, modes, n));
        n_trip.emplace_back(static_cast<Index>(x), static_cast<Index>(x), 1.0);
      }
    }
    SparseC c(dim, dim), num(dim, dim);
    c.setFromTriplets(c_trip.begin(), c_trip.end());
    num.setFromTriplets(n_trip.begin(), n_trip.end());
    ops.create.push_back(SparseC(c.adjoint()));
    ops.annihilate.push_back(std::move(c));
    ops.number.push_back(std::move(num));
  }
  return ops;
}

Index basis_index(const std::vector<bool>& pattern) {
  const int modes = static_cast<int>(pattern.size());
  u64 x = 0;
  for (int n = 0; n < modes; ++n)
    if (pattern[static_cast<std::size_t>(n)]) x |= mode_bit(modes, n);
  return static_cast<Index>(x);
}

VectorXc basis_vector(const std::vector<bool>& pattern) {
  require_modes(static_cast<int>(pattern.size()));
  VectorXc v = VectorXc::Zero(Index{1} << pattern.size());
  v(basis_index(pattern)) = 1.0;
  return v;
}

DenseState pure_state(const VectorXc& psi, int modes) {
  if (psi.size() != (Index{1} << modes)) throw Error(ErrorKind::Shape, "state vector size does not match modes");
  return DenseState{psi * psi.adjoint(), modes};
}

VectorXc slater_to_dense(const OrbitalMatrix& v) {
  const int modes = static_cast<int>(v.modes());
  require_modes(modes);
  const Index dim = Index{1} << modes;
  VectorXc psi = VectorXc::Zero(dim);
  psi(0) = 1.0;
  for (Index k = v.particles(); k-- > 0;) {
    VectorXc next = VectorXc::Zero(dim);
    for (u64 x = 0; x < static_cast<u64>(dim); ++x) {
      const cplx amp = psi(static_cast<Index>(x));
      if (amp == cplx(0.0)) continue;
      for (Index n = 0; n < modes; ++n) {
        const u64 bn = mode_bit(modes, n);
        if (x & bn) continue;
        next(static_cast<Index>(x | bn)) += v.entries(n, k) * jw_sign(x, modes, n) * amp;
      }
    }
    psi = std::move(next);
  }
  return psi;
}

SparseC many_body_hamiltonian(const MatrixXc& h) {
  const int modes = static_cast<int>(h.rows());
  require_modes(modes);
  const Index dim = Index{1} << modes;
  std::vector<Eigen::Triplet<cplx>> trip;
  for (Index n = 0; n < modes; ++n) {
    for (Index m = 0; m < modes; ++m) {
      const cplx coef = h(n, m);
      if (coef == cplx(0.0)) continue;
      for (u64 x = 0; x < static_cast<u64>(dim); ++x) {
        u64 y;
        double sign;
        if (hop(x, modes, n, m, y, sign)) trip.emplace_back(static_cast<Index>(y), static_cast<Index>(x), coef * sign);
      }
    }
  }
  SparseC out(dim, dim);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

void check_state(const DenseState& state) {
  const MatrixXc& rho = state.rho;
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::Shape, "density matrix must be square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorKind::InvalidState, "density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw Error(ErrorKind::InvalidState, "density matrix trace differs from 1");
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) throw Error(ErrorKind::InvalidState, "density matrix is not positive");
}

LindbladIntegrator::LindbladIntegrator(const LatticeModel& model, double dt)
    : modes_(static_cast<int>(model.modes())), dt_(dt), gamma_(model.params.gamma) {
  require_modes(modes_);
  if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
  hamiltonian_ = many_body_hamiltonian(model.h);
  real_hamiltonian_ = model.h.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real_hamiltonian_) hamiltonian_real_ = hamiltonian_.real();
  for (Index site : model.dissipative_sites) dissipative_mask_ |= mode_bit(modes_, site);
}

void LindbladIntegrator::derivative(const MatrixXc& rho, MatrixXc& out) const {
  if (real_hamiltonian_) {
    scratch_.noalias() = hamiltonian_real_ * rho;
    scratch_right_.noalias() = rho * hamiltonian_real_;
  } else {
    scratch_.noalias() = hamiltonian_ * rho;
    scratch_right_.noalias() = rho * hamiltonian_;
  }
  const Index dim = rho.rows();
  const double half_gamma = 0.5 * gamma_;
  out.resize(dim, dim);
  for (Index y = 0; y < dim; ++y) {
    const cplx* hr = scratch_.col(y).data();
    const cplx* rh = scratch_right_.col(y).data();
    const cplx* r = rho.col(y).data();
    cplx* o = out.col(y).data();
    for (Index x = 0; x < dim; ++x) {
      const cplx commutator = hr[x] - rh[x];
      const double damp = half_gamma * std::popcount((static_cast<u64>(x) ^ static_cast<u64>(y)) & dissipative_mask_);
      // -i [H, rho] written out to avoid the generic complex multiply.
      o[x] = cplx(commutator.imag() - damp * r[x].real(), -commutator.real() - damp * r[x].imag());
    }
  }
}

void LindbladIntegrator::rk4(MatrixXc& rho, double h) {
  derivative(rho, k_);
  acc_ = rho + (h / 6.0) * k_;
  stage_ = rho + (0.5 * h) * k_;
  derivative(stage_, k_);
  acc_ += (h / 3.0) * k_;
  stage_ = rho + (0.5 * h) * k_;
  derivative(stage_, k_);
  acc_ += (h / 3.0) * k_;
  stage_ = rho + h * k_;
  derivative(stage_, k_);
  acc_ += (h / 6.0) * k_;
  rho.swap(acc_);
}

void LindbladIntegrator::calibrate(const MatrixXc& rho) {
  constexpr double kLocalTolerance = 1e-8;
  for (;;) {
    const double h = dt_ / substeps_;
    MatrixXc coarse = rho;
    rk4(coarse, h);
    MatrixXc fine = rho;
    rk4(fine, 0.5 * h);
    rk4(fine, 0.5 * h);
    const double local_error = (16.0 / 15.0) * (coarse - fine).cwiseAbs().maxCoeff();
    if (local_error < kLocalTolerance) break;
    if (substeps_ >= 1024)
      throw Error(ErrorKind::IntegrationFailure, "RK4 step halving did not reach local error 1e-8");
    substeps_ *= 2;
  }
  calibrated_ = true;
}

void LindbladIntegrator::run(DenseState& state, long steps, const std::vector<long>& sample_steps,
                             const std::function<void(long, const DenseState&)>& observer) {
  if (state.modes != modes_) throw Error(ErrorKind::Shape, "dense state and model have different mode counts");
  if (!calibrated_) calibrate(state.rho);
  std::size_t next = 0;
  const double h = dt_ / substeps_;
  for (long k = 0;; ++k) {
    if (next < sample_steps.size() && sample_steps[next] == k) {
      const double drift = std::abs(state.rho.trace() - 1.0);
      if (drift > 1e-6)
        throw Error(ErrorKind::IntegrationFailure, "trace drifted by " + std::to_string(drift));
      if (observer) observer(k, state);
      ++next;
    }
    if (k == steps) break;
    for (int s = 0; s < substeps_; ++s) rk4(state.rho, h);
  }
}

std::vector<DenseState> evolve_lindblad(const DenseState& rho0, const LatticeModel& model, const ScheduleConfig& schedule) {
  validate(schedule);
  LindbladIntegrator integrator(model, schedule.dt);
  DenseState state = rho0;
  std::vector<DenseState> out;
  integrator.run(state, schedule.steps(), schedule.sample_steps(),
                 [&](long, const DenseState& s) { out.push_back(s); });
  return out;
}

DenseState partial_trace(const DenseState& state, const ModeSubset& keep) {
  const int modes = state.modes;
  const int kept = static_cast<int>(keep.size());
  std::vector<Index> traced;
  for (Index n = 0; n < modes; ++n)
    if (!keep.contains(n)) traced.push_back(n);
  for (Index n : keep.indices())
    if (n >= modes) throw Error(ErrorKind::Shape, "partial_trace: mode out of range");

  auto spread = [&](u64 local, const std::vector<Index>& which, int width) {
    u64 full = 0;
    for (int k = 0; k < width; ++k)
      if (local & (u64{1} << (width - 1 - k))) full |= mode_bit(modes, which[static_cast<std::size_t>(k)]);
    return full;
  };
  const u64 kept_dim = u64{1} << kept;
  const u64 traced_dim = u64{1} << traced.size();
  std::vector<u64> kept_bits(kept_dim), traced_bits(traced_dim);
  for (u64 i = 0; i < kept_dim; ++i) kept_bits[i] = spread(i, keep.indices(), kept);
  for (u64 t = 0; t < traced_dim; ++t) traced_bits[t] = spread(t, traced, static_cast<int>(traced.size()));

  DenseState out{MatrixXc::Zero(static_cast<Index>(kept_dim), static_cast<Index>(kept_dim)), kept};
  for (u64 j = 0; j < kept_dim; ++j) {
    for (u64 i = 0; i < kept_dim; ++i) {
      cplx sum = 0.0;
      for (u64 t = 0; t < traced_dim; ++t)
        sum += state.rho(static_cast<Index>(kept_bits[i] | traced_bits[t]), static_cast<Index>(kept_bits[j] | traced_bits[t]));
      out.rho(static_cast<Index>(i), static_cast<Index>(j)) = sum;
    }
  }
  return out;
}

double trace_distance(const DenseState& rho, const DenseState& sigma) {
  if (rho.dim() != sigma.dim()) throw Error(ErrorKind::Shape, "trace_distance: dimension mismatch");
  const MatrixXc diff = rho.rho - sigma.rho;
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double hs_distance_dense(const DenseState& rho, const DenseState& sigma) {
  if (rho.dim() != sigma.dim()) throw Error(ErrorKind::Shape, "hs_distance_dense: dimension mismatch");
  return std::sqrt(0.5 * (rho.rho - sigma.rho).squaredNorm());
}

double purity(const DenseState& rho) { return rho.rho.squaredNorm(); }

double von_neumann_entropy(const DenseState& rho) { return entropy_of(rho.rho); }

double vn_mutual_info(const DenseState& rho_sa, const ModeSubset& split) {
  std::vector<Index> rest;
  for (Index n = 0; n < rho_sa.modes; ++n)
    if (!split.contains(n)) rest.push_back(n);
  const ModeSubset complement(rest, rho_sa.modes);
  const DenseState rho_s = partial_trace(rho_sa, split);
  const DenseState rho_a = partial_trace(rho_sa, complement);
  return entropy_of(rho_s.rho) + entropy_of(rho_a.rho) - entropy_of(rho_sa.rho);
}

CorrelationMatrix c_from_dense(const DenseState& rho) {
  const int modes = modes_of_dim(rho.dim());
  CorrelationMatrix c{MatrixXc::Zero(modes, modes)};
  for (Index n = 0; n < modes; ++n) {
    for (Index m = 0; m < modes; ++m) {
      cplx sum = 0.0;
      for (u64 x = 0; x < static_cast<u64>(rho.dim()); ++x) {
        u64 y;
        double sign;
        // Tr(rho A) = sum_x rho_{x, y} A_{y, x} with A|x> = sign |y>.
        if (hop(x, modes, n, m, y, sign)) sum += sign * rho.rho(static_cast<Index>(x), static_cast<Index>(y));
      }
      c.entries(n, m) = sum;
    }
  }
  return c;
}

CorrelationMatrix c_from_dense(const DenseState& rho, const FockOperatorSet& ops) {
  if (ops.dim() != rho.dim()) throw Error(ErrorKind::Shape, "c_from_dense: operator set does not match state");
  CorrelationMatrix c{MatrixXc::Zero(ops.modes, ops.modes)};
  for (int n = 0; n < ops.modes; ++n) {
    for (int m = 0; m < ops.modes; ++m) {
      const SparseC op = ops.create[static_cast<std::size_t>(n)] * ops.annihilate[static_cast<std::size_t>(m)];
      cplx sum = 0.0;
      for (Index col = 0; col < op.outerSize(); ++col)
        for (SparseC::InnerIterator it(op, col); it; ++it) sum += it.value() * rho.rho(it.col(), it.row());
      c.entries(n, m) = sum;
    }
  }
  return c;
}

VectorXc projective_jump_dense(const VectorXc& psi, int modes, Index site, JumpOutcome outcome) {
  if (psi.size() != (Index{1} << modes)) throw Error(ErrorKind::Shape, "state vector size does not match modes");
  const u64 bit = mode_bit(modes, site);
  VectorXc out = psi;
  for (u64 x = 0; x < static_cast<u64>(psi.size()); ++x) {
    const bool occupied = (x & bit) != 0;
    if (occupied != (outcome == JumpOutcome::Occupied)) out(static_cast<Index>(x)) = 0.0;
  }
  const double p = out.squaredNorm();
  if (!(p > 1e-12)) throw Error(ErrorKind::ImpossibleOutcome, "projective outcome has vanishing probability");
  return out / std::sqrt(p);
}

namespace {

std::size_t integrator_bytes(int modes) {
  const std::size_t dim = std::size_t{1} << modes;
  // rho, k, acc, stage, two product buffers and the two calibration copies.
  return 8 * dim * dim * sizeof(cplx);
}

}  // namespace

DenseSeries hs_distance_series(const LatticeModel& model, const ScheduleConfig& schedule,
                               const std::vector<bool>& full_pattern_p, const std::vector<bool>& full_pattern_q) {
  validate(schedule);
  const int modes = static_cast<int>(model.modes());
  const ModeSubset s = model.s_modes();
  auto marginals = [&](const std::vector<bool>& pattern) {
    if (static_cast<int>(pattern.size()) != modes) throw Error(ErrorKind::Shape, "pattern length differs from mode count");
    LindbladIntegrator integrator(model, schedule.dt);
    DenseState state = pure_state(basis_vector(pattern), modes);
    std::vector<DenseState> out;
    integrator.run(state, schedule.steps(), schedule.sample_steps(),
                   [&](long, const DenseState& st) { out.push_back(partial_trace(st, s)); });
    return out;
  };
  const auto rp = marginals(full_pattern_p);
  const auto rq = marginals(full_pattern_q);
  DenseSeries series;
  series.times = schedule.sample_times();
  for (std::size_t t = 0; t < rp.size(); ++t) series.values.push_back(hs_distance_dense(rp[t], rq[t]));
  series.peak_bytes = integrator_bytes(modes);
  return series;
}

DenseSeries renyi2_mi_series(const LatticeModel& model, const ScheduleConfig& schedule, const VectorXc& psi0,
                             bool log_variant) {
  if (!model.has_a()) throw Error(ErrorKind::Config, "Renyi-2 mutual information needs an A chain");
  validate(schedule);
  const int modes = static_cast<int>(model.modes());
  const int L = model.L();
  const ModeSubset sa = model.sa_modes();
  const ModeSubset s_in_sa = ModeSubset::range(0, L, 2 * L);
  const ModeSubset a_in_sa = ModeSubset::range(L, L, 2 * L);
  LindbladIntegrator integrator(model, schedule.dt);
  DenseState state = pure_state(psi0, modes);
  DenseSeries series;
  series.times = schedule.sample_times();
  integrator.run(state, schedule.steps(), schedule.sample_steps(), [&](long, const DenseState& st) {
    const DenseState rho_sa = partial_trace(st, sa);
    const double ps = purity(partial_trace(rho_sa, s_in_sa));
    const double pa = purity(partial_trace(rho_sa, a_in_sa));
    const double psa = purity(rho_sa);
    series.values.push_back(log_variant ? -std::log(ps) - std::log(pa) + std::log(psa) : ps + pa - psa);
  });
  series.peak_bytes = integrator_bytes(modes);
  return series;
}

std::vector<MatrixXc> correlation_series(const LatticeModel& model, const ScheduleConfig& schedule, const VectorXc& psi0,
                                         const ModeSubset& observe) {
  validate(schedule);
  const int modes = static_cast<int>(model.modes());
  LindbladIntegrator integrator(model, schedule.dt);
  DenseState state = pure_state(psi0, modes);
  std::vector<MatrixXc> out;
  integrator.run(state, schedule.steps(), schedule.sample_steps(),
                 [&](long, const DenseState& st) { out.push_back(reduce(c_from_dense(st), observe).entries); });
  return out;
}

}  // namespace fnm::dense
