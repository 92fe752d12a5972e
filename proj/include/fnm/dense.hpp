#pragma once

// Dense Fock-space reference: Jordan-Wigner operators, Lindblad integration,
// exact distances and entropies. Basis states are bit strings with mode 0 as
// the most significant bit, so the mode ordering (S, then A, then B) is also
// the tensor-product ordering.

#include <functional>
#include <vector>

#include <Eigen/SparseCore>

#include "fnm/gaussian.hpp"
#include "fnm/lattice.hpp"
#include "fnm/trajectory.hpp"

namespace fnm::dense {

using SparseC = Eigen::SparseMatrix<cplx>;

inline constexpr int kMaxModes = 14;

struct FockOperatorSet {
  int modes = 0;
  std::vector<SparseC> annihilate;  // c_n
  std::vector<SparseC> create;      // c_n^dag
  std::vector<SparseC> number;      // n_n

  Index dim() const noexcept { return Index{1} << modes; }
};

/// Throws Resource for more than 14 modes.
FockOperatorSet build_fock_operators(int modes);

/// Density matrix on 2^modes states.
struct DenseState {
  MatrixXc rho;
  int modes = 0;

  Index dim() const noexcept { return rho.rows(); }
};

Index basis_index(const std::vector<bool>& pattern);
VectorXc basis_vector(const std::vector<bool>& pattern);
DenseState pure_state(const VectorXc& psi, int modes);

/// Fock-space vector of the Slater determinant prod_k (sum_n V_nk c_n^dag)|0>.
VectorXc slater_to_dense(const OrbitalMatrix& v);

/// Many-body H = sum_nm h_nm c_n^dag c_m as a sparse matrix.
SparseC many_body_hamiltonian(const MatrixXc& h);

/// Throws InvalidState unless rho is Hermitian with unit trace and no
/// eigenvalue below -1e-9.
void check_state(const DenseState& state);

/// Fixed-step RK4 for d rho/dt = -i[H, rho] + sum_i (L_i rho L_i - 1/2 {L_i, rho})
/// with L_i = sqrt(gamma) n_i.
class LindbladIntegrator {
 public:
  LindbladIntegrator(const LatticeModel& model, double dt);

  /// Integrates `steps` steps of size dt, calling observer(step, rho) at
  /// each step in `sample_steps` (sorted). On the first call the step is
  /// checked by step halving and subdivided until the local error is below 1e-8.
  void run(DenseState& state, long steps, const std::vector<long>& sample_steps,
           const std::function<void(long, const DenseState&)>& observer);

  int substeps() const noexcept { return substeps_; }
  double dt() const noexcept { return dt_; }

  /// d rho / dt at the given state.
  void derivative(const MatrixXc& rho, MatrixXc& out) const;

 private:
  void rk4(MatrixXc& rho, double h);
  void calibrate(const MatrixXc& rho);

  int modes_;
  double dt_;
  double gamma_;
  std::uint64_t dissipative_mask_ = 0;
  SparseC hamiltonian_;
  // Real copy used when h has no imaginary part (mixed products are cheaper).
  Eigen::SparseMatrix<double> hamiltonian_real_;
  bool real_hamiltonian_ = false;
  int substeps_ = 1;
  bool calibrated_ = false;
  MatrixXc k_, acc_, stage_;
  mutable MatrixXc scratch_, scratch_right_;
};

/// States at every sample step of `schedule` starting from rho0.
std::vector<DenseState> evolve_lindblad(const DenseState& rho0, const LatticeModel& model, const ScheduleConfig& schedule);

/// Reduced density matrix on `keep` (indices into the state's modes). The trace
/// is taken qubit-wise, which equals the fermionic marginal when `keep` is a
/// contiguous block of modes.
DenseState partial_trace(const DenseState& state, const ModeSubset& keep);

double trace_distance(const DenseState& rho, const DenseState& sigma);
double hs_distance_dense(const DenseState& rho, const DenseState& sigma);
double purity(const DenseState& rho);
double von_neumann_entropy(const DenseState& rho);

/// I = S(rho_S) + S(rho_A) - S(rho_SA), `split` selecting the S modes of
/// rho_SA; the complement forms A.
double vn_mutual_info(const DenseState& rho_sa, const ModeSubset& split);

/// C_nm = Tr(rho c_n^dag c_m).
CorrelationMatrix c_from_dense(const DenseState& rho, const FockOperatorSet& ops);
CorrelationMatrix c_from_dense(const DenseState& rho);

/// n_i|psi>/|.| or (1 - n_i)|psi>/|.|.
VectorXc projective_jump_dense(const VectorXc& psi, int modes, Index site, JumpOutcome outcome);

/// Exact d2(t) on the S marginal for two product initial states.
struct DenseSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t peak_bytes = 0;
};

DenseSeries hs_distance_series(const LatticeModel& model, const ScheduleConfig& schedule,
                               const std::vector<bool>& full_pattern_p, const std::vector<bool>& full_pattern_q);

/// Exact purity combination P(S) + P(A) - P(SA) (or the log variant) for an
/// S+A+B model prepared in `psi0`.
DenseSeries renyi2_mi_series(const LatticeModel& model, const ScheduleConfig& schedule, const VectorXc& psi0,
                             bool log_variant = false);

/// Exact trajectory-free mean C(t) on `observe`.
std::vector<MatrixXc> correlation_series(const LatticeModel& model, const ScheduleConfig& schedule,
                                         const VectorXc& psi0, const ModeSubset& observe);

}  // namespace fnm::dense
