#pragma once

// Shared fixtures for the unit tests: random Gaussian states and a small,
// independent dense Jordan-Wigner construction used as a reference.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "fnm/gaussian.hpp"

namespace fnm::testing {

using Rand = std::mt19937_64;

inline double uniform(Rand& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline MatrixXc random_complex(Rand& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  MatrixXc m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline MatrixXc random_unitary(Rand& rng, Index n) {
  Eigen::HouseholderQR<MatrixXc> qr(random_complex(rng, n, n));
  return qr.householderQ() * MatrixXc::Identity(n, n);
}

inline OrbitalMatrix random_orbitals(Rand& rng, Index modes, Index particles) {
  return OrbitalMatrix{random_unitary(rng, modes).leftCols(particles)};
}

/// Number-conserving mixed state with occupations drawn from [lo, hi].
inline CorrelationMatrix random_mixed_c(Rand& rng, Index modes, double lo = 0.05, double hi = 0.95) {
  const MatrixXc u = random_unitary(rng, modes);
  Eigen::VectorXd occ(modes);
  for (Index k = 0; k < modes; ++k) occ(k) = uniform(rng, lo, hi);
  MatrixXc c = u * occ.cast<cplx>().asDiagonal() * u.adjoint();
  return CorrelationMatrix{0.5 * (c + c.adjoint())};
}

inline CorrelationMatrix random_projector(Rand& rng, Index modes, Index particles) {
  const MatrixXc v = random_unitary(rng, modes).leftCols(particles);
  // <c_n^dag c_m> = conj(V V^dag)_nm.
  return CorrelationMatrix{(v * v.adjoint()).conjugate()};
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() ? static_cast<double>(m.cwiseAbs().maxCoeff()) : 0.0;
}

/// Dense Jordan-Wigner operators built independently of the library. Bit
/// strings put mode 0 in the most significant position.
struct JordanWigner {
  int modes;
  std::vector<MatrixXc> c;

  explicit JordanWigner(int m) : modes(m) {
    const Index dim = Index{1} << m;
    for (int n = 0; n < m; ++n) {
      MatrixXc op = MatrixXc::Zero(dim, dim);
      const Index bit = Index{1} << (m - 1 - n);
      for (Index x = 0; x < dim; ++x) {
        if (!(x & bit)) continue;
        int above = 0;
        for (int k = 0; k < n; ++k)
          if (x & (Index{1} << (m - 1 - k))) ++above;
        op(x ^ bit, x) = (above % 2) ? -1.0 : 1.0;
      }
      c.push_back(op);
    }
  }

  Index dim() const { return Index{1} << modes; }
  MatrixXc cdag(int n) const { return c[static_cast<std::size_t>(n)].adjoint(); }
  MatrixXc number(int n) const { return cdag(n) * c[static_cast<std::size_t>(n)]; }

  /// a_{2n} = c + c^dag, a_{2n+1} = -i (c - c^dag).
  MatrixXc majorana(int j) const {
    const MatrixXc& cn = c[static_cast<std::size_t>(j / 2)];
    if (j % 2 == 0) return cn + cn.adjoint();
    return cplx(0, -1) * (cn - cn.adjoint());
  }

  VectorXc vacuum() const {
    VectorXc v = VectorXc::Zero(dim());
    v(0) = 1.0;
    return v;
  }

  /// prod_k (sum_n V_nk c_n^dag) |0>, applied in column order.
  VectorXc slater(const MatrixXc& v) const {
    VectorXc psi = vacuum();
    for (Index k = 0; k < v.cols(); ++k) {
      MatrixXc op = MatrixXc::Zero(dim(), dim());
      for (int n = 0; n < modes; ++n) op += v(n, k) * cdag(n);
      psi = (op * psi).eval();
    }
    return psi;
  }

  /// C_nm = Tr(rho c_n^dag c_m).
  MatrixXc correlation(const MatrixXc& rho) const {
    MatrixXc out(modes, modes);
    for (int n = 0; n < modes; ++n)
      for (int m = 0; m < modes; ++m) out(n, m) = (rho * cdag(n) * c[static_cast<std::size_t>(m)]).trace();
    return out;
  }

  /// Gamma_jk = (i/2) Tr(rho [a_j, a_k]).
  MatrixXd majorana_covariance(const MatrixXc& rho) const {
    const int n = 2 * modes;
    MatrixXd g(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const MatrixXc aj = majorana(j), ak = majorana(k);
        g(j, k) = (cplx(0, 0.5) * (rho * (aj * ak - ak * aj)).trace()).real();
      }
    return g;
  }

  /// Unnormalized exp((i/4) sum_jk W_jk a_j a_k).
  MatrixXc gaussian_exponential(const MatrixXd& w) const {
    const int n = 2 * modes;
    MatrixXc q = MatrixXc::Zero(dim(), dim());
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) q += cplx(0, 0.25 * w(j, k)) * majorana(j) * majorana(k);
    return q.exp();
  }

  /// Density matrix of the number-conserving Gaussian state with correlation c,
  /// built from its occupation eigenbasis.
  MatrixXc gaussian_state(const MatrixXc& corr) const {
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(corr);
    // With C = U diag(n) U^dag and d_k = sum_m U_mk c_m, <d_k^dag d_l> = n_k delta_kl.
    const MatrixXc& u = es.eigenvectors();
    MatrixXc rho = MatrixXc::Identity(dim(), dim());
    for (int k = 0; k < modes; ++k) {
      MatrixXc d = MatrixXc::Zero(dim(), dim());
      for (int m = 0; m < modes; ++m) d += u(m, k) * c[static_cast<std::size_t>(m)];
      const MatrixXc nk = d.adjoint() * d;
      const double occ = es.eigenvalues()(k);
      rho = (rho * (occ * nk + (1.0 - occ) * (MatrixXc::Identity(dim(), dim()) - nk))).eval();
    }
    return rho;
  }
};

}  // namespace fnm::testing
