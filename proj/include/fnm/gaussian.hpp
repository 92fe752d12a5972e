#pragma once

// Number-conserving fermionic Gaussian states.
//
// Conventions used throughout the library:
//   * C[n][m] = <c_n^dag c_m>, complex Hermitian L x L.
//   * Majorana operators a_{2n} = c_n + c_n^dag, a_{2n+1} = -i (c_n - c_n^dag)
//     (zero-based), Gamma_jk = i (<a_j a_k> - delta_jk). Gamma is real and
//     antisymmetric; with G = 2C - 1 its (n, m) 2x2 block is
//         [ -Im G_nm   Re G_nm ]
//         [ -Re G_nm  -Im G_nm ]
//     so a single occupied mode has Gamma = [[0, 1], [-1, 0]].
//   * The Gaussian exponent W is real antisymmetric with
//     rho = exp((i/4) a W a) / Z(W). Both i*Gamma and i*W are Hermitian and
//     share eigenvectors; their eigenvalues are related by mu = tanh(lambda/2).

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "fnm/core.hpp"

namespace fnm {

struct CorrelationMatrix {
  MatrixXc entries;

  Index dim() const noexcept { return entries.rows(); }
};

struct MajoranaCovariance {
  MatrixXd entries;

  Index dim() const noexcept { return entries.rows(); }
  Index modes() const noexcept { return entries.rows() / 2; }
};

struct GaussianExponent {
  MatrixXd entries;
  double log_z = 0.0;

  Index dim() const noexcept { return entries.rows(); }
};

/// Occupied single-particle orbitals of a Slater determinant, one per column.
struct OrbitalMatrix {
  MatrixXc entries;

  Index modes() const noexcept { return entries.rows(); }
  Index particles() const noexcept { return entries.cols(); }
};

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double spectrum = 1e-8;
inline constexpr double projector = 1e-8;
inline constexpr double isometry = 1e-10;
inline constexpr double singular_margin = 1e-6;
inline constexpr double negative_det = 1e-10;
}  // namespace tol

/// Determinant stored as log-magnitude and unit phase (sign for real scalars).
template <class Scalar>
struct SignedLogDet {
  double log_abs = -std::numeric_limits<double>::infinity();
  Scalar phase = Scalar(0);

  Scalar value() const { return phase * std::exp(log_abs); }
};

/// Pivoted-LU determinant that survives products far below DBL_MIN.
template <class Derived>
SignedLogDet<typename Derived::Scalar> signed_log_det(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  SignedLogDet<Scalar> out;
  if (m.rows() == 0) {
    out.log_abs = 0.0;
    out.phase = Scalar(1);
    return out;
  }
  const Eigen::PartialPivLU<Matrix<Scalar>> lu(m);
  const auto& packed = lu.matrixLU();
  double log_abs = 0.0;
  Scalar phase = Scalar(lu.permutationP().determinant());
  for (Index k = 0; k < packed.rows(); ++k) {
    const Scalar d = packed(k, k);
    const double mag = std::abs(d);
    if (mag == 0.0) return out;
    log_abs += std::log(mag);
    phase *= d / mag;
  }
  out.log_abs = log_abs;
  out.phase = phase;
  return out;
}

namespace detail {

template <int N, class Scalar>
Scalar small_det(const Scalar* m) {
  auto at = [m](int i, int j) { return m[i + j * N]; };
  if constexpr (N == 1) {
    return m[0];
  } else if constexpr (N == 2) {
    return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  } else if constexpr (N == 3) {
    return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
           at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
           at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
  } else {
    static_assert(N == 4);
    // Laplace expansion in 2 x 2 minors of rows (0,1) and (2,3).
    auto minor = [&](int r, int c0, int c1) { return at(r, c0) * at(r + 1, c1) - at(r, c1) * at(r + 1, c0); };
    return minor(0, 0, 1) * minor(2, 2, 3) - minor(0, 0, 2) * minor(2, 1, 3) + minor(0, 0, 3) * minor(2, 1, 2) +
           minor(0, 1, 2) * minor(2, 0, 3) - minor(0, 1, 3) * minor(2, 0, 2) + minor(0, 2, 3) * minor(2, 0, 1);
  }
}

template <int N, class Scalar>
Scalar overlap_det_fixed(const Scalar* a, const Scalar* b) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  Scalar m[N * N];
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      Scalar ab = a[i] * b[j * N];
      for (int l = 1; l < N; ++l) ab += a[i + l * N] * b[l + j * N];
      m[i + j * N] = Scalar(i == j ? 1 : 0) - a[i + j * N] - b[i + j * N] + Real(2) * ab;
    }
  return small_det<N>(m);
}

}  // namespace detail

/// det(1 - A - B + 2AB) for two k x k column-major blocks.
///
/// Closed-form cofactor determinants are used up to 4 modes, pivoted LU in
/// log form beyond that.
template <class Scalar>
Scalar overlap_det(const Scalar* a, const Scalar* b, Index k) {
  switch (k) {
    case 0:
      return Scalar(1);
    case 1:
      return detail::overlap_det_fixed<1>(a, b);
    case 2:
      return detail::overlap_det_fixed<2>(a, b);
    case 3:
      return detail::overlap_det_fixed<3>(a, b);
    case 4:
      return detail::overlap_det_fixed<4>(a, b);
    default:
      break;
  }
  const Eigen::Map<const Matrix<Scalar>> ma(a, k, k), mb(b, k, k);
  Matrix<Scalar> m = Scalar(2) * (ma * mb);
  m -= ma;
  m -= mb;
  m.diagonal().array() += Scalar(1);
  return signed_log_det(m).value();
}

/// det(1 - A - B + 2AB) for two correlation matrices of equal size.
template <class Scalar>
Scalar overlap_det(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  return overlap_det(a.data(), b.data(), a.rows());
}

/// Real part of overlap_det, i.e. Tr(rho_a rho_b) for number-conserving states.
inline double pair_overlap(const MatrixXc& a, const MatrixXc& b) { return std::real(overlap_det(a, b)); }

/// Throws InvalidState unless C is Hermitian with spectrum in [-eps, 1+eps].
/// With `pure`, also requires the projector property.
void check_correlation(const CorrelationMatrix& c, bool pure = false);

/// Throws InvalidState unless V^dag V = 1 within `tolerance`.
void check_isometry(const OrbitalMatrix& v, double tolerance = tol::isometry);

/// Returns V^dag V - 1 in max norm.
double isometry_defect(const OrbitalMatrix& v);

/// C = conj(V V^dag), i.e. C_nm = sum_k conj(V_nk) V_mk.
CorrelationMatrix c_from_orbitals(const OrbitalMatrix& v);

MajoranaCovariance gamma_from_c(const CorrelationMatrix& c);

/// Inverse of gamma_from_c (reads the blocks back without further checks).
CorrelationMatrix c_from_gamma(const MajoranaCovariance& g);

/// W with Gamma = tan(W / 2) as matrix functions (blockwise tanh on the
/// canonical 2x2 form). Only defined for strictly mixed states.
GaussianExponent w_from_gamma(const MajoranaCovariance& g);

/// Gamma = tan(W / 2); the inverse of w_from_gamma.
MajoranaCovariance gamma_from_w(const GaussianExponent& w);

/// ln Z(W) = 1/2 sum over all 2L eigenvalues lambda of iW of ln(2 cosh(lambda/2)).
double log_partition(const GaussianExponent& w);

/// ln Z(W'') for the combined exponent exp(iW'') = exp(iW_a) exp(iW_b).
double log_partition_product(const GaussianExponent& wa, const GaussianExponent& wb);

/// Tr(rho_a rho_b) = det(1 - Ca - Cb + 2 Ca Cb). Always real for valid inputs.
double overlap_c(const CorrelationMatrix& ca, const CorrelationMatrix& cb);

/// Same as overlap_c but in log form, for overlaps that underflow a double.
SignedLogDet<double> log_overlap_c(const CorrelationMatrix& ca, const CorrelationMatrix& cb);

/// Tr(rho_a rho_b) = sqrt(det((1 - Ga Gb) / 2)) in the real convention
/// (the Hermitian convention writes the same quantity as det((1 + Ga Gb)/2)).
double overlap_gamma(const MajoranaCovariance& ga, const MajoranaCovariance& gb);

/// det((1 - Ga Gb) / 2) without the square root.
double overlap_gamma_squared(const MajoranaCovariance& ga, const MajoranaCovariance& gb);

/// Principal submatrix on `keep`: the correlation matrix of the marginal.
CorrelationMatrix reduce(const CorrelationMatrix& c, const ModeSubset& keep);

/// Restores exact Hermiticity, warning when the correction exceeds 1e-8.
void symmetrize(MatrixXc& c);

}  // namespace fnm
