#include "fnm/gaussian.hpp"

#include <Eigen/Eigenvalues>

namespace fnm {

namespace {

constexpr cplx kI{0.0, 1.0};

double max_abs(const auto& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ln(2 cosh(x)) without overflow.
double log_two_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax));
}

void require_square(const auto& m, const char* what) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Shape, std::string(what) + " must be square");
}

void require_antisymmetric(const MatrixXd& m, const char* what) {
  require_square(m, what);
  if (m.rows() % 2 != 0) throw Error(ErrorKind::Shape, std::string(what) + " must have even dimension");
  if (max_abs(m + m.transpose()) > tol::hermitian)
    throw Error(ErrorKind::InvalidState, std::string(what) + " is not antisymmetric");
}

Eigen::SelfAdjointEigenSolver<MatrixXc> hermitian_eigen(const MatrixXd& antisymmetric) {
  const MatrixXc h = kI * antisymmetric.cast<cplx>();
  return Eigen::SelfAdjointEigenSolver<MatrixXc>(h);
}

// Applies f to the spectrum of i*A (A real antisymmetric) and maps back to a
// real antisymmetric matrix: returns -i U f(mu) U^dag.
template <class F>
MatrixXd antisymmetric_function(const Eigen::SelfAdjointEigenSolver<MatrixXc>& es, F&& f) {
  const VectorXc values = es.eigenvalues().unaryExpr([&](double mu) { return cplx(f(mu)); });
  const MatrixXc& u = es.eigenvectors();
  const MatrixXc out = -kI * (u * values.asDiagonal() * u.adjoint());
  MatrixXd real = out.real();
  real = 0.5 * (real - real.transpose()).eval();
  return real;
}

}  // namespace

void check_correlation(const CorrelationMatrix& c, bool pure) {
  require_square(c.entries, "correlation matrix");
  const double herm = max_abs(c.entries - c.entries.adjoint());
  if (herm > tol::hermitian)
    throw Error(ErrorKind::InvalidState, "correlation matrix is not Hermitian (" + std::to_string(herm) + ")");
  if (c.dim() == 0) return;
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(c.entries, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() < -tol::spectrum || ev.maxCoeff() > 1.0 + tol::spectrum)
    throw Error(ErrorKind::InvalidState, "correlation spectrum leaves [0, 1]");
  if (pure && max_abs(c.entries * c.entries - c.entries) > tol::projector)
    throw Error(ErrorKind::InvalidState, "correlation matrix of a pure state is not a projector");
}

double isometry_defect(const OrbitalMatrix& v) {
  const Index n = v.particles();
  return max_abs(v.entries.adjoint() * v.entries - MatrixXc::Identity(n, n));
}

void check_isometry(const OrbitalMatrix& v, double tolerance) {
  const double defect = isometry_defect(v);
  if (defect > tolerance)
    throw Error(ErrorKind::InvalidState, "orbital matrix is not an isometry (defect " + std::to_string(defect) + ")");
}

CorrelationMatrix c_from_orbitals(const OrbitalMatrix& v) {
  check_isometry(v);
  CorrelationMatrix c{v.entries.conjugate() * v.entries.transpose()};
  symmetrize(c.entries);
  return c;
}

MajoranaCovariance gamma_from_c(const CorrelationMatrix& c) {
  require_square(c.entries, "correlation matrix");
  if (max_abs(c.entries - c.entries.adjoint()) > tol::hermitian)
    throw Error(ErrorKind::InvalidState, "correlation matrix is not Hermitian");
  const Index l = c.dim();
  MajoranaCovariance g{MatrixXd::Zero(2 * l, 2 * l)};
  for (Index n = 0; n < l; ++n) {
    for (Index m = 0; m < l; ++m) {
      const cplx gnm = 2.0 * c.entries(n, m) - (n == m ? 1.0 : 0.0);
      g.entries(2 * n, 2 * m) = -gnm.imag();
      g.entries(2 * n, 2 * m + 1) = gnm.real();
      g.entries(2 * n + 1, 2 * m) = -gnm.real();
      g.entries(2 * n + 1, 2 * m + 1) = -gnm.imag();
    }
  }
  return g;
}

CorrelationMatrix c_from_gamma(const MajoranaCovariance& g) {
  require_square(g.entries, "Majorana covariance");
  const Index l = g.modes();
  CorrelationMatrix c{MatrixXc(l, l)};
  for (Index n = 0; n < l; ++n) {
    for (Index m = 0; m < l; ++m) {
      const double re = g.entries(2 * n, 2 * m + 1) + (n == m ? 1.0 : 0.0);
      const double im = -g.entries(2 * n, 2 * m);
      c.entries(n, m) = 0.5 * cplx(re, im);
    }
  }
  return c;
}

GaussianExponent w_from_gamma(const MajoranaCovariance& g) {
  require_antisymmetric(g.entries, "Majorana covariance");
  const auto es = hermitian_eigen(g.entries);
  const double largest = es.eigenvalues().cwiseAbs().maxCoeff();
  if (largest > 1.0 - tol::singular_margin)
    throw Error(ErrorKind::SingularState,
                "Majorana covariance has a singular value within 1e-6 of 1 (pure mode); "
                "use the determinant-ratio overlaps instead of Z(W)");
  GaussianExponent w;
  w.entries = antisymmetric_function(es, [](double mu) { return 2.0 * std::atanh(mu); });
  double log_z = 0.0;
  for (Index k = 0; k < es.eigenvalues().size(); ++k) log_z += 0.5 * log_two_cosh(std::atanh(es.eigenvalues()(k)));
  w.log_z = log_z;
  return w;
}

MajoranaCovariance gamma_from_w(const GaussianExponent& w) {
  require_antisymmetric(w.entries, "Gaussian exponent");
  const auto es = hermitian_eigen(w.entries);
  return MajoranaCovariance{antisymmetric_function(es, [](double lambda) { return std::tanh(0.5 * lambda); })};
}

double log_partition(const GaussianExponent& w) {
  require_antisymmetric(w.entries, "Gaussian exponent");
  if (w.dim() == 0) return 0.0;
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(kI * w.entries.cast<cplx>(), Eigen::EigenvaluesOnly);
  double log_z = 0.0;
  for (Index k = 0; k < es.eigenvalues().size(); ++k) log_z += 0.5 * log_two_cosh(0.5 * es.eigenvalues()(k));
  return log_z;
}

double log_partition_product(const GaussianExponent& wa, const GaussianExponent& wb) {
  require_antisymmetric(wa.entries, "Gaussian exponent");
  require_antisymmetric(wb.entries, "Gaussian exponent");
  if (wa.dim() != wb.dim()) throw Error(ErrorKind::Shape, "exponent dimensions differ");
  auto exp_of = [](const MatrixXd& w) {
    const auto es = hermitian_eigen(w);
    const VectorXc e = es.eigenvalues().unaryExpr([](double x) { return cplx(std::exp(x)); });
    return MatrixXc(es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint());
  };
  const MatrixXc product = exp_of(wa.entries) * exp_of(wb.entries);
  // The product is similar to a positive matrix, so its spectrum is real positive.
  const Eigen::ComplexEigenSolver<MatrixXc> es(product, false);
  double log_z = 0.0;
  for (Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lambda = std::log(es.eigenvalues()(k).real());
    log_z += 0.5 * log_two_cosh(0.5 * lambda);
  }
  return log_z;
}

SignedLogDet<double> log_overlap_c(const CorrelationMatrix& ca, const CorrelationMatrix& cb) {
  require_square(ca.entries, "correlation matrix");
  if (ca.entries.rows() != cb.entries.rows() || ca.entries.cols() != cb.entries.cols())
    throw Error(ErrorKind::Shape, "overlap_c: dimension mismatch");
  MatrixXc m = 2.0 * (ca.entries * cb.entries);
  m -= ca.entries;
  m -= cb.entries;
  m.diagonal().array() += 1.0;
  const auto det = signed_log_det(m);
  SignedLogDet<double> out;
  out.log_abs = det.log_abs;
  out.phase = det.phase.real() >= 0.0 ? 1.0 : -1.0;
  return out;
}

double overlap_c(const CorrelationMatrix& ca, const CorrelationMatrix& cb) {
  require_square(ca.entries, "correlation matrix");
  if (ca.entries.rows() != cb.entries.rows() || ca.entries.cols() != cb.entries.cols())
    throw Error(ErrorKind::Shape, "overlap_c: dimension mismatch");
  return pair_overlap(ca.entries, cb.entries);
}

double overlap_gamma_squared(const MajoranaCovariance& ga, const MajoranaCovariance& gb) {
  require_square(ga.entries, "Majorana covariance");
  if (ga.dim() != gb.dim()) throw Error(ErrorKind::Shape, "overlap_gamma: dimension mismatch");
  MatrixXd m = -0.5 * (ga.entries * gb.entries);
  m.diagonal().array() += 0.5;
  return signed_log_det(m).value();
}

double overlap_gamma(const MajoranaCovariance& ga, const MajoranaCovariance& gb) {
  const double d = overlap_gamma_squared(ga, gb);
  if (d < -tol::negative_det)
    throw Error(ErrorKind::NumericalDegeneracy, "det((1 - Ga Gb)/2) is negative: " + std::to_string(d));
  return std::sqrt(std::max(d, 0.0));
}

CorrelationMatrix reduce(const CorrelationMatrix& c, const ModeSubset& keep) {
  const Index k = keep.size();
  for (Index idx : keep.indices())
    if (idx >= c.dim()) throw Error(ErrorKind::Shape, "reduce: mode index out of range");
  CorrelationMatrix out{MatrixXc(k, k)};
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) out.entries(i, j) = c.entries(keep[i], keep[j]);
  return out;
}

void symmetrize(MatrixXc& c) {
  const double defect = max_abs(c - c.adjoint());
  if (defect > 2e-8) warn("Hermiticity correction of " + std::to_string(0.5 * defect) + " applied");
  c = 0.5 * (c + c.adjoint()).eval();
}

}  // namespace fnm
