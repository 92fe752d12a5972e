#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fnm {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using MatrixXc = Matrix<cplx>;
using VectorXd = Vector<double>;
using VectorXc = Vector<cplx>;

enum class ErrorKind {
  InvalidState,
  Shape,
  SingularState,
  NumericalDegeneracy,
  NumericalInstability,
  ImpossibleOutcome,
  IntegrationFailure,
  Config,
  Catalog,
  Resource,
  InsufficientData,
  Usage,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Ordered set of retained mode indices. Always strictly increasing.
class ModeSubset {
 public:
  ModeSubset() = default;
  /// Throws Shape if `indices` is not strictly increasing or leaves [0, modes).
  ModeSubset(std::vector<Index> indices, Index modes);

  static ModeSubset range(Index first, Index count, Index modes);
  static ModeSubset all(Index modes) { return range(0, modes, modes); }

  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  Index operator[](Index k) const { return indices_[static_cast<std::size_t>(k)]; }
  bool contains(Index mode) const;
  /// Position of `mode` inside this subset, or -1.
  Index position(Index mode) const;
  /// Union with another subset of the same mode space.
  ModeSubset merged(const ModeSubset& other, Index modes) const;

  friend bool operator==(const ModeSubset&, const ModeSubset&) = default;

 private:
  std::vector<Index> indices_;
};

/// Emits a one-line warning on stderr (used for soft numerical diagnostics).
void warn(const std::string& message);

/// Number of warnings emitted so far in this process.
std::size_t warning_count();

}  // namespace fnm
