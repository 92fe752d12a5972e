#include "fnm/core.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>

namespace fnm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidState: return "invalid state";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::SingularState: return "singular state";
    case ErrorKind::NumericalDegeneracy: return "numerical degeneracy";
    case ErrorKind::NumericalInstability: return "numerical instability";
    case ErrorKind::ImpossibleOutcome: return "impossible outcome";
    case ErrorKind::IntegrationFailure: return "integration failure";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Catalog: return "catalog error";
    case ErrorKind::Resource: return "resource error";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::Usage: return "usage error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

ModeSubset::ModeSubset(std::vector<Index> indices, Index modes) : indices_(std::move(indices)) {
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] < 0 || indices_[k] >= modes)
      throw Error(ErrorKind::Shape, "mode index " + std::to_string(indices_[k]) + " outside [0, " +
                                        std::to_string(modes) + ")");
    if (k > 0 && indices_[k] <= indices_[k - 1])
      throw Error(ErrorKind::Shape, "mode subset must be strictly increasing");
  }
}

ModeSubset ModeSubset::range(Index first, Index count, Index modes) {
  std::vector<Index> idx(static_cast<std::size_t>(std::max<Index>(count, 0)));
  for (Index k = 0; k < count; ++k) idx[static_cast<std::size_t>(k)] = first + k;
  return ModeSubset(std::move(idx), modes);
}

bool ModeSubset::contains(Index mode) const { return position(mode) >= 0; }

Index ModeSubset::position(Index mode) const {
  const auto it = std::lower_bound(indices_.begin(), indices_.end(), mode);
  if (it == indices_.end() || *it != mode) return -1;
  return static_cast<Index>(it - indices_.begin());
}

ModeSubset ModeSubset::merged(const ModeSubset& other, Index modes) const {
  std::vector<Index> out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(out));
  return ModeSubset(std::move(out), modes);
}

namespace {
std::atomic<std::size_t> g_warnings{0};
}

void warn(const std::string& message) {
  ++g_warnings;
  std::cerr << "fnm warning: " << message << '\n';
}

std::size_t warning_count() { return g_warnings.load(); }

}  // namespace fnm
