#include "fnm/lattice.hpp"

#include <cctype>
#include <cmath>

namespace fnm {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Layout parse_layout(std::string_view text) {
  const std::string name = upper(text);
  if (name == "S" || name == "S-ONLY") return Layout::SOnly;
  if (name == "SB" || name == "S+B") return Layout::SB;
  if (name == "SAB" || name == "S+A+B") return Layout::SAB;
  throw Error(ErrorKind::Config, "unknown layout '" + std::string(text) + "' (expected S, SB or SAB)");
}

std::string to_string(Layout layout) {
  switch (layout) {
    case Layout::SOnly: return "S";
    case Layout::SB: return "SB";
    case Layout::SAB: return "SAB";
  }
  return "?";
}

DephasingTarget parse_dephasing(std::string_view text) {
  const std::string name = upper(text);
  if (name == "AUTO") return DephasingTarget::Auto;
  if (name == "S") return DephasingTarget::S;
  if (name == "B") return DephasingTarget::B;
  throw Error(ErrorKind::Config, "unknown dephasing target '" + std::string(text) + "' (expected auto, S or B)");
}

std::string to_string(DephasingTarget target) {
  switch (target) {
    case DephasingTarget::Auto: return "auto";
    case DephasingTarget::S: return "S";
    case DephasingTarget::B: return "B";
  }
  return "?";
}

ModeSubset LatticeModel::a_modes() const {
  if (!has_a()) return {};
  return ModeSubset::range(params.L, params.L, modes());
}

ModeSubset LatticeModel::b_modes() const {
  if (!has_b()) return {};
  return ModeSubset::range(b_mode(0), params.L, modes());
}

LatticeModel build_model(const ModelParams& params) {
  if (params.L < 1) throw Error(ErrorKind::Config, "L must be at least 1");
  if (params.gamma < 0.0) throw Error(ErrorKind::Config, "gamma must be non-negative");
  LatticeModel model;
  model.params = params;
  const int L = params.L;
  const int chains = params.layout == Layout::SOnly ? 1 : (params.layout == Layout::SB ? 2 : 3);
  const Index modes = static_cast<Index>(chains) * L;
  model.h = MatrixXc::Zero(modes, modes);

  auto bond = [&](Index a, Index b, double t) {
    model.h(a, b) += -t;
    model.h(b, a) += -t;
  };
  auto chain = [&](auto mode_of) {
    for (int i = 0; i + 1 < L; ++i) bond(mode_of(i), mode_of(i + 1), params.t_par);
    if (params.periodic && L > 2) bond(mode_of(L - 1), mode_of(0), params.t_par);
  };
  chain([&](int i) { return model.s_mode(i); });
  if (model.has_b()) {
    chain([&](int i) { return model.b_mode(i); });
    for (int i = 0; i < L; ++i) bond(model.s_mode(i), model.b_mode(i), params.t_perp);
  }

  DephasingTarget target = params.dephasing;
  if (target == DephasingTarget::Auto) target = model.has_b() ? DephasingTarget::B : DephasingTarget::S;
  if (target == DephasingTarget::B && !model.has_b())
    throw Error(ErrorKind::Config, "dephasing on B requested but the layout has no B chain");
  if (params.gamma > 0.0) {
    for (int i = 0; i < L; ++i)
      model.dissipative_sites.push_back(target == DephasingTarget::B ? model.b_mode(i) : model.s_mode(i));
  }
  model.params.dephasing = target;
  return model;
}

std::vector<bool> parse_pattern(std::string_view text) {
  std::vector<bool> out;
  out.reserve(text.size());
  for (char ch : text) {
    if (ch == '1') out.push_back(true);
    else if (ch == '0') out.push_back(false);
    else throw Error(ErrorKind::Config, "occupation pattern must contain only 0/1: '" + std::string(text) + "'");
  }
  return out;
}

std::string pattern_string(const std::vector<bool>& pattern) {
  std::string s;
  for (bool b : pattern) s.push_back(b ? '1' : '0');
  return s;
}

OrbitalMatrix initial_product_state(const std::vector<bool>& pattern) {
  const Index modes = static_cast<Index>(pattern.size());
  Index particles = 0;
  for (bool b : pattern) particles += b ? 1 : 0;
  OrbitalMatrix v{MatrixXc::Zero(modes, particles)};
  Index col = 0;
  for (Index n = 0; n < modes; ++n)
    if (pattern[static_cast<std::size_t>(n)]) v.entries(n, col++) = 1.0;
  return v;
}

BathFilling parse_bath_filling(std::string_view name) {
  if (name == "empty") return BathFilling::Empty;
  if (name == "neel") return BathFilling::Neel;
  if (name == "full") return BathFilling::Full;
  throw Error(ErrorKind::Config, "unknown bath filling '" + std::string(name) + "' (expected empty, neel or full)");
}

std::string to_string(BathFilling filling) {
  switch (filling) {
    case BathFilling::Empty: return "empty";
    case BathFilling::Neel: return "neel";
    case BathFilling::Full: return "full";
  }
  return "?";
}

std::vector<bool> bath_pattern(int L, BathFilling filling) {
  switch (filling) {
    case BathFilling::Empty: return std::vector<bool>(static_cast<std::size_t>(L), false);
    case BathFilling::Full: return std::vector<bool>(static_cast<std::size_t>(L), true);
    case BathFilling::Neel: return neel_pattern(L);
  }
  return {};
}

std::vector<bool> embed_pattern(const LatticeModel& model, const std::vector<bool>& s_pattern, BathFilling bath) {
  if (static_cast<int>(s_pattern.size()) != model.L())
    throw Error(ErrorKind::Config, "S pattern length " + std::to_string(s_pattern.size()) + " differs from L = " +
                                       std::to_string(model.L()));
  std::vector<bool> full(static_cast<std::size_t>(model.modes()), false);
  for (int i = 0; i < model.L(); ++i) full[static_cast<std::size_t>(model.s_mode(i))] = s_pattern[static_cast<std::size_t>(i)];
  if (model.has_b()) {
    const auto b = bath_pattern(model.L(), bath);
    for (int i = 0; i < model.L(); ++i) full[static_cast<std::size_t>(model.b_mode(i))] = b[static_cast<std::size_t>(i)];
  }
  return full;
}

OrbitalMatrix bell_pairs(const LatticeModel& model, BathFilling bath) {
  if (!model.has_a()) throw Error(ErrorKind::Config, "bell_pairs requires a layout with an A chain");
  const int L = model.L();
  const auto b = bath_pattern(L, bath);
  Index b_particles = 0;
  for (bool x : b) b_particles += x ? 1 : 0;
  OrbitalMatrix v{MatrixXc::Zero(model.modes(), L + b_particles)};
  const double amp = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < L; ++i) {
    v.entries(model.s_mode(i), i) = amp;
    v.entries(model.a_mode(i), i) = amp;
  }
  Index col = L;
  for (int i = 0; i < L; ++i)
    if (b[static_cast<std::size_t>(i)]) v.entries(model.b_mode(i), col++) = 1.0;
  return v;
}

std::vector<bool> neel_pattern(int L) {
  std::vector<bool> p(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) p[static_cast<std::size_t>(i)] = (i % 2 == 0);
  return p;
}

std::vector<bool> anti_neel_pattern(int L) {
  std::vector<bool> p(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) p[static_cast<std::size_t>(i)] = (i % 2 == 1);
  return p;
}

std::vector<bool> left_domain_wall(int L) {
  std::vector<bool> p(static_cast<std::size_t>(L), false);
  for (int i = 0; i < L / 2; ++i) p[static_cast<std::size_t>(i)] = true;
  if (L == 1) p[0] = true;
  return p;
}

std::vector<bool> right_domain_wall(int L) {
  std::vector<bool> p(static_cast<std::size_t>(L), false);
  for (int i = L - L / 2; i < L; ++i) p[static_cast<std::size_t>(i)] = true;
  return p;
}

}  // namespace fnm
