#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fnm/core.hpp"
#include "fnm/gaussian.hpp"

namespace fnm {

/// Chains present in the model. Modes are ordered chain-major: all S sites,
/// then A (if present), then B (if present), site-minor within a chain.
enum class Layout { SOnly, SB, SAB };

/// Which chain carries the dephasing operators sqrt(gamma) n_i.
enum class DephasingTarget { Auto, S, B };

Layout parse_layout(std::string_view name);
std::string to_string(Layout layout);
DephasingTarget parse_dephasing(std::string_view name);
std::string to_string(DephasingTarget target);

struct ModelParams {
  int L = 2;
  double t_par = 1.0;
  double t_perp = 1.0;
  double gamma = 1.0;
  Layout layout = Layout::SB;
  DephasingTarget dephasing = DephasingTarget::Auto;
  bool periodic = false;
};

struct LatticeModel {
  ModelParams params;
  /// Single-particle Hamiltonian: H = sum_nm h_nm c_n^dag c_m.
  MatrixXc h;
  std::vector<Index> dissipative_sites;

  Index modes() const noexcept { return h.rows(); }
  int L() const noexcept { return params.L; }
  bool has_a() const noexcept { return params.layout == Layout::SAB; }
  bool has_b() const noexcept { return params.layout != Layout::SOnly; }

  Index s_mode(int site) const { return site; }
  Index a_mode(int site) const { return params.L + site; }
  Index b_mode(int site) const { return params.L * (has_a() ? 2 : 1) + site; }

  ModeSubset s_modes() const { return ModeSubset::range(0, params.L, modes()); }
  ModeSubset a_modes() const;
  ModeSubset b_modes() const;
  ModeSubset sa_modes() const { return ModeSubset::range(0, params.L * (has_a() ? 2 : 1), modes()); }
};

/// Assembles the two-chain hopping Hamiltonian with open boundaries (or
/// periodic when requested). The A chain is idle: no hopping, no dissipation.
LatticeModel build_model(const ModelParams& params);

/// Parses a "1010"-style occupation string into a bit pattern.
std::vector<bool> parse_pattern(std::string_view text);
std::string pattern_string(const std::vector<bool>& pattern);

/// Fock product state: one standard-basis orbital per occupied mode.
OrbitalMatrix initial_product_state(const std::vector<bool>& pattern);

/// Occupation pattern for the B chain at preparation time.
enum class BathFilling { Empty, Neel, Full };
BathFilling parse_bath_filling(std::string_view name);
std::string to_string(BathFilling filling);
std::vector<bool> bath_pattern(int L, BathFilling filling);

/// Full-model product state: `s_pattern` on S, A empty, `bath` on B.
std::vector<bool> embed_pattern(const LatticeModel& model, const std::vector<bool>& s_pattern,
                                BathFilling bath = BathFilling::Empty);

/// Product over sites of (|1_S 0_A> + |0_S 1_A>)/sqrt(2), with B as `bath`.
OrbitalMatrix bell_pairs(const LatticeModel& model, BathFilling bath = BathFilling::Empty);

/// Neel pattern 1010..., anti-Neel 0101..., and half-filled domain walls.
std::vector<bool> neel_pattern(int L);
std::vector<bool> anti_neel_pattern(int L);
std::vector<bool> left_domain_wall(int L);
std::vector<bool> right_domain_wall(int L);

}  // namespace fnm
