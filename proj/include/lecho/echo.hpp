// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lecho/hamiltonian.hpp"
#include "lecho/lattice.hpp"
#include "lecho/propagator.hpp"
#include "lecho/statevec.hpp"

namespace lecho {

/// typicality: random-phase states over the site-0-up half of the basis.
/// exact_ensemble: every basis state with site 0 up (n <= 12).
/// sampled_ensemble: n_samples such basis states drawn without replacement.
enum class Estimator { typicality, exact_ensemble, sampled_ensemble };

/// Generator of the preparation stage. double_quantum mixes m_z sectors;
/// dipolar is the m_z-conserving variant.
enum class Preparation { double_quantum, dipolar };

std::string_view to_string(Estimator e);
std::string_view to_string(Preparation p);
Estimator parse_estimator(std::string_view s);
Preparation parse_preparation(std::string_view s);

inline constexpr int kExactEnsembleMaxSites = 12;

/**
 * One echo experiment. Times are total echo times t = 2 t_R in units of
 * hbar/J0. The forward generator is H0 + lambda H_nnn and the backward one
 * -H0 + lambda H_nnn, with H0 the nearest-neighbour dipolar coupling and
 * H_nnn the next-nearest one. The preparation generator is
 * (H_nn + H_nnn) / sqrt(2) built from the chosen coupling kind.
 */
struct EchoProtocol {
  int lx = 4;
  int ly = 4;
  Boundary boundary = Boundary::periodic;
  double lambda = 0.1;
  double j0 = 1.0;
  std::vector<double> times;
  double t_p = 0.0;
  Preparation preparation = Preparation::double_quantum;
  int n_samples = 1;
  std::uint64_t seed = 1;
  PropagationSettings propagation;
  Estimator estimator = Estimator::typicality;
  /// Worker count; 0 means hardware concurrency. Results do not depend on it.
  int threads = 0;

  int n_sites() const noexcept { return lx * ly; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Stable textual form of every field that affects results.
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
};

struct EchoModel {
  Lattice lattice;
  SpinHamiltonian h0;
  SpinHamiltonian sigma;
  SpinHamiltonian forward;
  SpinHamiltonian backward;
  SpinHamiltonian prep;

  static EchoModel build(const EchoProtocol& p);
};

struct SeriesMetadata {
  std::string observable;
  std::string estimator;
  int n_samples = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::string order;
  std::string integrator;
  double t_p = 0.0;
  double lambda = 0.0;
  std::string protocol_hash;
  std::size_t norm_corrections = 0;
};

/// Time-indexed observable with its standard error across realizations
/// (zero for exact estimators).
struct Series {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> std_error;
  SeriesMetadata meta;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws std::logic_error if lengths differ or an error bar is negative.
  void check() const;
};

/// Polarization echo M11(t) at site 0, without preparation.
Series local_le(const EchoProtocol& p);

/// Dynamically prepared echo M11(t, t_p): prepare for t_p, echo, undo the
/// preparation exactly, read site 0. At t_p = 0 this is local_le bit for bit.
Series dple(const EchoProtocol& p);

struct Decomposition {
  Series m11;
  Series mb;
  Series mx;
};

/**
 * M11 split into the return probability M_MB and the cross term M_X, from
 * the echoed basis state phi_i = U|i>:
 *   M_MB_i = |phi_i(i)|^2,  M_X_i = (P_A - M_MB_i) - P_B,  M11_i = P_A - P_B
 * where P_A, P_B are the probability masses with site 0 up and down. With
 * t_p > 0, U is U_p^dag U_LE U_p. Ensemble estimators only.
 */
Decomposition mb_and_x(const EchoProtocol& p);

/// M_MB(t, t_p) as the mean of |<Psi_i|U_LE|Psi_i>|^2 with Psi_i = U_p|i>.
/// Needs no unpreparation; ensemble estimators only.
Series many_body_le(const EchoProtocol& p);

/// P11(t_p) = 2 <S^z_0> after forward preparation only, on the given grid.
Series forward_p11(const EchoProtocol& p, std::span<const double> prep_times);

/// |<Phi|U_LE(t)|Phi>|^2 with Phi a random-phase state over the full basis.
Series global_overlap_le(const EchoProtocol& p);

/// |<Phi_m|U|Phi_m>|^2 for every m_z sector, obtained from one full-space
/// random-phase reference and its echoed image (U must conserve m_z).
/// Index s corresponds to 2 m_z = 2 s - n.
std::vector<double> sector_return_probabilities(const StateVector& reference, const StateVector& echoed);

/**
 * (1 - m_inf) sum_m D_m |<Phi_m|U_LE(t)|Phi_m>|^2 + m_inf, with D_m the
 * relative sector dimension. Throws std::invalid_argument if the echo
 * generators do not conserve m_z.
 */
Series subspace_dple(const EchoProtocol& p, double m_inf);

}  // namespace lecho
