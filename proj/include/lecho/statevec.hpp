// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <filesystem>

namespace lecho {

using Amplitudes = Eigen::VectorXcd;

inline constexpr double kNormTolerance = 1e-9;

/**
 * Normalized vector of 2^n amplitudes over the Ising basis. Bit b of a
 * basis index is site b, a set bit is spin up.
 *
 * The constructor checks the norm; mutable access through amplitudes() is
 * meant for propagators, which re-check at segment boundaries.
 */
class StateVector {
 public:
  StateVector(int n, Amplitudes amp, double tolerance = kNormTolerance);

  int n() const noexcept { return n_; }
  std::uint64_t dim() const noexcept { return std::uint64_t{1} << n_; }
  const Amplitudes& amplitudes() const noexcept { return amp_; }
  Amplitudes& amplitudes() noexcept { return amp_; }
  double norm() const { return amp_.norm(); }

 private:
  int n_;
  Amplitudes amp_;
};

/**
 * Basis-index predicate. fixed_mz stores twice the projection so that
 * half-integer m_z (odd n) is exact.
 */
struct SectorSpec {
  enum class Mode { site0_up, site0_down, fixed_mz, full };

  Mode mode = Mode::full;
  int two_mz = 0;

  static SectorSpec site0_up() { return {Mode::site0_up, 0}; }
  static SectorSpec site0_down() { return {Mode::site0_down, 0}; }
  static SectorSpec full() { return {Mode::full, 0}; }
  static SectorSpec fixed_mz(int two_mz) { return {Mode::fixed_mz, two_mz}; }

  bool contains(std::uint64_t index, int n) const noexcept {
    switch (mode) {
      case Mode::site0_up: return (index & 1U) != 0;
      case Mode::site0_down: return (index & 1U) == 0;
      case Mode::fixed_mz: return 2 * std::popcount(index) - n == two_mz;
      case Mode::full: return true;
    }
    return false;
  }

  std::uint64_t dimension(int n) const;
};

/// Twice the total z projection of a basis state: 2 m_z = 2 popcount - n.
inline int two_mz_of(std::uint64_t index, int n) noexcept { return 2 * std::popcount(index) - n; }

StateVector basis_state(int n, std::uint64_t index);

/**
 * Random-phase superposition exp(-i phi_k) / sqrt(dim) over the sector.
 * phi_k = 2 pi u_k with u_k the k-th draw (k = basis index) of the counter
 * stream keyed by `seed`, so the state is reproducible bit for bit.
 */
StateVector random_phase_state(int n, SectorSpec sector, std::uint64_t seed);

/// 2 <S^z_site>, computed as (P_up - P_down) / (P_up + P_down).
double local_polarization(const StateVector& psi, int site);

/// Sum over sites of 2 <S^z_i>.
double total_polarization(const StateVector& psi);

/// <psi|phi>, conjugating the first argument.
std::complex<double> overlap(const StateVector& psi, const StateVector& phi);

/// Probability mass of psi inside the sector.
double sector_probability(const StateVector& psi, SectorSpec sector);

/// Relative dimension D_{m_z} = C(n, n/2 + m_z) / 2^n, m_z given as 2 m_z.
double sector_weight(int n, int two_mz);

/// Binary dump: "SPEC", u32 version, u32 n, u32 reserved, then 2^n (re, im)
/// f64 pairs, all little-endian.
void write_state(const StateVector& psi, const std::filesystem::path& path);
StateVector read_state(const std::filesystem::path& path);

}  // namespace lecho
