// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lecho/lattice.hpp"

namespace lecho {

/**
 * Two-body spin couplings, all in units of J0:
 *   zz              S^z_i S^z_j
 *   flipflop        S^x_i S^x_j + S^y_i S^y_j   = (S+_i S-_j + S-_i S+_j) / 2
 *   double_quantum  S^x_i S^x_j - S^y_i S^y_j   = (S+_i S+_j + S-_i S-_j) / 2
 */
enum class TermKind : std::uint8_t { zz, flipflop, double_quantum };

std::string_view to_string(TermKind k);

struct TwoBodyTerm {
  TermKind kind = TermKind::zz;
  int i = 0;
  int j = 1;
  double coeff = 0.0;
};

/**
 * Hermitian sum of two-body terms on n_sites spin-1/2.
 *
 * Term order is part of the contract: the Trotter plan colours site pairs in
 * order of first appearance, so the same term list always yields the same
 * splitting. Builders emit terms bond by bond, zz before flipflop.
 */
class SpinHamiltonian {
 public:
  SpinHamiltonian() = default;
  SpinHamiltonian(int n_sites, std::vector<TwoBodyTerm> terms);

  int n_sites() const noexcept { return n_sites_; }
  std::span<const TwoBodyTerm> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  /// True iff no double-quantum term is present.
  bool conserves_mz() const noexcept { return conserves_mz_; }

 private:
  int n_sites_ = 0;
  std::vector<TwoBodyTerm> terms_;
  bool conserves_mz_ = true;
};

/// Truncated dipolar coupling J0 [2 S^z S^z - (S^x S^x + S^y S^y)] on every bond.
SpinHamiltonian dipolar(int n_sites, const BondList& bonds, double j0 = 1.0);

/// Double-quantum coupling J0 (S^x S^x - S^y S^y) on every bond.
SpinHamiltonian double_quantum(int n_sites, const BondList& bonds, double j0 = 1.0);

struct ScaledPart {
  const SpinHamiltonian& h;
  double scale;
};

/// Concatenates scaled term lists. Throws std::invalid_argument on mismatched n_sites.
SpinHamiltonian combine(std::span<const ScaledPart> parts);
SpinHamiltonian combine(std::initializer_list<ScaledPart> parts);

SpinHamiltonian operator*(double scale, const SpinHamiltonian& h);
SpinHamiltonian operator+(const SpinHamiltonian& a, const SpinHamiltonian& b);
SpinHamiltonian operator-(const SpinHamiltonian& h);

/// Adds (H psi) into out. Basis index bit b is site b, set bit = spin up.
void apply_add(const SpinHamiltonian& h, std::span<const std::complex<double>> psi,
               std::span<std::complex<double>> out);

/// Matrix-free H|psi>. Throws std::invalid_argument on a dimension mismatch.
template <typename Derived>
Eigen::VectorXcd apply(const SpinHamiltonian& h, const Eigen::MatrixBase<Derived>& psi) {
  const Eigen::Index dim = Eigen::Index{1} << h.n_sites();
  if (psi.size() != dim) throw std::invalid_argument("apply: vector length does not match 2^n_sites");
  const Eigen::VectorXcd in = psi;  // materialize expressions
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
  apply_add(h, {in.data(), static_cast<std::size_t>(dim)}, {out.data(), static_cast<std::size_t>(dim)});
  return out;
}

/// Dense matrix assembled column by column from the matrix-free action.
/// All term kinds have real matrix elements, so Scalar may be real.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble(const SpinHamiltonian& h) {
  const Eigen::Index dim = Eigen::Index{1} << h.n_sites();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(dim, dim);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    e.setZero();
    e[c] = 1.0;
    const Eigen::VectorXcd col = lecho::apply(h, e);
    if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
      m.col(c) = col;
    } else {
      m.col(c) = col.real();
    }
  }
  return m;
}

}  // namespace lecho
