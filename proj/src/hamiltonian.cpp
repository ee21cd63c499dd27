// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/hamiltonian.hpp"

#include <cmath>
#include <string>

namespace lecho {

std::string_view to_string(TermKind k) {
  switch (k) {
    case TermKind::zz: return "zz";
    case TermKind::flipflop: return "flipflop";
    case TermKind::double_quantum: return "double_quantum";
  }
  return "?";
}

SpinHamiltonian::SpinHamiltonian(int n_sites, std::vector<TwoBodyTerm> terms)
    : n_sites_(n_sites), terms_(std::move(terms)) {
  if (n_sites < 1 || n_sites > 62) throw std::invalid_argument("n_sites must lie in [1, 62]");
  for (const TwoBodyTerm& t : terms_) {
    if (t.i < 0 || t.j < 0 || t.i >= n_sites || t.j >= n_sites)
      throw std::invalid_argument("term site index out of range");
    if (t.i == t.j) throw std::invalid_argument("two-body term needs i != j");
    if (!std::isfinite(t.coeff)) throw std::invalid_argument("term coefficient is not finite");
    if (t.kind == TermKind::double_quantum) conserves_mz_ = false;
  }
}

SpinHamiltonian dipolar(int n_sites, const BondList& bonds, double j0) {
  std::vector<TwoBodyTerm> terms;
  terms.reserve(2 * bonds.size());
  for (const Bond& b : bonds) {
    terms.push_back({TermKind::zz, b.i, b.j, 2.0 * j0});
    terms.push_back({TermKind::flipflop, b.i, b.j, -j0});
  }
  return SpinHamiltonian(n_sites, std::move(terms));
}

SpinHamiltonian double_quantum(int n_sites, const BondList& bonds, double j0) {
  std::vector<TwoBodyTerm> terms;
  terms.reserve(bonds.size());
  for (const Bond& b : bonds) terms.push_back({TermKind::double_quantum, b.i, b.j, j0});
  return SpinHamiltonian(n_sites, std::move(terms));
}

SpinHamiltonian combine(std::span<const ScaledPart> parts) {
  if (parts.empty()) throw std::invalid_argument("combine needs at least one part");
  const int n = parts.front().h.n_sites();
  std::vector<TwoBodyTerm> terms;
  for (const ScaledPart& p : parts) {
    if (p.h.n_sites() != n)
      throw std::invalid_argument("combine: parts act on " + std::to_string(n) + " and " +
                                  std::to_string(p.h.n_sites()) + " sites");
    for (TwoBodyTerm t : p.h.terms()) {
      t.coeff *= p.scale;
      terms.push_back(t);
    }
  }
  return SpinHamiltonian(n, std::move(terms));
}

SpinHamiltonian combine(std::initializer_list<ScaledPart> parts) {
  return combine(std::span<const ScaledPart>(parts.begin(), parts.size()));
}

SpinHamiltonian operator*(double scale, const SpinHamiltonian& h) { return combine({{h, scale}}); }
SpinHamiltonian operator+(const SpinHamiltonian& a, const SpinHamiltonian& b) {
  return combine({{a, 1.0}, {b, 1.0}});
}
SpinHamiltonian operator-(const SpinHamiltonian& h) { return combine({{h, -1.0}}); }

void apply_add(const SpinHamiltonian& h, std::span<const std::complex<double>> psi,
               std::span<std::complex<double>> out) {
  const std::size_t dim = std::size_t{1} << h.n_sites();
  if (psi.size() != dim || out.size() != dim)
    throw std::invalid_argument("apply: vector length does not match 2^n_sites");
  for (const TwoBodyTerm& t : h.terms()) {
    const std::uint64_t mi = std::uint64_t{1} << t.i;
    const std::uint64_t mj = std::uint64_t{1} << t.j;
    const std::uint64_t both = mi | mj;
    switch (t.kind) {
      case TermKind::zz: {
        const double q = 0.25 * t.coeff;
        for (std::uint64_t k = 0; k < dim; ++k) {
          const bool aligned = ((k & mi) != 0) == ((k & mj) != 0);
          out[k] += (aligned ? q : -q) * psi[k];
        }
        break;
      }
      case TermKind::flipflop: {
        const double half = 0.5 * t.coeff;
        for (std::uint64_t k = 0; k < dim; ++k)
          if (((k & mi) != 0) != ((k & mj) != 0)) out[k ^ both] += half * psi[k];
        break;
      }
      case TermKind::double_quantum: {
        const double half = 0.5 * t.coeff;
        for (std::uint64_t k = 0; k < dim; ++k)
          if (((k & mi) != 0) == ((k & mj) != 0)) out[k ^ both] += half * psi[k];
        break;
      }
    }
  }
}

}  // namespace lecho
