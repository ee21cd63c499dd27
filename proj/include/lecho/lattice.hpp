// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <string_view>
#include <vector>

namespace lecho {

/// cylinder wraps along x only; every site of an lx x 2 cylinder has the
/// same number of diagonal neighbours.
enum class Boundary { periodic, open, cylinder };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view s);

/// Unordered site pair stored canonically with i < j.
struct Bond {
  int i = 0;
  int j = 0;
  auto operator<=>(const Bond&) const = default;
};

using BondList = std::vector<Bond>;

/// Memory guard on lattice size: 2^24 amplitudes is 256 MiB per state vector.
inline constexpr int kDefaultMaxSites = 24;

/**
 * Square lattice with row-major site numbering (site = y * lx + x).
 *
 * bonds_nn holds horizontal and vertical neighbours, bonds_nnn the two
 * diagonals. Both lists are canonical (i < j) and sorted. Site 0 is the
 * injected and measured spin.
 */
class Lattice {
 public:
  Lattice(int lx, int ly, Boundary boundary, BondList nn, BondList nnn);

  int lx() const noexcept { return lx_; }
  int ly() const noexcept { return ly_; }
  int n_sites() const noexcept { return lx_ * ly_; }
  Boundary boundary() const noexcept { return boundary_; }
  const BondList& bonds_nn() const noexcept { return nn_; }
  const BondList& bonds_nnn() const noexcept { return nnn_; }

  int site(int x, int y) const noexcept { return y * lx_ + x; }

 private:
  int lx_;
  int ly_;
  Boundary boundary_;
  BondList nn_;
  BondList nnn_;
};

/// Throws std::invalid_argument for wrapped sides shorter than 3 (bonds
/// would repeat) or when lx * ly exceeds max_sites.
Lattice build_lattice(int lx, int ly, Boundary boundary, int max_sites = kDefaultMaxSites);

/// Sorts and canonicalizes pairs; rejects self-pairs, out-of-range sites and duplicates.
BondList canonical_bonds(BondList bonds, int n_sites);

}  // namespace lecho
