// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/lattice.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lecho {

std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::open: return "open";
    case Boundary::cylinder: return "cylinder";
  }
  return "?";
}

Boundary parse_boundary(std::string_view s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  if (s == "cylinder") return Boundary::cylinder;
  throw std::invalid_argument("unknown boundary '" + std::string(s) + "' (expected periodic|open|cylinder)");
}

Lattice::Lattice(int lx, int ly, Boundary boundary, BondList nn, BondList nnn)
    : lx_(lx), ly_(ly), boundary_(boundary), nn_(std::move(nn)), nnn_(std::move(nnn)) {
  nn_ = canonical_bonds(std::move(nn_), n_sites());
  nnn_ = canonical_bonds(std::move(nnn_), n_sites());
  for (const Bond& b : nnn_) {
    if (std::binary_search(nn_.begin(), nn_.end(), b))
      throw std::invalid_argument("bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                                  ") is both nearest and next-nearest");
  }
}

BondList canonical_bonds(BondList bonds, int n_sites) {
  for (Bond& b : bonds) {
    if (b.i < 0 || b.j < 0 || b.i >= n_sites || b.j >= n_sites)
      throw std::invalid_argument("bond site index out of range");
    if (b.i == b.j) throw std::invalid_argument("bond joins a site to itself");
    if (b.i > b.j) std::swap(b.i, b.j);
  }
  std::sort(bonds.begin(), bonds.end());
  if (std::adjacent_find(bonds.begin(), bonds.end()) != bonds.end())
    throw std::invalid_argument("duplicate bond");
  return bonds;
}

Lattice build_lattice(int lx, int ly, Boundary boundary, int max_sites) {
  if (lx < 1 || ly < 1) throw std::invalid_argument("lattice sides must be >= 1");
  if (boundary == Boundary::periodic && (lx < 3 || ly < 3))
    throw std::invalid_argument(
        "periodic boundaries need lx >= 3 and ly >= 3; shorter sides wrap onto duplicate bonds");
  if (boundary == Boundary::cylinder && lx < 3)
    throw std::invalid_argument("cylinder boundaries need lx >= 3; a shorter side wraps onto duplicate bonds");
  if (static_cast<long long>(lx) * ly > max_sites)
    throw std::invalid_argument("lattice has " + std::to_string(lx * ly) +
                                " sites, above the configured maximum of " +
                                std::to_string(max_sites));

  const bool wrap_x = boundary != Boundary::open;
  const bool wrap_y = boundary == Boundary::periodic;
  const auto site = [lx](int x, int y) { return y * lx + x; };
  // Returns false when the displaced coordinate falls off an open edge.
  const auto shift = [&](int x, int y, int dx, int dy, int& out) {
    int nx = x + dx;
    int ny = y + dy;
    if (wrap_x) nx = (nx % lx + lx) % lx;
    if (wrap_y) ny = (ny % ly + ly) % ly;
    if (nx < 0 || nx >= lx || ny < 0 || ny >= ly) return false;
    out = site(nx, ny);
    return true;
  };

  BondList nn;
  BondList nnn;
  for (int y = 0; y < ly; ++y) {
    for (int x = 0; x < lx; ++x) {
      const int s = site(x, y);
      int t = 0;
      if (shift(x, y, 1, 0, t)) nn.push_back({s, t});
      if (shift(x, y, 0, 1, t)) nn.push_back({s, t});
      if (shift(x, y, 1, 1, t)) nnn.push_back({s, t});
      if (shift(x, y, 1, -1, t)) nnn.push_back({s, t});
    }
  }
  return Lattice(lx, ly, boundary, std::move(nn), std::move(nnn));
}

}  // namespace lecho
