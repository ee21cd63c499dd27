// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/statevec.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lecho/rng.hpp"

namespace lecho {

namespace {

constexpr std::uint32_t kDumpVersion = 1;

void check_site(const StateVector& psi, int site) {
  if (site < 0 || site >= psi.n())
    throw std::invalid_argument("site " + std::to_string(site) + " outside [0, " +
                                std::to_string(psi.n()) + ")");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  os.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
  std::array<char, sizeof(T)> bytes{};
  if (!is.read(bytes.data(), bytes.size())) throw std::runtime_error("state dump truncated");
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

StateVector::StateVector(int n, Amplitudes amp, double tolerance) : n_(n), amp_(std::move(amp)) {
  if (n < 1 || n > 40) throw std::invalid_argument("state vector needs 1 <= n <= 40");
  if (static_cast<std::uint64_t>(amp_.size()) != dim())
    throw std::invalid_argument("amplitude count is not 2^n");
  const double nrm = amp_.norm();
  if (!(std::abs(nrm - 1.0) <= tolerance))
    throw std::invalid_argument("state is not normalized (norm " + std::to_string(nrm) + ")");
}

std::uint64_t SectorSpec::dimension(int n) const {
  switch (mode) {
    case Mode::site0_up:
    case Mode::site0_down: return std::uint64_t{1} << (n - 1);
    case Mode::full: return std::uint64_t{1} << n;
    case Mode::fixed_mz: {
      if ((two_mz + n) % 2 != 0) return 0;
      return static_cast<std::uint64_t>(binomial(n, (n + two_mz) / 2));
    }
  }
  return 0;
}

StateVector basis_state(int n, std::uint64_t index) {
  if (n < 1 || n > 40) throw std::invalid_argument("basis_state needs 1 <= n <= 40");
  if (index >= (std::uint64_t{1} << n)) throw std::invalid_argument("basis index out of range");
  Amplitudes amp = Amplitudes::Zero(Eigen::Index{1} << n);
  amp[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(n, std::move(amp));
}

StateVector random_phase_state(int n, SectorSpec sector, std::uint64_t seed) {
  if (n < 1 || n > 40) throw std::invalid_argument("random_phase_state needs 1 <= n <= 40");
  const std::uint64_t count = sector.dimension(n);
  if (count == 0) throw std::invalid_argument("random_phase_state: sector is empty");
  const double scale = 1.0 / std::sqrt(static_cast<double>(count));
  const std::uint64_t dim = std::uint64_t{1} << n;
  Amplitudes amp = Amplitudes::Zero(static_cast<Eigen::Index>(dim));
  for (std::uint64_t k = 0; k < dim; ++k) {
    if (!sector.contains(k, n)) continue;
    const double phi = 2.0 * std::numbers::pi * rng::uniform01(seed, k);
    amp[static_cast<Eigen::Index>(k)] = std::complex<double>(scale * std::cos(phi), -scale * std::sin(phi));
  }
  // Sum of count terms of size 1/count; rounding stays far inside 1e-9.
  return StateVector(n, std::move(amp));
}

double local_polarization(const StateVector& psi, int site) {
  check_site(psi, site);
  const std::uint64_t mask = std::uint64_t{1} << site;
  const Amplitudes& a = psi.amplitudes();
  double up = 0.0;
  double down = 0.0;
  for (std::uint64_t k = 0; k < psi.dim(); ++k) {
    const double p = std::norm(a[static_cast<Eigen::Index>(k)]);
    if (k & mask) up += p; else down += p;
  }
  return (up - down) / (up + down);
}

double total_polarization(const StateVector& psi) {
  const Amplitudes& a = psi.amplitudes();
  double acc = 0.0;
  double mass = 0.0;
  for (std::uint64_t k = 0; k < psi.dim(); ++k) {
    const double p = std::norm(a[static_cast<Eigen::Index>(k)]);
    acc += p * two_mz_of(k, psi.n());
    mass += p;
  }
  return acc / mass;
}

std::complex<double> overlap(const StateVector& psi, const StateVector& phi) {
  if (psi.n() != phi.n()) throw std::invalid_argument("overlap: states have different n");
  return psi.amplitudes().dot(phi.amplitudes());
}

double sector_probability(const StateVector& psi, SectorSpec sector) {
  const Amplitudes& a = psi.amplitudes();
  double mass = 0.0;
  for (std::uint64_t k = 0; k < psi.dim(); ++k)
    if (sector.contains(k, psi.n())) mass += std::norm(a[static_cast<Eigen::Index>(k)]);
  return mass;
}

double sector_weight(int n, int two_mz) {
  if (n < 1) throw std::invalid_argument("sector_weight needs n >= 1");
  if (two_mz < -n || two_mz > n || (two_mz + n) % 2 != 0)
    throw std::invalid_argument("m_z = " + std::to_string(two_mz) + "/2 is not attainable for " +
                                std::to_string(n) + " spins");
  return binomial(n, (n + two_mz) / 2) / std::ldexp(1.0, n);
}

void write_state(const StateVector& psi, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write("SPEC", 4);
  put_le<std::uint32_t>(os, kDumpVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(psi.n()));
  put_le<std::uint32_t>(os, 0);
  for (const std::complex<double>& z : psi.amplitudes()) {
    put_le<double>(os, z.real());
    put_le<double>(os, z.imag());
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

StateVector read_state(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || std::string_view(magic.data(), 4) != "SPEC")
    throw std::runtime_error(path.string() + " is not a state dump");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kDumpVersion) throw std::runtime_error("unsupported state dump version " + std::to_string(version));
  const auto n = static_cast<int>(get_le<std::uint32_t>(is));
  (void)get_le<std::uint32_t>(is);
  if (n < 1 || n > 40) throw std::runtime_error("state dump has invalid n");
  Amplitudes amp(Eigen::Index{1} << n);
  for (Eigen::Index k = 0; k < amp.size(); ++k) {
    const double re = get_le<double>(is);
    const double im = get_le<double>(is);
    amp[k] = {re, im};
  }
  return StateVector(n, std::move(amp));
}

}  // namespace lecho
