// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "lecho/statevec.hpp"
#include "support.hpp"

using namespace lecho;

TEST_CASE("basis states and sector membership") {
  const StateVector s = basis_state(3, 0b101);
  CHECK(s.amplitudes()(5) == std::complex<double>(1.0, 0.0));
  CHECK(local_polarization(s, 0) == 1.0);
  CHECK(local_polarization(s, 1) == -1.0);
  CHECK(total_polarization(s) == doctest::Approx(1.0));
  CHECK(SectorSpec::site0_up().contains(0b101, 3));
  CHECK_FALSE(SectorSpec::site0_down().contains(0b101, 3));
  CHECK(SectorSpec::fixed_mz(1).contains(0b101, 3));
  CHECK(SectorSpec::site0_up().dimension(4) == 8);
  CHECK(SectorSpec::fixed_mz(0).dimension(4) == 6);
  CHECK(SectorSpec::full().dimension(4) == 16);
  CHECK_THROWS_AS(basis_state(3, 8), std::invalid_argument);
}

TEST_CASE("random-phase states are flat, confined and reproducible") {
  const int n = 8;
  const StateVector a = random_phase_state(n, SectorSpec::site0_up(), 42);
  const StateVector b = random_phase_state(n, SectorSpec::site0_up(), 42);
  const StateVector c = random_phase_state(n, SectorSpec::site0_up(), 43);
  CHECK(a.amplitudes() == b.amplitudes());
  CHECK(a.amplitudes() != c.amplitudes());
  const double mod = 1.0 / std::sqrt(128.0);
  for (std::uint64_t k = 0; k < a.dim(); ++k) {
    if (k & 1U)
      CHECK(std::abs(a.amplitudes()(k)) == doctest::Approx(mod).epsilon(1e-14));
    else
      CHECK(a.amplitudes()(k) == std::complex<double>(0.0, 0.0));
  }
  CHECK(local_polarization(a, 0) == doctest::Approx(1.0));
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("local polarization on mixed states") {
  // cos(a)|up> + sin(a)|down> on site 0: polarization cos(2a)
  const double a = 0.4;
  Amplitudes v = Amplitudes::Zero(4);
  v(1) = std::cos(a);
  v(0) = std::sin(a);
  CHECK(local_polarization(StateVector(2, v), 0) == doctest::Approx(std::cos(2 * a)));
  CHECK(local_polarization(StateVector(2, v), 1) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(local_polarization(StateVector(2, v), 2), std::invalid_argument);
}

TEST_CASE("local polarization ignores global phase") {
  StateVector s = test::random_state(5, 3);
  const double p = local_polarization(s, 0);
  Amplitudes rotated = s.amplitudes() * std::polar(1.0, 1.234);
  CHECK(local_polarization(StateVector(5, rotated), 0) == doctest::Approx(p).epsilon(1e-14));
}

TEST_CASE("sector weights are binomial fractions") {
  CHECK(sector_weight(4, 0) == doctest::Approx(6.0 / 16.0));
  CHECK(sector_weight(4, 4) == doctest::Approx(1.0 / 16.0));
  CHECK(sector_weight(3, 1) == doctest::Approx(3.0 / 8.0));
  for (int n : {2, 5, 8, 16}) {
    double sum = 0.0;
    for (int two_mz = -n; two_mz <= n; two_mz += 2) sum += sector_weight(n, two_mz);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("sector probability and overlap") {
  const StateVector s = test::random_state(6, 9);
  double total = 0.0;
  for (int two_mz = -6; two_mz <= 6; two_mz += 2) total += sector_probability(s, SectorSpec::fixed_mz(two_mz));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sector_probability(s, SectorSpec::site0_up()) + sector_probability(s, SectorSpec::site0_down()) ==
        doctest::Approx(1.0));
  CHECK(std::abs(overlap(s, s) - 1.0) < 1e-14);
  const StateVector b = basis_state(6, 7);
  CHECK(std::abs(overlap(b, s) - s.amplitudes()(7)) < 1e-15);
}

TEST_CASE("constructor checks normalization") {
  Amplitudes v = Amplitudes::Zero(4);
  v(0) = 2.0;
  CHECK_THROWS_AS(StateVector(2, v), std::invalid_argument);
  CHECK_THROWS_AS(StateVector(3, Amplitudes::Ones(4) / 2.0), std::invalid_argument);
}

TEST_CASE("binary dump round-trips bit for bit") {
  const auto dir = std::filesystem::temp_directory_path() / "lecho_statevec_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "psi.bin";
  const StateVector s = test::random_state(7, 21);
  write_state(s, path);
  CHECK(std::filesystem::file_size(path) == 16 + 128 * 16);
  const StateVector r = read_state(path);
  CHECK(r.n() == 7);
  CHECK(r.amplitudes() == s.amplitudes());

  std::filesystem::resize_file(path, 100);
  CHECK_THROWS(read_state(path));
  std::filesystem::remove_all(dir);
}
