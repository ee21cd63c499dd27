// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "lecho/lattice.hpp"
#include "lecho/oracle.hpp"
#include "lecho/propagator.hpp"
#include "support.hpp"

using namespace lecho;

namespace {

struct Model {
  Lattice lat;
  SpinHamiltonian h;
};

Model ladder(int lx, double lambda) {
  Lattice lat = build_lattice(lx, 2, Boundary::cylinder);
  const int n = lat.n_sites();
  SpinHamiltonian h = dipolar(n, lat.bonds_nn()) + lambda * dipolar(n, lat.bonds_nnn());
  return {std::move(lat), std::move(h)};
}

Amplitudes trotter(const SpinHamiltonian& h, Amplitudes a, double t, double dt, TrotterOrder o) {
  TrotterPropagator(h, dt, o).advance(a, t);
  return a;
}

Amplitudes reference(const SpinHamiltonian& h, const Amplitudes& a, double t) {
  const Eigen::MatrixXcd m = oracle::dense_hamiltonian(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXcd phase = (es.eigenvalues().cast<std::complex<double>>() * std::complex<double>(0, -t))
                                     .array()
                                     .exp()
                                     .matrix();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint() * a;
}

}  // namespace

TEST_CASE("two-spin flip-flop oscillation") {
  const double j = 0.8;
  const SpinHamiltonian h = dipolar(2, {{0, 1}}, j);
  for (double t : {0.3, 1.0, 2.7, 6.0}) {
    for (Integrator in : {Integrator::trotter, Integrator::exact}) {
      const StateVector out = evolve(basis_state(2, 0b01), std::array{EvolutionSegment{&h, 1, t}},
                                     {in, 0.01, TrotterOrder::second_symmetric});
      // a single pair is one exact group, so the Trotter path is exact too
      CHECK(local_polarization(out, 0) == doctest::Approx(std::cos(j * t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Trotter groups are site-disjoint and cover every term once") {
  const Lattice lat = build_lattice(4, 4, Boundary::periodic);
  const SpinHamiltonian h = dipolar(16, lat.bonds_nn()) + 0.1 * dipolar(16, lat.bonds_nnn());
  const TrotterPlan plan = plan_trotter(h, 0.05, TrotterOrder::second_symmetric);
  std::multiset<std::size_t> seen;
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    std::set<int> sites;
    for (const PairCoupling& c : plan.groups[g]) {
      CHECK(sites.insert(c.site_a).second);
      CHECK(sites.insert(c.site_b).second);
    }
    seen.insert(plan.group_terms[g].begin(), plan.group_terms[g].end());
  }
  CHECK(seen.size() == h.size());
  CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == h.size());
  // 64 bonds, at most 8 disjoint pairs per group on 16 sites
  CHECK(plan.groups.size() >= 8);
  const TrotterPlan nn_only = plan_trotter(dipolar(16, lat.bonds_nn()), 0.05, TrotterOrder::first);
  CHECK(nn_only.groups.size() >= 4);
}

TEST_CASE("identical inputs give identical plans") {
  const Model m = ladder(4, 0.2);
  const TrotterPlan a = plan_trotter(m.h, 0.01, TrotterOrder::second_symmetric);
  const TrotterPlan b = plan_trotter(m.h, 0.01, TrotterOrder::second_symmetric);
  CHECK(a.group_terms == b.group_terms);
}

TEST_CASE("second-order Trotter error scales as dt^2") {
  const Model m = ladder(4, 0.3);
  const Amplitudes psi = test::random_amplitudes(8, 1);
  const Amplitudes ref = reference(m.h, psi, 5.0);
  const double e1 = (trotter(m.h, psi, 5.0, 0.02, TrotterOrder::second_symmetric) - ref).norm();
  const double e2 = (trotter(m.h, psi, 5.0, 0.01, TrotterOrder::second_symmetric) - ref).norm();
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("first-order Trotter error scales as dt") {
  const Model m = ladder(3, 0.3);
  const Amplitudes psi = test::random_amplitudes(6, 2);
  const Amplitudes ref = reference(m.h, psi, 2.0);
  const double e1 = (trotter(m.h, psi, 2.0, 0.01, TrotterOrder::first) - ref).norm();
  const double e2 = (trotter(m.h, psi, 2.0, 0.005, TrotterOrder::first) - ref).norm();
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("sign-flipped second-order segment is the exact inverse") {
  const Model m = ladder(5, 0.1);
  const Amplitudes psi = test::random_amplitudes(10, 3);
  for (double t : {2.0, 2.013}) {
    const TrotterPropagator p(m.h, 0.01, TrotterOrder::second_symmetric);
    Amplitudes a = psi;
    p.advance(a, t, +1);
    p.advance(a, t, -1);
    CHECK(std::abs(a.dot(psi)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("durations off the step grid stay accurate") {
  const Model m = ladder(3, 0.2);
  const Amplitudes psi = test::random_amplitudes(6, 4);
  const double t = 1.2345;
  CHECK_FALSE(is_step_multiple(t, 0.01));
  CHECK(is_step_multiple(1.23, 0.01));
  // the two half-remainder steps must not spoil the O(dt^2) error of the grid steps
  const double off = (trotter(m.h, psi, t, 0.01, TrotterOrder::second_symmetric) - reference(m.h, psi, t)).norm();
  const double on = (trotter(m.h, psi, 1.23, 0.01, TrotterOrder::second_symmetric) - reference(m.h, psi, 1.23)).norm();
  CHECK(off < 1.1 * on);
}

TEST_CASE("spectral propagator matches the dense reference and composes") {
  const Model m = ladder(4, 0.4);
  const Amplitudes psi = test::random_amplitudes(8, 5);
  const SpectralPropagator sp(m.h);
  Amplitudes a = psi;
  sp.advance(a, 3.3);
  CHECK((a - reference(m.h, psi, 3.3)).norm() < 1e-12);
  CHECK((sp.unitary(1.1) * sp.unitary(2.2) - sp.unitary(3.3)).norm() < 1e-12);
  CHECK(oracle::is_unitary(sp.unitary(7.0), 1e-12));
  const StateVector d = dense_evolve(StateVector(8, psi), m.h, 3.3);
  CHECK((d.amplitudes() - a).norm() < 1e-12);
}

TEST_CASE("Trotter steps preserve norm and m_z sectors") {
  const Model m = ladder(4, 0.3);
  Amplitudes a = Amplitudes::Zero(256);
  for (std::uint64_t k = 0; k < 256; ++k)
    if (two_mz_of(k, 8) == 0) a(k) = std::polar(1.0, 0.37 * k);
  a.normalize();
  TrotterPropagator(m.h, 0.05, TrotterOrder::second_symmetric).advance(a, 10.0);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  double leak = 0.0;
  for (std::uint64_t k = 0; k < 256; ++k)
    if (two_mz_of(k, 8) != 0) leak += std::norm(a(k));
  CHECK(leak == 0.0);
}

TEST_CASE("echo without perturbation is the identity") {
  const Model m = ladder(4, 0.0);
  const SpinHamiltonian sigma(8, {});
  const StateVector psi = test::random_state(8, 6);
  for (Integrator in : {Integrator::trotter, Integrator::exact}) {
    const StateVector out = u_le(psi, m.h, sigma, 8.0, {in, 0.01, TrotterOrder::second_symmetric});
    CHECK(std::abs(overlap(psi, out)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("empty generator leaves the state alone") {
  const SpinHamiltonian none(3, {});
  Amplitudes a = test::random_amplitudes(3, 7);
  const Amplitudes before = a;
  TrotterPropagator(none, 0.1, TrotterOrder::second_symmetric).advance(a, 4.0);
  CHECK(a == before);
}

TEST_CASE("norm drift is repaired, logged or rejected") {
  EvolutionLog log;
  Amplitudes a = test::random_amplitudes(3, 8);
  settle_norm(a, "quiet", &log);
  CHECK(log.corrections.empty());
  a *= 1.0 + 1e-9;
  settle_norm(a, "drifted", &log);
  REQUIRE(log.corrections.size() == 1);
  CHECK(log.corrections[0].segment == "drifted");
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-15));
  a *= 1.0 + 1e-4;
  CHECK_THROWS_AS(settle_norm(a, "broken", &log), NumericsError);
}

TEST_CASE("exact integrator refuses large systems") {
  const Lattice lat = build_lattice(4, 4, Boundary::periodic);
  CHECK_THROWS(SpectralPropagator(dipolar(16, lat.bonds_nn())));
}
