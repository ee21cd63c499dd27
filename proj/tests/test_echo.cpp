// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lecho/echo.hpp"
#include "lecho/oracle.hpp"
#include "support.hpp"

using namespace lecho;
using test::linspace;
using test::max_abs_diff;
using test::small_protocol;

namespace {

EchoProtocol ladder6(double lambda, std::vector<double> times, Estimator e = Estimator::exact_ensemble) {
  EchoProtocol p = small_protocol(3, 2, Boundary::cylinder, lambda, std::move(times));
  p.estimator = e;
  p.propagation.integrator = Integrator::exact;
  return p;
}

// Ensemble averages over site-0-up basis states of the dense echo unitary.
struct DenseAverages {
  double m11 = 0.0;
  double mb = 0.0;
};

DenseAverages dense_averages(const EchoProtocol& p, double t) {
  const oracle::DenseEcho echo(p);
  const Eigen::MatrixXcd u = echo.unitary(t);
  const Eigen::Index dim = u.rows();
  DenseAverages out;
  int count = 0;
  for (Eigen::Index i = 1; i < dim; i += 2) {
    double up = 0.0, down = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) ((k & 1) ? up : down) += std::norm(u(k, i));
    out.m11 += up - down;
    out.mb += std::norm(u(i, i));
    ++count;
  }
  out.m11 /= count;
  out.mb /= count;
  return out;
}

}  // namespace

TEST_CASE("echo is perfect without the perturbation") {
  EchoProtocol p = small_protocol(4, 2, Boundary::cylinder, 0.0, linspace(0, 20, 11));
  p.n_samples = 2;
  const Series s = local_le(p);
  for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  p.t_p = 3.0;
  for (double v : dple(p).values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  p.t_p = 0.0;
  for (double v : global_overlap_le(p).values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : subspace_dple(p, 0.2).values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("every echo starts at one") {
  EchoProtocol p = small_protocol(4, 2, Boundary::cylinder, 0.5, {0.0, 1.0});
  CHECK(local_le(p).values[0] == 1.0);
  CHECK(global_overlap_le(p).values[0] == doctest::Approx(1.0).epsilon(1e-14));
  p.estimator = Estimator::exact_ensemble;
  const Decomposition d = mb_and_x(p);
  CHECK(d.m11.values[0] == 1.0);
  CHECK(d.mb.values[0] == 1.0);
  CHECK(d.mx.values[0] == 0.0);
}

TEST_CASE("prepared echo at zero preparation time is the plain echo bit for bit") {
  EchoProtocol p = small_protocol(4, 2, Boundary::cylinder, 0.3, linspace(0, 10, 6));
  p.n_samples = 2;
  const Series a = local_le(p);
  const Series b = dple(p);
  CHECK(a.values == b.values);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("fast estimators agree with dense matrices") {
  for (double t_p : {0.0, 1.5}) {
    EchoProtocol p = ladder6(0.4, {0.5, 2.0, 5.0});
    p.t_p = t_p;
    const Series m11 = dple(p);
    const Series mb = many_body_le(p);
    const Decomposition d = mb_and_x(p);
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      const DenseAverages ref = dense_averages(p, p.times[k]);
      CHECK(m11.values[k] == doctest::Approx(ref.m11).epsilon(1e-10));
      CHECK(mb.values[k] == doctest::Approx(ref.mb).epsilon(1e-10));
      CHECK(d.m11.values[k] == doctest::Approx(ref.m11).epsilon(1e-10));
      CHECK(d.mb.values[k] == doctest::Approx(ref.mb).epsilon(1e-10));
    }
  }
}

TEST_CASE("decomposition closes and its cross term matches the literal double sum") {
  EchoProtocol p = ladder6(0.6, linspace(0, 8, 9));
  const Decomposition d = mb_and_x(p);
  const Series mx = oracle::brute_force_mx(p);
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    CHECK(d.m11.values[k] == doctest::Approx(d.mb.values[k] + d.mx.values[k]).epsilon(1e-12));
    CHECK(d.mx.values[k] == doctest::Approx(mx.values[k]).epsilon(1e-10));
    CHECK(std::abs(d.m11.values[k]) <= 1.0 + 1e-12);
    CHECK(d.mb.values[k] >= 0.0);
    CHECK(d.mb.values[k] <= 1.0 + 1e-12);
    CHECK(d.m11.std_error[k] == 0.0);
  }
}

TEST_CASE("local echo matches the density-matrix reference") {
  const EchoProtocol p = ladder6(0.5, linspace(0, 12, 7));
  const Series fast = local_le(p);
  const Series ref = oracle::density_matrix_le(p);
  CHECK(max_abs_diff(fast.values, ref.values) < 1e-10);
}

TEST_CASE("results do not depend on the worker count") {
  EchoProtocol p = small_protocol(4, 2, Boundary::cylinder, 0.3, linspace(0, 6, 4));
  p.n_samples = 5;
  p.threads = 1;
  const Series a = local_le(p);
  p.threads = 4;
  const Series b = local_le(p);
  CHECK(a.values == b.values);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("seeds select reproducible realizations") {
  EchoProtocol p = small_protocol(4, 2, Boundary::cylinder, 0.3, {4.0});
  p.n_samples = 3;
  const double a = local_le(p).values[0];
  CHECK(local_le(p).values[0] == a);
  p.seed = 2;
  CHECK(local_le(p).values[0] != a);
}

TEST_CASE("typicality estimate brackets the exact ensemble") {
  EchoProtocol p = small_protocol(5, 2, Boundary::cylinder, 0.4, {2.0, 6.0});
  p.propagation.dt = 0.02;
  p.n_samples = 8;
  const Series typ = local_le(p);
  p.estimator = Estimator::exact_ensemble;
  const Series ex = local_le(p);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(typ.std_error[k] > 0.0);
    CHECK(std::abs(typ.values[k] - ex.values[k]) < 4.0 * typ.std_error[k]);
  }
}

TEST_CASE("sampled ensemble with every state equals the exact ensemble") {
  EchoProtocol p = ladder6(0.4, {3.0});
  const double exact = local_le(p).values[0];
  p.estimator = Estimator::sampled_ensemble;
  p.n_samples = 32;
  CHECK(local_le(p).values[0] == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("two-spin preparation follows the closed form") {
  // Both generators give (1 + cos(t / sqrt 2)) / 2 on a single bond.
  const std::vector<double> tp = linspace(0, 10, 11);
  for (Preparation prep : {Preparation::double_quantum, Preparation::dipolar}) {
    for (Estimator e : {Estimator::exact_ensemble, Estimator::typicality}) {
      EchoProtocol p = small_protocol(2, 1, Boundary::open, 0.0, {});
      p.preparation = prep;
      p.estimator = e;
      p.n_samples = e == Estimator::exact_ensemble ? 1 : 2;
      const Series s = forward_p11(p, tp);
      for (std::size_t k = 0; k < tp.size(); ++k)
        CHECK(s.values[k] == doctest::Approx(0.5 * (1.0 + std::cos(tp[k] / std::numbers::sqrt2))).epsilon(1e-10));
    }
  }
}

TEST_CASE("sector return probabilities match dense projections") {
  const EchoProtocol p = ladder6(0.5, {});
  const oracle::DenseEcho echo(p);
  const int n = 6;
  const StateVector phi = random_phase_state(n, SectorSpec::full(), 77);
  for (double t : {1.0, 4.0}) {
    const Eigen::VectorXcd img = echo.unitary(t) * phi.amplitudes();
    const std::vector<double> got = sector_return_probabilities(phi, StateVector(n, img));
    REQUIRE(got.size() == static_cast<std::size_t>(n + 1));
    for (int s = 0; s <= n; ++s) {
      Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(phi.amplitudes().size());
      for (Eigen::Index k = 0; k < proj.size(); ++k)
        if (two_mz_of(k, n) == 2 * s - n) proj(k) = phi.amplitudes()(k);
      const double w = proj.squaredNorm();
      const double want = std::norm(proj.dot(echo.unitary(t) * proj)) / (w * w);
      CHECK(got[s] == doctest::Approx(want).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(sector_return_probabilities(phi, test::random_state(5, 1)), std::invalid_argument);
}

TEST_CASE("flat references return one in every sector") {
  const StateVector phi = random_phase_state(8, SectorSpec::full(), 9);
  for (double v : sector_return_probabilities(phi, phi)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimator restrictions are enforced") {
  EchoProtocol p = small_protocol(3, 2, Boundary::cylinder, 0.1, {1.0});
  CHECK_THROWS_AS(mb_and_x(p), std::invalid_argument);
  CHECK_THROWS_AS(many_body_le(p), std::invalid_argument);
  p.estimator = Estimator::exact_ensemble;
  CHECK_THROWS_AS(global_overlap_le(p), std::invalid_argument);
  CHECK_THROWS_AS(subspace_dple(p, 0.1), std::invalid_argument);
}

TEST_CASE("protocol validation names the field") {
  auto fails_on = [](EchoProtocol p, const char* field) {
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what()).find(field) != std::string::npos;
    }
    return false;
  };
  const EchoProtocol ok = small_protocol(4, 4, Boundary::periodic, 0.1, {0.0, 1.0});
  CHECK_NOTHROW(ok.validate());
  EchoProtocol p = ok;
  p.times = {-1.0};
  CHECK(fails_on(p, "times"));
  p = ok;
  p.n_samples = 0;
  CHECK(fails_on(p, "n_samples"));
  p = ok;
  p.propagation.dt = -0.1;
  CHECK(fails_on(p, "dt"));
  p = ok;
  p.estimator = Estimator::exact_ensemble;
  CHECK(fails_on(p, "estimator"));
  p = ok;
  p.t_p = -2.0;
  CHECK(fails_on(p, "t_p"));
}

TEST_CASE("protocol hash follows result-relevant fields only") {
  EchoProtocol a = small_protocol(4, 4, Boundary::periodic, 0.1, {1.0});
  EchoProtocol b = a;
  b.threads = 7;
  CHECK(a.hash() == b.hash());
  b.lambda = 0.2;
  CHECK(a.hash() != b.hash());
  CHECK(a.hash().size() == 16);
}
