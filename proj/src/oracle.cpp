// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/oracle.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "lecho/propagator.hpp"

namespace lecho::oracle {

namespace {

using cd = std::complex<double>;

Eigen::Matrix2cd pauli_half(Axis axis) {
  Eigen::Matrix2cd m;
  switch (axis) {
    case Axis::x: m << 0.0, 0.5, 0.5, 0.0; break;
    case Axis::y: m << 0.0, cd(0.0, 0.5), cd(0.0, -0.5), 0.0; break;
    case Axis::z: m << -0.5, 0.0, 0.0, 0.5; break;
  }
  return m;
}

/// Kronecker chain over sites n-1 .. 0 (site 0 is the least significant bit).
DenseOperator embed(int n, int site_a, const Eigen::Matrix2cd& a, int site_b, const Eigen::Matrix2cd& b) {
  DenseOperator out = DenseOperator::Identity(1, 1);
  for (int s = n - 1; s >= 0; --s) {
    Eigen::Matrix2cd factor = Eigen::Matrix2cd::Identity();
    if (s == site_a) factor = a;
    if (s == site_b) factor = b;
    DenseOperator next = Eigen::kroneckerProduct(out, factor);
    out.swap(next);
  }
  return out;
}

void check_size(int n, int max_sites) {
  if (n > max_sites)
    throw std::invalid_argument("oracle limited to n <= " + std::to_string(max_sites) + " sites (requested " +
                                std::to_string(n) + ")");
}

SeriesMetadata oracle_meta(const EchoProtocol& p, const std::string& name) {
  SeriesMetadata m;
  m.observable = name;
  m.estimator = "oracle:" + name;
  m.n_samples = 1;
  m.seed = p.seed;
  m.integrator = "dense";
  m.t_p = p.t_p;
  m.lambda = p.lambda;
  m.protocol_hash = p.hash();
  return m;
}

Series empty_series(const EchoProtocol& p, const std::string& name) {
  Series s;
  s.times = p.times;
  s.values.assign(p.times.size(), 0.0);
  s.std_error.assign(p.times.size(), 0.0);
  s.meta = oracle_meta(p, name);
  return s;
}

}  // namespace

std::size_t memory_estimate_bytes(int n) {
  const std::size_t dim = std::size_t{1} << n;
  return static_cast<std::size_t>(kResidentMatrices) * dim * dim * sizeof(cd);
}

DenseOperator site_operator(int n, int site, Axis axis) {
  if (site < 0 || site >= n) throw std::invalid_argument("site_operator: site out of range");
  return embed(n, site, pauli_half(axis), -1, Eigen::Matrix2cd::Identity());
}

DenseOperator dense_hamiltonian(const SpinHamiltonian& h, int max_sites) {
  const int n = h.n_sites();
  check_size(n, max_sites);
  const Eigen::Index dim = Eigen::Index{1} << n;
  DenseOperator out = DenseOperator::Zero(dim, dim);
  const Eigen::Matrix2cd sx = pauli_half(Axis::x);
  const Eigen::Matrix2cd sy = pauli_half(Axis::y);
  const Eigen::Matrix2cd sz = pauli_half(Axis::z);
  for (const TwoBodyTerm& t : h.terms()) {
    switch (t.kind) {
      case TermKind::zz: out += t.coeff * embed(n, t.i, sz, t.j, sz); break;
      case TermKind::flipflop:
        out += t.coeff * (embed(n, t.i, sx, t.j, sx) + embed(n, t.i, sy, t.j, sy));
        break;
      case TermKind::double_quantum:
        out += t.coeff * (embed(n, t.i, sx, t.j, sx) - embed(n, t.i, sy, t.j, sy));
        break;
    }
  }
  return out;
}

bool is_hermitian(const DenseOperator& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const DenseOperator& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const DenseOperator id = DenseOperator::Identity(m.rows(), m.cols());
  return (m.adjoint() * m - id).cwiseAbs().maxCoeff() <= tol;
}

DenseOperator DenseEcho::Spectrum::exp(double t) const {
  const Eigen::VectorXcd phases = (cd(0.0, -t) * energies.cast<cd>()).array().exp();
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

DenseEcho::Spectrum DenseEcho::diagonalize(const DenseOperator& h) {
  if (!is_hermitian(h, 1e-12)) throw NumericsError("oracle: dense Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<DenseOperator> solver(h);
  if (solver.info() != Eigen::Success) throw NumericsError("oracle: diagonalization did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

DenseEcho::DenseEcho(const EchoProtocol& p, int max_sites) : n_(p.n_sites()), t_p_(p.t_p) {
  check_size(n_, max_sites);
  const EchoModel model = EchoModel::build(p);
  forward_ = diagonalize(dense_hamiltonian(model.forward, max_sites));
  backward_ = diagonalize(dense_hamiltonian(model.backward, max_sites));
  if (t_p_ > 0.0) prep_ = diagonalize(dense_hamiltonian(model.prep, max_sites)).exp(t_p_);
}

DenseOperator DenseEcho::unitary(double t) const {
  DenseOperator u = backward_.exp(0.5 * t) * forward_.exp(0.5 * t);
  if (t_p_ > 0.0) u = prep_.adjoint() * u * prep_;
  if (!is_unitary(u, 1e-10)) throw NumericsError("oracle: dense echo operator is not unitary to 1e-10");
  return u;
}

Series density_matrix_le(const EchoProtocol& p) {
  const DenseEcho echo(p);
  const int n = echo.n();
  const double dim = std::ldexp(1.0, n);
  const DenseOperator sz0 = site_operator(n, 0, Axis::z);
  const DenseOperator rho0 =
      (DenseOperator::Identity(sz0.rows(), sz0.cols()) + 2.0 * sz0) / dim;
  Series s = empty_series(p, "density_matrix_le");
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const DenseOperator u = echo.unitary(p.times[k]);
    const DenseOperator rho = u * rho0 * u.adjoint();
    const double drift = std::abs(rho.trace() - 1.0);
    if (drift > 1e-12)
      throw NumericsError("oracle: tr rho_t deviates from 1 by " + std::to_string(drift));
    s.values[k] = 2.0 * (sz0 * rho).trace().real();
  }
  return s;
}

Series heisenberg_autocorrelation(const EchoProtocol& p) {
  const DenseEcho echo(p);
  const DenseOperator sz0 = site_operator(echo.n(), 0, Axis::z);
  const double norm = (sz0 * sz0).trace().real();
  Series s = empty_series(p, "heisenberg_autocorrelation");
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const DenseOperator u = echo.unitary(p.times[k]);
    const DenseOperator sz_t = u.adjoint() * sz0 * u;
    s.values[k] = (sz_t * sz0).trace().real() / norm;
  }
  return s;
}

Series brute_force_mx(const EchoProtocol& p) {
  const DenseEcho echo(p);
  const Eigen::Index dim = Eigen::Index{1} << echo.n();
  Series s = empty_series(p, "brute_force_mx");
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const DenseOperator u = echo.unitary(p.times[k]);
    double total = 0.0;
    for (Eigen::Index i = 1; i < dim; i += 2) {
      double same = 0.0;
      double other = 0.0;
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (j == i) continue;
        const double w = std::norm(u(j, i));
        if (j & 1) {
          same += w;
        } else {
          other += w;
        }
      }
      total += same - other;
    }
    s.values[k] = total / static_cast<double>(dim / 2);
  }
  return s;
}

}  // namespace lecho::oracle
