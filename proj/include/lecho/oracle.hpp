// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "lecho/echo.hpp"
#include "lecho/hamiltonian.hpp"

/// Brute-force references. Everything here goes through dense 2^n x 2^n
/// matrices built from Kronecker products of 2x2 spin matrices and exact
/// diagonalization, sharing no code with the matrix-free fast path.
namespace lecho::oracle {

using DenseOperator = Eigen::MatrixXcd;

inline constexpr int kMaxSites = 10;
/// Dense matrices resident at once during an oracle run.
inline constexpr int kResidentMatrices = 8;

/// Rough peak memory of an oracle run on n sites.
std::size_t memory_estimate_bytes(int n);

enum class Axis { x, y, z };

/// S^axis on one site, embedded with identities. Local order is (down, up).
DenseOperator site_operator(int n, int site, Axis axis);

/// Sum of coeff * (two-site operator products) built term by term.
DenseOperator dense_hamiltonian(const SpinHamiltonian& h, int max_sites = kMaxSites);

bool is_hermitian(const DenseOperator& m, double tol);
bool is_unitary(const DenseOperator& m, double tol);

/// Dense U(t) = U_p^dag U_LE(t) U_p for the protocol (U_p = 1 when t_p = 0).
class DenseEcho {
 public:
  explicit DenseEcho(const EchoProtocol& p, int max_sites = kMaxSites);

  int n() const noexcept { return n_; }
  /// Throws NumericsError if the product is not unitary to 1e-10.
  DenseOperator unitary(double t) const;

 private:
  struct Spectrum {
    Eigen::VectorXd energies;
    DenseOperator vectors;
    DenseOperator exp(double t) const;
  };
  static Spectrum diagonalize(const DenseOperator& h);

  int n_;
  double t_p_;
  Spectrum forward_;
  Spectrum backward_;
  DenseOperator prep_;
};

/// 2 tr[S^z_0 rho_t] with rho_0 = 2^-n (1 + 2 S^z_0) and rho_t = U rho_0 U^dag.
/// Throws NumericsError if tr rho_t drifts from 1 by more than 1e-12.
Series density_matrix_le(const EchoProtocol& p);

/// tr[S^z_0(t) S^z_0] / tr[S^z_0 S^z_0] with S^z_0(t) = U^dag S^z_0 U.
Series heisenberg_autocorrelation(const EchoProtocol& p);

/// Literal double sum over basis states of the cross term.
Series brute_force_mx(const EchoProtocol& p);

}  // namespace lecho::oracle
