// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lecho/hamiltonian.hpp"
#include "lecho/statevec.hpp"

namespace lecho {

enum class TrotterOrder { first, second_symmetric };
/// trotter: split-operator stepping. exact: full diagonalization (small n only).
enum class Integrator { trotter, exact };

std::string_view to_string(TrotterOrder o);
std::string_view to_string(Integrator i);
TrotterOrder parse_trotter_order(std::string_view s);
Integrator parse_integrator(std::string_view s);

struct PropagationSettings {
  Integrator integrator = Integrator::trotter;
  double dt = 0.01;
  TrotterOrder order = TrotterOrder::second_symmetric;
};

/// Largest n accepted by the diagonalization-based propagator.
inline constexpr int kDenseMaxSites = 12;

/// Reported when a segment drifts off the unit sphere by more than this.
inline constexpr double kNormAbortTolerance = 1e-6;
/// Drift above this is corrected and logged.
inline constexpr double kNormRepairTolerance = 1e-12;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All terms of a Hamiltonian acting on one site pair, merged. The three
/// kinds commute on a common pair, so exp(-i tau H_pair) is exact.
struct PairCoupling {
  int site_a = 0;
  int site_b = 1;
  double zz = 0.0;
  double flipflop = 0.0;
  double dq = 0.0;
};

/**
 * Split of H into groups of pairwise site-disjoint couplings.
 *
 * Pairs are coloured greedily in order of first appearance in the term list,
 * each taking the smallest colour unused at either endpoint. group_terms
 * records which Hamiltonian terms landed in each group.
 */
struct TrotterPlan {
  int n_sites = 0;
  double dt = 0.01;
  TrotterOrder order = TrotterOrder::second_symmetric;
  std::vector<std::vector<PairCoupling>> groups;
  std::vector<std::vector<std::size_t>> group_terms;
};

TrotterPlan plan_trotter(const SpinHamiltonian& h, double dt, TrotterOrder order);

/// True when duration is a whole number of dt steps (relative tolerance 1e-9).
bool is_step_multiple(double duration, double dt);

/// In-place exp(-i tau H_group) on a full amplitude array.
void apply_group(std::span<const PairCoupling> group, double tau, std::span<std::complex<double>> amp);

/// Unitary stepping of a fixed generator; advance(amp, t, sign) applies exp(-i sign H t).
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual void advance(Amplitudes& amp, double duration, int sign = 1) const = 0;
  virtual int n_sites() const = 0;
};

class TrotterPropagator final : public Propagator {
 public:
  TrotterPropagator(const SpinHamiltonian& h, double dt, TrotterOrder order);

  /// Durations that are not a multiple of dt get two half-remainder steps,
  /// one at each end, so the schedule stays palindromic and the sign-flipped
  /// segment is its exact inverse.
  void advance(Amplitudes& amp, double duration, int sign = 1) const override;
  int n_sites() const override { return plan_.n_sites; }
  const TrotterPlan& plan() const noexcept { return plan_; }

 private:
  void step(std::span<std::complex<double>> amp, double h) const;

  TrotterPlan plan_;
};

/// exp(-i H t) from the eigendecomposition of the (real symmetric) dense H.
class SpectralPropagator final : public Propagator {
 public:
  explicit SpectralPropagator(const SpinHamiltonian& h, int max_sites = kDenseMaxSites);

  void advance(Amplitudes& amp, double duration, int sign = 1) const override;
  int n_sites() const override { return n_sites_; }
  const Eigen::VectorXd& energies() const noexcept { return energies_; }
  Eigen::MatrixXcd unitary(double t) const;

 private:
  int n_sites_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;
};

std::unique_ptr<Propagator> make_propagator(const SpinHamiltonian& h, const PropagationSettings& s);

struct EvolutionSegment {
  const SpinHamiltonian* generator = nullptr;
  int sign = 1;
  double duration = 0.0;
};

struct NormCorrection {
  std::string segment;
  double drift = 0.0;
};

/// Norm repairs performed at segment boundaries. Never silent: every
/// correction above kNormRepairTolerance lands here.
struct EvolutionLog {
  std::vector<NormCorrection> corrections;
};

/// Segment-boundary norm check: throws NumericsError above
/// kNormAbortTolerance, renormalizes and logs above kNormRepairTolerance.
void settle_norm(Amplitudes& amp, std::string_view segment, EvolutionLog* log, double dt = 0.0);

StateVector evolve(StateVector psi, std::span<const EvolutionSegment> segments,
                   const PropagationSettings& settings, EvolutionLog* log = nullptr);

/// U_LE(t) = U_-(t/2) U_+(t/2) with U_+ generated by h0 + sigma and U_- by -h0 + sigma.
StateVector u_le(StateVector psi, const SpinHamiltonian& h0, const SpinHamiltonian& sigma, double t_total,
                 const PropagationSettings& settings, EvolutionLog* log = nullptr);

/// Reference exp(-i H t)|psi> by full diagonalization; n <= kDenseMaxSites.
StateVector dense_evolve(const StateVector& psi, const SpinHamiltonian& h, double t);

}  // namespace lecho
