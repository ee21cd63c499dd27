// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace lecho {

std::string_view to_string(TrotterOrder o) {
  return o == TrotterOrder::first ? "first" : "second_symmetric";
}

std::string_view to_string(Integrator i) { return i == Integrator::trotter ? "trotter" : "exact"; }

TrotterOrder parse_trotter_order(std::string_view s) {
  if (s == "first") return TrotterOrder::first;
  if (s == "second_symmetric") return TrotterOrder::second_symmetric;
  throw std::invalid_argument("unknown trotter order '" + std::string(s) +
                              "' (expected first|second_symmetric)");
}

Integrator parse_integrator(std::string_view s) {
  if (s == "trotter") return Integrator::trotter;
  if (s == "exact") return Integrator::exact;
  throw std::invalid_argument("unknown integrator '" + std::string(s) + "' (expected trotter|exact)");
}

TrotterPlan plan_trotter(const SpinHamiltonian& h, double dt, TrotterOrder order) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("trotter dt must be positive");
  TrotterPlan plan;
  plan.n_sites = h.n_sites();
  plan.dt = dt;
  plan.order = order;

  struct Slot {
    std::size_t group;
    std::size_t index;
  };
  std::map<std::pair<int, int>, Slot> slots;
  // used[site] holds the colours already touching that site.
  std::vector<std::vector<bool>> used(static_cast<std::size_t>(h.n_sites()));

  const auto terms = h.terms();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const TwoBodyTerm& term = terms[t];
    const auto key = std::minmax(term.i, term.j);
    auto it = slots.find(key);
    if (it == slots.end()) {
      auto& ua = used[static_cast<std::size_t>(key.first)];
      auto& ub = used[static_cast<std::size_t>(key.second)];
      std::size_t colour = 0;
      while ((colour < ua.size() && ua[colour]) || (colour < ub.size() && ub[colour])) ++colour;
      for (auto* u : {&ua, &ub}) {
        if (u->size() <= colour) u->resize(colour + 1, false);
        (*u)[colour] = true;
      }
      if (plan.groups.size() <= colour) {
        plan.groups.resize(colour + 1);
        plan.group_terms.resize(colour + 1);
      }
      plan.groups[colour].push_back({key.first, key.second});
      it = slots.emplace(key, Slot{colour, plan.groups[colour].size() - 1}).first;
    }
    PairCoupling& pc = plan.groups[it->second.group][it->second.index];
    switch (term.kind) {
      case TermKind::zz: pc.zz += term.coeff; break;
      case TermKind::flipflop: pc.flipflop += term.coeff; break;
      case TermKind::double_quantum: pc.dq += term.coeff; break;
    }
    plan.group_terms[it->second.group].push_back(t);
  }
  return plan;
}

namespace {

// new_a = u a + v b, new_b = u b + v a, written out to avoid the
// NaN-checking complex multiply.
struct Mix2 {
  double ur, ui, vr, vi;
};

Mix2 block_factor(double diag, double offdiag, double tau) {
  // exp(-i tau [[diag, off], [off, diag]]) = e^{-i tau diag} (cos(tau off) I - i sin(tau off) X)
  const double pr = std::cos(tau * diag);
  const double pi = -std::sin(tau * diag);
  const double c = std::cos(tau * offdiag);
  const double s = std::sin(tau * offdiag);
  // v = -i s p
  return {pr * c, pi * c, pi * s, -pr * s};
}

inline void mix(std::complex<double>& a, std::complex<double>& b, const Mix2& m) {
  const double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
  a = {m.ur * ar - m.ui * ai + m.vr * br - m.vi * bi, m.ur * ai + m.ui * ar + m.vr * bi + m.vi * br};
  b = {m.ur * br - m.ui * bi + m.vr * ar - m.vi * ai, m.ur * bi + m.ui * br + m.vr * ai + m.vi * ar};
}

inline void phase(std::complex<double>& a, const Mix2& m) {
  const double ar = a.real(), ai = a.imag();
  a = {m.ur * ar - m.ui * ai, m.ur * ai + m.ui * ar};
}

enum class BlockKind { identity, phase, mix };

BlockKind kind_of(double diag, double offdiag) {
  if (offdiag != 0.0) return BlockKind::mix;
  return diag != 0.0 ? BlockKind::phase : BlockKind::identity;
}

template <BlockKind Aligned, BlockKind Anti>
void pair_kernel(std::complex<double>* amp, std::uint64_t quads, unsigned lo_bit, unsigned hi_bit,
                 std::uint64_t ma, std::uint64_t mb, const Mix2& aligned, const Mix2& anti) {
  const std::uint64_t lo_mask = (std::uint64_t{1} << lo_bit) - 1;
  const std::uint64_t hi_mask = (std::uint64_t{1} << hi_bit) - 1;
  for (std::uint64_t r = 0; r < quads; ++r) {
    // Insert zero bits at lo_bit, then hi_bit, to enumerate indices with both sites down.
    std::uint64_t k = ((r & ~lo_mask) << 1) | (r & lo_mask);
    k = ((k & ~hi_mask) << 1) | (k & hi_mask);
    if constexpr (Aligned == BlockKind::phase) {
      phase(amp[k], aligned);
      phase(amp[k | ma | mb], aligned);
    } else if constexpr (Aligned == BlockKind::mix) {
      mix(amp[k | ma | mb], amp[k], aligned);
    }
    if constexpr (Anti == BlockKind::phase) {
      phase(amp[k | ma], anti);
      phase(amp[k | mb], anti);
    } else if constexpr (Anti == BlockKind::mix) {
      mix(amp[k | ma], amp[k | mb], anti);
    }
  }
}

template <BlockKind Aligned>
void dispatch_anti(BlockKind anti_kind, std::complex<double>* amp, std::uint64_t quads, unsigned lo_bit,
                   unsigned hi_bit, std::uint64_t ma, std::uint64_t mb, const Mix2& aligned, const Mix2& anti) {
  switch (anti_kind) {
    case BlockKind::identity:
      pair_kernel<Aligned, BlockKind::identity>(amp, quads, lo_bit, hi_bit, ma, mb, aligned, anti);
      break;
    case BlockKind::phase:
      pair_kernel<Aligned, BlockKind::phase>(amp, quads, lo_bit, hi_bit, ma, mb, aligned, anti);
      break;
    case BlockKind::mix:
      pair_kernel<Aligned, BlockKind::mix>(amp, quads, lo_bit, hi_bit, ma, mb, aligned, anti);
      break;
  }
}

void apply_pair(const PairCoupling& pc, double tau, std::complex<double>* amp, std::uint64_t dim) {
  // Aligned block {up-up, down-down}: zz/4 on the diagonal, dq/2 off it.
  // Anti-aligned block {a up b down, a down b up}: -zz/4 and flipflop/2.
  const BlockKind aligned_kind = kind_of(pc.zz, pc.dq);
  const BlockKind anti_kind = kind_of(pc.zz, pc.flipflop);
  if (aligned_kind == BlockKind::identity && anti_kind == BlockKind::identity) return;
  const Mix2 aligned = block_factor(0.25 * pc.zz, 0.5 * pc.dq, tau);
  const Mix2 anti = block_factor(-0.25 * pc.zz, 0.5 * pc.flipflop, tau);

  const std::uint64_t ma = std::uint64_t{1} << pc.site_a;
  const std::uint64_t mb = std::uint64_t{1} << pc.site_b;
  const auto lo_bit = static_cast<unsigned>(std::min(pc.site_a, pc.site_b));
  const auto hi_bit = static_cast<unsigned>(std::max(pc.site_a, pc.site_b));
  const std::uint64_t quads = dim >> 2;
  switch (aligned_kind) {
    case BlockKind::identity:
      dispatch_anti<BlockKind::identity>(anti_kind, amp, quads, lo_bit, hi_bit, ma, mb, aligned, anti);
      break;
    case BlockKind::phase:
      dispatch_anti<BlockKind::phase>(anti_kind, amp, quads, lo_bit, hi_bit, ma, mb, aligned, anti);
      break;
    case BlockKind::mix:
      dispatch_anti<BlockKind::mix>(anti_kind, amp, quads, lo_bit, hi_bit, ma, mb, aligned, anti);
      break;
  }
}

struct Schedule {
  long long full_steps = 0;
  double remainder = 0.0;
};

Schedule schedule_for(double duration, double dt) {
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw std::invalid_argument("evolution duration must be finite and >= 0");
  Schedule s;
  const double ratio = duration / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
    s.full_steps = static_cast<long long>(nearest);
  } else {
    s.full_steps = static_cast<long long>(std::floor(ratio));
    s.remainder = duration - static_cast<double>(s.full_steps) * dt;
  }
  return s;
}

}  // namespace

bool is_step_multiple(double duration, double dt) {
  return schedule_for(duration, dt).remainder == 0.0;
}

void apply_group(std::span<const PairCoupling> group, double tau, std::span<std::complex<double>> amp) {
  for (const PairCoupling& pc : group) apply_pair(pc, tau, amp.data(), amp.size());
}

TrotterPropagator::TrotterPropagator(const SpinHamiltonian& h, double dt, TrotterOrder order)
    : plan_(plan_trotter(h, dt, order)) {}

void TrotterPropagator::step(std::span<std::complex<double>> amp, double h) const {
  const auto& g = plan_.groups;
  if (g.empty()) return;
  if (plan_.order == TrotterOrder::first || g.size() == 1) {
    for (const auto& group : g) apply_group(group, h, amp);
    return;
  }
  const std::size_t last = g.size() - 1;
  for (std::size_t i = 0; i < last; ++i) apply_group(g[i], 0.5 * h, amp);
  apply_group(g[last], h, amp);
  for (std::size_t i = last; i-- > 0;) apply_group(g[i], 0.5 * h, amp);
}

void TrotterPropagator::advance(Amplitudes& amp, double duration, int sign) const {
  if (static_cast<std::uint64_t>(amp.size()) != (std::uint64_t{1} << plan_.n_sites))
    throw std::invalid_argument("advance: state dimension does not match the generator");
  if (sign != 1 && sign != -1) throw std::invalid_argument("advance: sign must be +1 or -1");
  const Schedule s = schedule_for(duration, plan_.dt);
  if (plan_.groups.empty()) return;
  const std::span<std::complex<double>> view(amp.data(), static_cast<std::size_t>(amp.size()));
  const double h = sign * plan_.dt;
  const double r = sign * s.remainder;
  const bool symmetric = plan_.order == TrotterOrder::second_symmetric;
  if (r != 0.0 && symmetric) step(view, 0.5 * r);
  for (long long n = 0; n < s.full_steps; ++n) step(view, h);
  if (r != 0.0) step(view, symmetric ? 0.5 * r : r);
}

SpectralPropagator::SpectralPropagator(const SpinHamiltonian& h, int max_sites) : n_sites_(h.n_sites()) {
  if (h.n_sites() > max_sites)
    throw std::invalid_argument("dense propagation limited to n <= " + std::to_string(max_sites) +
                                " sites (requested " + std::to_string(h.n_sites()) + ")");
  const Eigen::MatrixXd dense = assemble<double>(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericsError("dense diagonalization did not converge");
  energies_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

void SpectralPropagator::advance(Amplitudes& amp, double duration, int sign) const {
  if (amp.size() != vectors_.rows())
    throw std::invalid_argument("advance: state dimension does not match the generator");
  if (!(duration >= 0.0)) throw std::invalid_argument("evolution duration must be >= 0");
  const Eigen::VectorXd re = vectors_.transpose() * amp.real();
  const Eigen::VectorXd im = vectors_.transpose() * amp.imag();
  Eigen::VectorXd out_re(re.size());
  Eigen::VectorXd out_im(re.size());
  for (Eigen::Index k = 0; k < re.size(); ++k) {
    const double theta = -sign * energies_[k] * duration;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    out_re[k] = c * re[k] - s * im[k];
    out_im[k] = c * im[k] + s * re[k];
  }
  const Eigen::VectorXd back_re = vectors_ * out_re;
  const Eigen::VectorXd back_im = vectors_ * out_im;
  for (Eigen::Index k = 0; k < amp.size(); ++k) amp[k] = {back_re[k], back_im[k]};
}

Eigen::MatrixXcd SpectralPropagator::unitary(double t) const {
  const Eigen::VectorXcd phases =
      (-std::complex<double>(0.0, 1.0) * t * energies_.cast<std::complex<double>>()).array().exp();
  const Eigen::MatrixXcd v = vectors_.cast<std::complex<double>>();
  return v * phases.asDiagonal() * v.adjoint();
}

std::unique_ptr<Propagator> make_propagator(const SpinHamiltonian& h, const PropagationSettings& s) {
  if (s.integrator == Integrator::exact) return std::make_unique<SpectralPropagator>(h);
  return std::make_unique<TrotterPropagator>(h, s.dt, s.order);
}

void settle_norm(Amplitudes& amp, std::string_view segment, EvolutionLog* log, double dt) {
  const double nrm = amp.norm();
  const double drift = std::abs(nrm - 1.0);
  if (!(drift <= kNormAbortTolerance)) {
    std::string msg = "norm drift " + std::to_string(drift) + " after segment '" + std::string(segment) +
                      "' exceeds " + std::to_string(kNormAbortTolerance);
    if (dt > 0.0) msg += "; step size dt=" + std::to_string(dt) + " is too large or the state is corrupt";
    throw NumericsError(msg);
  }
  if (drift > kNormRepairTolerance) {
    amp /= nrm;
    if (log) log->corrections.push_back({std::string(segment), drift});
  }
}

StateVector evolve(StateVector psi, std::span<const EvolutionSegment> segments,
                   const PropagationSettings& settings, EvolutionLog* log) {
  std::map<const SpinHamiltonian*, std::unique_ptr<Propagator>> cache;
  std::size_t index = 0;
  for (const EvolutionSegment& seg : segments) {
    if (seg.generator == nullptr) throw std::invalid_argument("evolution segment without generator");
    if (seg.generator->n_sites() != psi.n())
      throw std::invalid_argument("evolution segment acts on a different number of sites");
    auto& prop = cache[seg.generator];
    if (!prop) prop = make_propagator(*seg.generator, settings);
    prop->advance(psi.amplitudes(), seg.duration, seg.sign);
    settle_norm(psi.amplitudes(), "segment " + std::to_string(index++), log, settings.dt);
  }
  return psi;
}

StateVector u_le(StateVector psi, const SpinHamiltonian& h0, const SpinHamiltonian& sigma, double t_total,
                 const PropagationSettings& settings, EvolutionLog* log) {
  if (!(t_total >= 0.0)) throw std::invalid_argument("u_le: total time must be >= 0");
  const SpinHamiltonian forward = combine({{h0, 1.0}, {sigma, 1.0}});
  const SpinHamiltonian backward = combine({{h0, -1.0}, {sigma, 1.0}});
  const EvolutionSegment segments[] = {{&forward, 1, 0.5 * t_total}, {&backward, 1, 0.5 * t_total}};
  return evolve(std::move(psi), segments, settings, log);
}

StateVector dense_evolve(const StateVector& psi, const SpinHamiltonian& h, double t) {
  if (h.n_sites() != psi.n()) throw std::invalid_argument("dense_evolve: dimension mismatch");
  const SpectralPropagator prop(h);
  Amplitudes amp = psi.amplitudes();
  prop.advance(amp, std::abs(t), t < 0.0 ? -1 : 1);
  return StateVector(psi.n(), std::move(amp));
}

}  // namespace lecho
