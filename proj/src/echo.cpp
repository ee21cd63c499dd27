// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/echo.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "lecho/parallel.hpp"
#include "lecho/rng.hpp"

namespace lecho {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::typicality: return "typicality";
    case Estimator::exact_ensemble: return "exact_ensemble";
    case Estimator::sampled_ensemble: return "sampled_ensemble";
  }
  return "?";
}

std::string_view to_string(Preparation p) {
  return p == Preparation::double_quantum ? "double_quantum" : "dipolar";
}

Estimator parse_estimator(std::string_view s) {
  if (s == "typicality") return Estimator::typicality;
  if (s == "exact_ensemble") return Estimator::exact_ensemble;
  if (s == "sampled_ensemble") return Estimator::sampled_ensemble;
  throw std::invalid_argument("unknown estimator '" + std::string(s) +
                              "' (expected typicality|exact_ensemble|sampled_ensemble)");
}

Preparation parse_preparation(std::string_view s) {
  if (s == "double_quantum") return Preparation::double_quantum;
  if (s == "dipolar") return Preparation::dipolar;
  throw std::invalid_argument("unknown preparation '" + std::string(s) + "' (expected double_quantum|dipolar)");
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void EchoProtocol::validate() const {
  require(lx >= 1 && ly >= 1, "lattice: lx and ly must be >= 1");
  require(boundary != Boundary::periodic || (lx >= 3 && ly >= 3),
          "lattice: periodic boundaries need lx >= 3 and ly >= 3 (smaller sides duplicate bonds)");
  require(boundary != Boundary::cylinder || lx >= 3,
          "lattice: cylinder boundaries need lx >= 3 (a smaller side duplicates bonds)");
  require(n_sites() <= kDefaultMaxSites,
          "lattice: " + std::to_string(n_sites()) + " sites exceeds the maximum of " +
              std::to_string(kDefaultMaxSites));
  require(std::isfinite(lambda), "lambda must be finite");
  require(std::isfinite(j0) && j0 != 0.0, "j0 must be finite and nonzero");
  for (std::size_t k = 0; k < times.size(); ++k) {
    require(std::isfinite(times[k]) && times[k] >= 0.0, "times: entries must be finite and >= 0");
    require(k == 0 || times[k] > times[k - 1], "times: grid must be strictly ascending");
  }
  require(std::isfinite(t_p) && t_p >= 0.0, "t_p must be finite and >= 0");
  require(n_samples >= 1, "n_samples must be >= 1");
  require(std::isfinite(propagation.dt) && propagation.dt > 0.0, "trotter.dt must be positive");
  require(threads >= 0, "threads must be >= 0");
  if (estimator == Estimator::exact_ensemble)
    require(n_sites() <= kExactEnsembleMaxSites,
            "estimator: exact_ensemble limited to n <= " + std::to_string(kExactEnsembleMaxSites) +
                " sites (requested " + std::to_string(n_sites()) + ")");
  if (estimator == Estimator::sampled_ensemble)
    require(static_cast<std::uint64_t>(n_samples) <= (std::uint64_t{1} << (n_sites() - 1)),
            "n_samples exceeds the number of basis states with site 0 up");
}

std::string EchoProtocol::canonical() const {
  std::string s;
  s += "lx=" + std::to_string(lx);
  s += ";ly=" + std::to_string(ly);
  s += ";boundary=" + std::string(to_string(boundary));
  s += ";lambda=" + shortest(lambda);
  s += ";j0=" + shortest(j0);
  s += ";times=";
  for (std::size_t k = 0; k < times.size(); ++k) s += (k ? "," : "") + shortest(times[k]);
  s += ";t_p=" + shortest(t_p);
  s += ";preparation=" + std::string(to_string(preparation));
  s += ";n_samples=" + std::to_string(n_samples);
  s += ";seed=" + std::to_string(seed);
  s += ";integrator=" + std::string(to_string(propagation.integrator));
  s += ";dt=" + shortest(propagation.dt);
  s += ";order=" + std::string(to_string(propagation.order));
  s += ";estimator=" + std::string(to_string(estimator));
  s += ";rng=" + std::string(rng::kAlgorithm);
  return s;
}

std::string EchoProtocol::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng::fnv1a64(canonical())));
  return buf;
}

EchoModel EchoModel::build(const EchoProtocol& p) {
  p.validate();
  Lattice lat = build_lattice(p.lx, p.ly, p.boundary);
  const int n = lat.n_sites();
  SpinHamiltonian h0 = dipolar(n, lat.bonds_nn(), p.j0);
  SpinHamiltonian sigma = p.lambda * dipolar(n, lat.bonds_nnn(), p.j0);
  SpinHamiltonian fwd = combine({{h0, 1.0}, {sigma, 1.0}});
  SpinHamiltonian bwd = combine({{h0, -1.0}, {sigma, 1.0}});
  const double w = 1.0 / std::sqrt(2.0);
  SpinHamiltonian prep = p.preparation == Preparation::double_quantum
                             ? combine({{double_quantum(n, lat.bonds_nn(), p.j0), w},
                                        {double_quantum(n, lat.bonds_nnn(), p.j0), w}})
                             : combine({{dipolar(n, lat.bonds_nn(), p.j0), w},
                                        {dipolar(n, lat.bonds_nnn(), p.j0), w}});
  return EchoModel{std::move(lat), std::move(h0), std::move(sigma), std::move(fwd), std::move(bwd),
                   std::move(prep)};
}

void Series::check() const {
  if (values.size() != times.size() || std_error.size() != times.size())
    throw std::logic_error("series '" + meta.observable + "': column lengths differ");
  for (double e : std_error)
    if (!(e >= 0.0)) throw std::logic_error("series '" + meta.observable + "': negative standard error");
}

namespace {

constexpr std::string_view kNeqStream = "neq";
constexpr std::string_view kPhiStream = "phi";
constexpr std::string_view kEnsembleStream = "ensemble";

struct JobOutput {
  Eigen::MatrixXd values;  // one row per time point, one column per observable
  std::size_t corrections = 0;
};

/// Shared machinery: propagators for the three generators and the echo loop.
class EchoEngine {
 public:
  explicit EchoEngine(const EchoProtocol& p)
      : p_(p), model_(EchoModel::build(p)), n_(model_.lattice.n_sites()) {
    forward_ = make_propagator(model_.forward, p.propagation);
    backward_ = make_propagator(model_.backward, p.propagation);
    share_forward_ = p.propagation.integrator == Integrator::exact ||
                     std::all_of(p.times.begin(), p.times.end(),
                                 [&](double t) { return is_step_multiple(0.5 * t, p.propagation.dt); });
  }

  const EchoProtocol& protocol() const noexcept { return p_; }
  const EchoModel& model() const noexcept { return model_; }
  int n() const noexcept { return n_; }

  const Propagator& prep() const {
    std::call_once(prep_once_, [&] { prep_ = make_propagator(model_.prep, p_.propagation); });
    return *prep_;
  }

  void prepare(Amplitudes& amp, double t_p, int sign, EvolutionLog& log) const {
    if (t_p == 0.0) return;
    prep().advance(amp, t_p, sign);
    settle_norm(amp, sign > 0 ? "preparation" : "preparation reversal", &log, p_.propagation.dt);
  }

  /**
   * Runs U_LE(t_k) on `start` for every time of the grid and calls
   * visit(k, start, echoed). With t_p > 0, start is first prepared and, if
   * `unprepare`, the echoed state is taken back through U_p^dag.
   *
   * When every t_R is a whole number of steps the forward leg is advanced
   * incrementally (identical step sequence, hence identical result); each
   * backward leg always starts from its own reversal point.
   */
  template <typename Visit>
  void run(Amplitudes start, double t_p, bool unprepare, EvolutionLog& log, Visit&& visit) const {
    const double dt = p_.propagation.dt;
    prepare(start, t_p, +1, log);
    Amplitudes leg = start;
    double reached = 0.0;
    Amplitudes psi;
    for (std::size_t k = 0; k < p_.times.size(); ++k) {
      const double t_r = 0.5 * p_.times[k];
      if (share_forward_) {
        forward_->advance(leg, t_r - reached, +1);
        settle_norm(leg, "forward", &log, dt);
        reached = t_r;
        psi = leg;
      } else {
        psi = start;
        forward_->advance(psi, t_r, +1);
        settle_norm(psi, "forward", &log, dt);
      }
      backward_->advance(psi, t_r, +1);
      settle_norm(psi, "backward", &log, dt);
      if (unprepare) prepare(psi, t_p, -1, log);
      visit(k, static_cast<const Amplitudes&>(start), static_cast<const Amplitudes&>(psi));
    }
  }

 private:
  const EchoProtocol& p_;
  EchoModel model_;
  int n_;
  std::unique_ptr<Propagator> forward_;
  std::unique_ptr<Propagator> backward_;
  mutable std::once_flag prep_once_;
  mutable std::unique_ptr<Propagator> prep_;
  bool share_forward_ = false;
};

/// Initial basis states for the ensemble estimators, all with site 0 up.
std::vector<std::uint64_t> ensemble_indices(const EchoProtocol& p) {
  const std::uint64_t half = std::uint64_t{1} << (p.n_sites() - 1);
  std::vector<std::uint64_t> pool(half);
  for (std::uint64_t k = 0; k < half; ++k) pool[k] = 2 * k + 1;
  if (p.estimator == Estimator::exact_ensemble) return pool;
  // Partial Fisher-Yates: uniform without replacement, order fixed by the seed.
  const std::uint64_t seed = rng::derive(p.seed, kEnsembleStream);
  const auto m = static_cast<std::uint64_t>(p.n_samples);
  for (std::uint64_t k = 0; k < m; ++k) {
    const std::uint64_t pick = k + rng::below(seed, k, half - k);
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(m);
  return pool;
}

void require_ensemble(const EchoProtocol& p, std::string_view op) {
  if (p.estimator == Estimator::typicality)
    throw std::invalid_argument(std::string(op) + " requires estimator exact_ensemble or sampled_ensemble");
}

/// Initial state for job j: a random-phase state (typicality) or a basis state.
class Starts {
 public:
  Starts(const EchoProtocol& p, SectorSpec typical_sector, std::string_view stream)
      : n_(p.n_sites()), sector_(typical_sector), stream_seed_(rng::derive(p.seed, stream)) {
    if (p.estimator == Estimator::typicality) {
      count_ = static_cast<std::size_t>(p.n_samples);
    } else {
      indices_ = ensemble_indices(p);
      count_ = indices_.size();
    }
  }

  std::size_t size() const noexcept { return count_; }
  bool basis() const noexcept { return !indices_.empty(); }
  std::uint64_t index(std::size_t j) const { return indices_.at(j); }

  Amplitudes operator()(std::size_t j) const {
    if (basis()) return basis_state(n_, indices_[j]).amplitudes();
    return random_phase_state(n_, sector_, rng::derive(stream_seed_, static_cast<std::uint64_t>(j)))
        .amplitudes();
  }

 private:
  int n_;
  SectorSpec sector_;
  std::uint64_t stream_seed_;
  std::vector<std::uint64_t> indices_;
  std::size_t count_ = 0;
};

template <typename Job>
std::vector<JobOutput> run_jobs(std::size_t count, int threads, Job&& job) {
  std::vector<JobOutput> out(count);
  parallel_for(count, threads, [&](std::size_t j) { out[j] = job(j); });
  return out;
}

SeriesMetadata metadata(const EchoProtocol& p, std::string observable, std::size_t samples) {
  SeriesMetadata m;
  m.observable = std::move(observable);
  m.estimator = std::string(to_string(p.estimator));
  m.n_samples = static_cast<int>(samples);
  m.seed = p.seed;
  m.dt = p.propagation.dt;
  m.order = std::string(to_string(p.propagation.order));
  m.integrator = std::string(to_string(p.propagation.integrator));
  m.t_p = p.t_p;
  m.lambda = p.lambda;
  m.protocol_hash = p.hash();
  return m;
}

/// Mean and standard error per row of column `col`, summed in job order.
Series reduce(const std::vector<JobOutput>& jobs, Eigen::Index col, std::vector<double> times, bool exact,
              SeriesMetadata meta) {
  Series s;
  const std::size_t rows = times.size();
  const auto count = static_cast<double>(jobs.size());
  s.times = std::move(times);
  s.values.assign(rows, 0.0);
  s.std_error.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    double sum = 0.0;
    for (const JobOutput& j : jobs) sum += j.values(row, col);
    const double mean = sum / count;
    s.values[r] = mean;
    if (!exact && jobs.size() >= 2) {
      double ss = 0.0;
      for (const JobOutput& j : jobs) {
        const double d = j.values(row, col) - mean;
        ss += d * d;
      }
      s.std_error[r] = std::sqrt(ss / (count - 1.0) / count);
    }
  }
  for (const JobOutput& j : jobs) meta.norm_corrections += j.corrections;
  s.meta = std::move(meta);
  return s;
}

bool exact_estimator(const EchoProtocol& p) { return p.estimator == Estimator::exact_ensemble; }

Series polarization_echo(const EchoProtocol& p, std::string observable) {
  const EchoEngine engine(p);
  const Starts starts(p, SectorSpec::site0_up(), kNeqStream);
  const auto jobs = run_jobs(starts.size(), p.threads, [&](std::size_t j) {
    JobOutput out;
    out.values.resize(static_cast<Eigen::Index>(p.times.size()), 1);
    EvolutionLog log;
    engine.run(starts(j), p.t_p, true, log, [&](std::size_t k, const Amplitudes&, const Amplitudes& psi) {
      out.values(static_cast<Eigen::Index>(k), 0) = local_polarization(StateVector(engine.n(), psi), 0);
    });
    out.corrections = log.corrections.size();
    return out;
  });
  return reduce(jobs, 0, p.times, exact_estimator(p), metadata(p, std::move(observable), starts.size()));
}

}  // namespace

Series local_le(const EchoProtocol& p) {
  EchoProtocol q = p;
  q.t_p = 0.0;
  return polarization_echo(q, "m11");
}

Series dple(const EchoProtocol& p) { return polarization_echo(p, "m11_prepared"); }

Decomposition mb_and_x(const EchoProtocol& p) {
  require_ensemble(p, "mb_and_x");
  const EchoEngine engine(p);
  const Starts starts(p, SectorSpec::site0_up(), kNeqStream);
  const auto jobs = run_jobs(starts.size(), p.threads, [&](std::size_t j) {
    JobOutput out;
    out.values.resize(static_cast<Eigen::Index>(p.times.size()), 3);
    EvolutionLog log;
    const std::uint64_t i = starts.index(j);
    engine.run(starts(j), p.t_p, true, log, [&](std::size_t k, const Amplitudes&, const Amplitudes& psi) {
      double up = 0.0;
      double down = 0.0;
      for (Eigen::Index b = 0; b < psi.size(); b += 2) {
        down += std::norm(psi[b]);
        up += std::norm(psi[b + 1]);
      }
      const double ret = std::norm(psi[static_cast<Eigen::Index>(i)]);
      const auto row = static_cast<Eigen::Index>(k);
      out.values(row, 0) = local_polarization(StateVector(engine.n(), psi), 0);
      out.values(row, 1) = ret;
      out.values(row, 2) = (up - ret) - down;
    });
    out.corrections = log.corrections.size();
    return out;
  });
  const bool exact = exact_estimator(p);
  return {reduce(jobs, 0, p.times, exact, metadata(p, "m11", starts.size())),
          reduce(jobs, 1, p.times, exact, metadata(p, "m_mb", starts.size())),
          reduce(jobs, 2, p.times, exact, metadata(p, "m_x", starts.size()))};
}

Series many_body_le(const EchoProtocol& p) {
  require_ensemble(p, "many_body_le");
  const EchoEngine engine(p);
  const Starts starts(p, SectorSpec::site0_up(), kNeqStream);
  const auto jobs = run_jobs(starts.size(), p.threads, [&](std::size_t j) {
    JobOutput out;
    out.values.resize(static_cast<Eigen::Index>(p.times.size()), 1);
    EvolutionLog log;
    engine.run(starts(j), p.t_p, false, log,
               [&](std::size_t k, const Amplitudes& ref, const Amplitudes& psi) {
                 out.values(static_cast<Eigen::Index>(k), 0) = std::norm(ref.dot(psi));
               });
    out.corrections = log.corrections.size();
    return out;
  });
  return reduce(jobs, 0, p.times, exact_estimator(p), metadata(p, "m_mb_prepared", starts.size()));
}

Series forward_p11(const EchoProtocol& p, std::span<const double> prep_times) {
  p.validate();
  for (std::size_t k = 0; k < prep_times.size(); ++k) {
    require(std::isfinite(prep_times[k]) && prep_times[k] >= 0.0, "prep_times: entries must be finite and >= 0");
    require(k == 0 || prep_times[k] > prep_times[k - 1], "prep_times: grid must be strictly ascending");
  }
  const EchoEngine engine(p);
  const Starts starts(p, SectorSpec::site0_up(), kNeqStream);
  const auto jobs = run_jobs(starts.size(), p.threads, [&](std::size_t j) {
    JobOutput out;
    out.values.resize(static_cast<Eigen::Index>(prep_times.size()), 1);
    EvolutionLog log;
    Amplitudes psi = starts(j);
    double reached = 0.0;
    for (std::size_t k = 0; k < prep_times.size(); ++k) {
      engine.prepare(psi, prep_times[k] - reached, +1, log);
      reached = prep_times[k];
      out.values(static_cast<Eigen::Index>(k), 0) = local_polarization(StateVector(engine.n(), psi), 0);
    }
    out.corrections = log.corrections.size();
    return out;
  });
  SeriesMetadata meta = metadata(p, "p11", starts.size());
  meta.t_p = 0.0;
  return reduce(jobs, 0, {prep_times.begin(), prep_times.end()}, exact_estimator(p), std::move(meta));
}

namespace {

/// Typicality over full-space random-phase states, without preparation.
template <typename Observe>
std::vector<JobOutput> full_space_jobs(const EchoEngine& engine, Eigen::Index columns, Observe&& observe) {
  const EchoProtocol& p = engine.protocol();
  const std::uint64_t stream = rng::derive(p.seed, kPhiStream);
  return run_jobs(static_cast<std::size_t>(p.n_samples), p.threads, [&](std::size_t j) {
    JobOutput out;
    out.values.resize(static_cast<Eigen::Index>(p.times.size()), columns);
    EvolutionLog log;
    const StateVector phi =
        random_phase_state(engine.n(), SectorSpec::full(), rng::derive(stream, static_cast<std::uint64_t>(j)));
    engine.run(phi.amplitudes(), 0.0, false, log,
               [&](std::size_t k, const Amplitudes& ref, const Amplitudes& psi) {
                 observe(out.values.row(static_cast<Eigen::Index>(k)), ref, psi);
               });
    out.corrections = log.corrections.size();
    return out;
  });
}

EchoProtocol typicality_only(const EchoProtocol& p, std::string_view op) {
  if (p.estimator != Estimator::typicality)
    throw std::invalid_argument(std::string(op) + " supports only the typicality estimator");
  EchoProtocol q = p;
  q.t_p = 0.0;
  return q;
}

}  // namespace

Series global_overlap_le(const EchoProtocol& p) {
  const EchoProtocol q = typicality_only(p, "global_overlap_le");
  const EchoEngine engine(q);
  const auto jobs = full_space_jobs(engine, 1, [](auto row, const Amplitudes& ref, const Amplitudes& psi) {
    row(0) = std::norm(ref.dot(psi));
  });
  return reduce(jobs, 0, q.times, false, metadata(q, "global_overlap", jobs.size()));
}

std::vector<double> sector_return_probabilities(const StateVector& reference, const StateVector& echoed) {
  if (reference.n() != echoed.n()) throw std::invalid_argument("sector_return_probabilities: dimension mismatch");
  const int n = reference.n();
  std::vector<std::complex<double>> amp(static_cast<std::size_t>(n) + 1);
  const Amplitudes& a = reference.amplitudes();
  const Amplitudes& b = echoed.amplitudes();
  for (Eigen::Index k = 0; k < a.size(); ++k)
    amp[static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(k)))] += std::conj(a[k]) * b[k];
  std::vector<double> out(amp.size());
  for (std::size_t s = 0; s < amp.size(); ++s) {
    // Rescale the projected overlap to that of the normalized sector state.
    const double inv_weight = 1.0 / sector_weight(n, 2 * static_cast<int>(s) - n);
    out[s] = std::norm(amp[s] * inv_weight);
  }
  return out;
}

Series subspace_dple(const EchoProtocol& p, double m_inf) {
  require(std::isfinite(m_inf), "subspace_dple: m_inf must be finite");
  const EchoProtocol q = typicality_only(p, "subspace_dple");
  const EchoEngine engine(q);
  if (!engine.model().forward.conserves_mz() || !engine.model().backward.conserves_mz())
    throw std::invalid_argument("subspace_dple: echo generators mix m_z sectors");
  const int n = engine.n();
  const auto jobs = full_space_jobs(engine, 1, [&](auto row, const Amplitudes& ref, const Amplitudes& psi) {
    const auto probs = sector_return_probabilities(StateVector(n, ref), StateVector(n, psi));
    double sum = 0.0;
    for (std::size_t s = 0; s < probs.size(); ++s) sum += sector_weight(n, 2 * static_cast<int>(s) - n) * probs[s];
    row(0) = (1.0 - m_inf) * sum + m_inf;
  });
  return reduce(jobs, 0, q.times, false, metadata(q, "subspace_dple", jobs.size()));
}

}  // namespace lecho
