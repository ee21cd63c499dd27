// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/cli/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "lecho/cli/series_io.hpp"
#include "lecho/fit.hpp"
#include "lecho/oracle.hpp"
#include "lecho/rng.hpp"

#ifndef LECHO_VERSION
#define LECHO_VERSION "unknown"
#endif

namespace lecho::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Output {
  Series series;
  std::string file;
};

struct RunRecord {
  std::vector<Output> outputs;
  json extra = json::object();
};

std::optional<double> tp_suffix(double t_p, bool always) {
  if (always || t_p > 0.0) return t_p;
  return std::nullopt;
}

class Session {
 public:
  Session(const RunConfig& c, std::ostream& err) : c_(c), err_(err) {}

  template <typename F>
  Series timed(const std::string& label, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Series s = f();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err_ << "lecho: " << label << " done in " << format_double(std::round(secs * 10.0) / 10.0) << " s";
    if (s.meta.norm_corrections) err_ << " (" << s.meta.norm_corrections << " norm corrections)";
    err_ << '\n';
    return s;
  }

  std::optional<double> lambda_suffix(double lambda) const {
    if (c_.lambdas.size() > 1 || c_.experiment == Experiment::lambda_sweep) return lambda;
    return std::nullopt;
  }

  RunRecord execute() {
    RunRecord r;
    const double lambda0 = c_.lambdas.front();
    switch (c_.experiment) {
      case Experiment::local_le:
        for (double l : c_.lambdas) {
          const EchoProtocol p = protocol_for(c_, l, 0.0);
          r.outputs.push_back({timed("local_le lambda=" + format_double(l), [&] { return local_le(p); }),
                               series_file_name("local_le", std::nullopt, lambda_suffix(l))});
        }
        break;
      case Experiment::decomposition:
        for (double l : c_.lambdas)
          for (double tp : c_.t_p) {
            const EchoProtocol p = protocol_for(c_, l, tp);
            Decomposition d;
            timed("decomposition lambda=" + format_double(l) + " t_p=" + format_double(tp), [&] {
              d = mb_and_x(p);
              return d.m11;
            });
            const auto tps = tp_suffix(tp, false);
            r.outputs.push_back({std::move(d.m11), series_file_name("decomposition_m11", tps, lambda_suffix(l))});
            r.outputs.push_back({std::move(d.mb), series_file_name("decomposition_mb", tps, lambda_suffix(l))});
            r.outputs.push_back({std::move(d.mx), series_file_name("decomposition_mx", tps, lambda_suffix(l))});
          }
        break;
      case Experiment::p11: {
        const EchoProtocol p = protocol_for(c_, lambda0, 0.0);
        const std::vector<double> grid = c_.prep_times.values();
        r.outputs.push_back({timed("p11", [&] { return forward_p11(p, grid); }), series_file_name("p11")});
        break;
      }
      case Experiment::dple:
        for (double l : c_.lambdas)
          for (double tp : c_.t_p) {
            const EchoProtocol p = protocol_for(c_, l, tp);
            r.outputs.push_back({timed("dple t_p=" + format_double(tp), [&] { return dple(p); }),
                                 series_file_name("dple", tp, lambda_suffix(l))});
          }
        break;
      case Experiment::global_overlap:
        for (double l : c_.lambdas) {
          const EchoProtocol p = protocol_for(c_, l, 0.0);
          r.outputs.push_back({timed("global_overlap", [&] { return global_overlap_le(p); }),
                               series_file_name("global_overlap", std::nullopt, lambda_suffix(l))});
          for (double tp : c_.t_p) {
            if (tp <= 0.0) continue;
            EchoProtocol q = protocol_for(c_, l, tp);
            r.outputs.push_back({timed("dple t_p=" + format_double(tp), [&] { return dple(q); }),
                                 series_file_name("dple", tp, lambda_suffix(l))});
            q.estimator = Estimator::sampled_ensemble;
            q.n_samples = c_.mb_samples;
            r.outputs.push_back({timed("many-body echo t_p=" + format_double(tp), [&] { return many_body_le(q); }),
                                 series_file_name("m_mb", tp, lambda_suffix(l))});
          }
        }
        break;
      case Experiment::subspace_dple: {
        const EchoProtocol p = protocol_for(c_, lambda0, 0.0);
        double m_inf = 0.0;
        if (c_.m_inf) {
          m_inf = *c_.m_inf;
          r.extra["m_inf"] = {{"value", m_inf}, {"source", "config"}};
        } else {
          Series le = timed("local_le for plateau", [&] { return local_le(p); });
          const FitResult fr = fit_plateau(le, c_.plateau_window);
          m_inf = fr.value;
          r.extra["m_inf"] = {{"value", m_inf},
                              {"source", "plateau fit of local_le"},
                              {"window", {fr.window.t_min, fr.window.t_max}},
                              {"spread", fr.uncertainty},
                              {"n_points", fr.n_points}};
          r.outputs.push_back({std::move(le), series_file_name("local_le")});
        }
        r.outputs.push_back(
            {timed("subspace_dple", [&] { return subspace_dple(p, m_inf); }), series_file_name("subspace_dple")});
        for (double tp : c_.t_p) {
          if (tp <= 0.0) continue;
          const EchoProtocol q = protocol_for(c_, lambda0, tp);
          r.outputs.push_back({timed("dple t_p=" + format_double(tp), [&] { return dple(q); }),
                               series_file_name("dple", tp)});
        }
        break;
      }
      case Experiment::oracle_crosscheck: crosscheck(r); break;
      case Experiment::lambda_sweep: {
        json rates = json::array();
        std::string csv = "lambda,rate,stderr,r_squared,well_conditioned\n";
        for (double l : c_.lambdas) {
          const EchoProtocol p = protocol_for(c_, l, 0.0);
          Series s = timed("local_le lambda=" + format_double(l), [&] { return local_le(p); });
          const FitResult fr = fit_exponential(s, c_.fit_window);
          if (!fr.well_conditioned)
            err_ << "lecho: warning: rate fit at lambda=" << format_double(l) << ": " << fr.diagnostic << '\n';
          csv += format_double(l) + "," + format_double(fr.value) + "," + format_double(fr.uncertainty) + "," +
                 format_double(fr.r_squared) + "," + (fr.well_conditioned ? "true" : "false") + "\n";
          rates.push_back({{"lambda", l},
                           {"rate", fr.value},
                           {"stderr", fr.uncertainty},
                           {"r_squared", fr.r_squared},
                           {"diagnostic", fr.diagnostic}});
          r.outputs.push_back({std::move(s), series_file_name("local_le", std::nullopt, l)});
        }
        r.extra["rates"] = rates;
        r.extra["rates_csv"] = csv;
        break;
      }
    }
    return r;
  }

 private:
  void crosscheck(RunRecord& r) {
    const EchoProtocol p = protocol_for(c_, c_.lambdas.front(), c_.t_p.front());
    const Series fast = timed("fast path", [&] { return dple(p); });
    const Series dm = timed("oracle density_matrix_le", [&] { return oracle::density_matrix_le(p); });
    const Series hz = timed("oracle heisenberg_autocorrelation", [&] { return oracle::heisenberg_autocorrelation(p); });
    double worst = 0.0;
    for (std::size_t k = 0; k < fast.size(); ++k) {
      worst = std::max({worst, std::abs(fast.values[k] - dm.values[k]), std::abs(fast.values[k] - hz.values[k]),
                        std::abs(dm.values[k] - hz.values[k])});
    }
    json checks = {{"max_abs_deviation_m11", worst}};
    r.outputs.push_back({fast, series_file_name("crosscheck_m11", tp_suffix(p.t_p, false))});
    r.outputs.push_back({dm, series_file_name("oracle_density_matrix_le", tp_suffix(p.t_p, false))});
    r.outputs.push_back({hz, series_file_name("oracle_heisenberg_autocorrelation", tp_suffix(p.t_p, false))});
    if (p.estimator != Estimator::typicality) {
      Decomposition d = mb_and_x(p);
      const Series bf = timed("oracle brute_force_mx", [&] { return oracle::brute_force_mx(p); });
      double worst_x = 0.0;
      for (std::size_t k = 0; k < bf.size(); ++k) worst_x = std::max(worst_x, std::abs(bf.values[k] - d.mx.values[k]));
      checks["max_abs_deviation_mx"] = worst_x;
      worst = std::max(worst, worst_x);
      r.outputs.push_back({std::move(d.mx), series_file_name("crosscheck_mx", tp_suffix(p.t_p, false))});
      r.outputs.push_back({bf, series_file_name("oracle_brute_force_mx", tp_suffix(p.t_p, false))});
    }
    checks["tolerance"] = c_.oracle_tolerance;
    checks["pass"] = worst <= c_.oracle_tolerance;
    r.extra["crosscheck"] = checks;
  }

  const RunConfig& c_;
  std::ostream& err_;
};

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Refuses to write into a directory holding results of another config.
void claim_output(const fs::path& dir, const std::string& hash) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output: cannot create " + dir.string() + ": " + ec.message());
  const fs::path meta = dir / "metadata.json";
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("config_hash"))
      throw ConfigError("output: " + meta.string() + " is unreadable; refusing to overwrite");
    if (j["config_hash"] != hash)
      throw ConfigError("output: " + dir.string() + " holds results of config " +
                        j["config_hash"].get<std::string>() + ", not " + hash +
                        "; refusing to mix provenance (choose another output path)");
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path());
    std::string first;
    std::getline(in, first);
    const auto pos = first.find("config_hash=");
    if (pos == std::string::npos) continue;
    const std::string other = first.substr(pos + 12, first.find(' ', pos) - pos - 12);
    if (other != hash)
      throw ConfigError("output: " + entry.path().string() + " comes from config " + other +
                        "; refusing to mix provenance");
  }
  const fs::path probe = dir / ".lecho_write_probe";
  {
    std::ofstream t(probe);
    if (!t) throw ConfigError("output: directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

json base_metadata(const RunConfig& c, const std::string& hash, const std::string& command) {
  return {{"command", command},
          {"config", json::parse(resolved_json(c))},
          {"config_hash", hash},
          {"code_version", LECHO_VERSION},
          {"rng", {{"algorithm", rng::kAlgorithm}, {"seed_rule", rng::kSeedRule}, {"root_seed", c.seed}}},
          {"integrator",
           {{"kind", to_string(c.propagation.integrator)},
            {"dt", c.propagation.dt},
            {"order", to_string(c.propagation.order)},
            {"remainder", "two half-remainder steps, one at each end of a segment"}}},
          {"conventions",
           {{"units", "times in hbar/J0, hbar = 1"},
            {"basis", "bit b of a basis index is site b (row-major y*lx+x); set bit = spin up"},
            {"measured_site", 0},
            {"sector_weight", "D_mz = C(n, n/2 + m_z) / 2^n"},
            {"preparation_reversal", "U_p^dag applied as evolution under -H_p without the perturbation"}}}};
}

json file_entry(const Output& o) {
  const SeriesMetadata& m = o.series.meta;
  return {{"file", o.file},
          {"observable", m.observable},
          {"estimator", m.estimator},
          {"n_samples", m.n_samples},
          {"seed", m.seed},
          {"t_p", m.t_p},
          {"lambda", m.lambda},
          {"dt", m.dt},
          {"integrator", m.integrator},
          {"order", m.order},
          {"protocol_hash", m.protocol_hash},
          {"norm_corrections", m.norm_corrections},
          {"points", o.series.size()}};
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "lecho: error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "lecho: error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericsError& e) {
    err << "lecho: numerics error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const FitError& e) {
    err << "lecho: fit error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "lecho: runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

void write_metadata(const fs::path& dir, json meta) {
  std::ofstream out(dir / "metadata.json");
  out << meta.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + (dir / "metadata.json").string());
}

}  // namespace

int report(const std::vector<Diagnostic>& diags, std::ostream& err) {
  bool failed = false;
  for (const Diagnostic& d : diags) {
    err << d.str() << '\n';
    failed = failed || !d.warning;
  }
  return failed ? kExitConfig : kExitOk;
}

namespace {

// Warnings were already shown when the file was loaded.
int report_errors(const RunConfig& c, std::ostream& err) {
  std::vector<Diagnostic> errors = check(c);
  std::erase_if(errors, [](const Diagnostic& d) { return d.warning; });
  return report(errors, err);
}

}  // namespace

int run(const RunConfig& c, const RunOptions& o) {
  std::ostream& out = o.out ? *o.out : std::cout;
  std::ostream& err = o.err ? *o.err : std::cerr;
  if (report_errors(c, err) != kExitOk) return kExitConfig;
  const std::string hash = config_hash(c);
  if (o.dry_run) {
    out << resolved_toml(c) << "\n\n# config_hash = " << hash << "\n# estimated peak memory: "
        << format_double(std::ceil(static_cast<double>(memory_estimate_bytes(c)) / (1 << 20))) << " MiB\n";
    return kExitOk;
  }
  return guarded(err, [&] {
    claim_output(c.output, hash);
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    Session session(c, err);
    RunRecord rec = session.execute();
    json meta = base_metadata(c, hash, "run");
    meta["started_utc"] = started;
    json files = json::array();
    for (const Output& out_series : rec.outputs) {
      write_series_csv(out_series.series, c.output / out_series.file, hash);
      files.push_back(file_entry(out_series));
    }
    if (rec.extra.contains("rates_csv")) {
      std::ofstream rates(c.output / "rates.csv", std::ios::binary);
      rates << "# observable=rate units=J0/hbar fit=exponential_rate window=" << format_double(c.fit_window.t_min)
            << ":" << format_double(c.fit_window.t_max) << " config_hash=" << hash << "\n"
            << rec.extra["rates_csv"].get<std::string>();
      if (!rates) throw std::runtime_error("cannot write rates.csv");
      rec.extra.erase("rates_csv");
      files.push_back({{"file", "rates.csv"}, {"observable", "rate"}});
    }
    meta["files"] = files;
    for (auto& [k, v] : rec.extra.items()) meta[k] = v;
    meta["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_metadata(c.output, meta);
    out << "lecho: wrote " << files.size() << " files to " << c.output.string() << '\n';
    if (meta.contains("crosscheck") && !meta["crosscheck"]["pass"].get<bool>()) {
      err << "lecho: error: oracle crosscheck deviation " << meta["crosscheck"]["max_abs_deviation_m11"]
          << " exceeds tolerance " << c.oracle_tolerance << '\n';
      return kExitRuntime;
    }
    return kExitOk;
  });
}

int run_oracle(const RunConfig& c, const RunOptions& o) {
  std::ostream& out = o.out ? *o.out : std::cout;
  std::ostream& err = o.err ? *o.err : std::cerr;
  if (report_errors(c, err) != kExitOk) return kExitConfig;
  const int n = c.lx * c.ly;
  if (n > oracle::kMaxSites) {
    err << "lecho: error: lattice: oracle limited to n <= " << oracle::kMaxSites << " sites (requested " << n
        << ")\n";
    return kExitConfig;
  }
  const double mib = static_cast<double>(oracle::memory_estimate_bytes(n)) / (1 << 20);
  out << "lecho: oracle on " << n << " sites, estimated memory " << format_double(std::ceil(mib)) << " MiB\n";
  if (o.dry_run) return kExitOk;
  const std::string hash = config_hash(c);
  return guarded(err, [&] {
    claim_output(c.output, hash);
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    const EchoProtocol p = protocol_for(c, c.lambdas.front(), c.t_p.front());
    Session session(c, err);
    std::vector<Output> outputs;
    const auto suffix = tp_suffix(p.t_p, false);
    outputs.push_back({session.timed("oracle density_matrix_le", [&] { return oracle::density_matrix_le(p); }),
                       series_file_name("oracle_density_matrix_le", suffix)});
    outputs.push_back(
        {session.timed("oracle heisenberg_autocorrelation", [&] { return oracle::heisenberg_autocorrelation(p); }),
         series_file_name("oracle_heisenberg_autocorrelation", suffix)});
    outputs.push_back({session.timed("oracle brute_force_mx", [&] { return oracle::brute_force_mx(p); }),
                       series_file_name("oracle_brute_force_mx", suffix)});
    json meta = base_metadata(c, hash, "oracle");
    meta["started_utc"] = started;
    json files = json::array();
    for (const Output& s : outputs) {
      write_series_csv(s.series, c.output / s.file, hash);
      files.push_back(file_entry(s));
    }
    meta["files"] = files;
    meta["oracle"] = {{"max_sites", oracle::kMaxSites}, {"memory_estimate_bytes", oracle::memory_estimate_bytes(n)}};
    meta["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_metadata(c.output, meta);
    out << "lecho: wrote " << files.size() << " files to " << c.output.string() << '\n';
    return kExitOk;
  });
}

}  // namespace lecho::cli
