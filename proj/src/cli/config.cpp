// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/cli/config.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lecho/oracle.hpp"
#include "lecho/parallel.hpp"
#include "lecho/rng.hpp"

namespace lecho::cli {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::local_le: return "local_le";
    case Experiment::decomposition: return "decomposition";
    case Experiment::p11: return "p11";
    case Experiment::dple: return "dple";
    case Experiment::global_overlap: return "global_overlap";
    case Experiment::subspace_dple: return "subspace_dple";
    case Experiment::oracle_crosscheck: return "oracle_crosscheck";
    case Experiment::lambda_sweep: return "lambda_sweep";
  }
  return "?";
}

std::string_view to_string(Spacing s) { return s == Spacing::linear ? "linear" : "log"; }

namespace {

Experiment parse_experiment(std::string_view s) {
  for (auto e : {Experiment::local_le, Experiment::decomposition, Experiment::p11, Experiment::dple,
                 Experiment::global_overlap, Experiment::subspace_dple, Experiment::oracle_crosscheck,
                 Experiment::lambda_sweep})
    if (to_string(e) == s) return e;
  throw std::invalid_argument("unknown experiment '" + std::string(s) +
                              "' (expected local_le|decomposition|p11|dple|global_overlap|subspace_dple|"
                              "oracle_crosscheck|lambda_sweep)");
}

Spacing parse_spacing(std::string_view s) {
  if (s == "linear") return Spacing::linear;
  if (s == "log") return Spacing::log;
  throw std::invalid_argument("unknown spacing '" + std::string(s) + "' (expected linear|log)");
}

/// Typed extraction with location-aware diagnostics and unknown-key tracking.
class Reader {
 public:
  Reader(const toml::table& root, std::string source, std::vector<Diagnostic>& diags)
      : root_(root), source_(std::move(source)), diags_(diags) {}

  void number(std::string_view path, double& out) {
    const toml::node* n = find(path);
    if (!n) return;
    if (!n->is_number()) return fail(n, path, "expected a number");
    out = n->value<double>().value_or(out);
  }

  template <typename Int>
  void integer(std::string_view path, Int& out) {
    const toml::node* n = find(path);
    if (!n) return;
    if (!n->is_integer()) return fail(n, path, "expected an integer");
    const std::int64_t v = *n->value<std::int64_t>();
    if constexpr (std::is_unsigned_v<Int>) {
      if (v < 0) return fail(n, path, "must be >= 0");
    }
    out = static_cast<Int>(v);
  }

  void boolean(std::string_view path, bool& out) {
    const toml::node* n = find(path);
    if (!n) return;
    if (!n->is_boolean()) return fail(n, path, "expected true or false");
    out = *n->value<bool>();
  }

  template <typename T, typename Parse>
  void word(std::string_view path, T& out, Parse parse) {
    const toml::node* n = find(path);
    if (!n) return;
    if (!n->is_string()) return fail(n, path, "expected a string");
    try {
      out = parse(*n->value<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(n, path, e.what());
    }
  }

  void text(std::string_view path, std::string& out) {
    word(path, out, [](const std::string& s) { return s; });
  }

  /// A number or an array of numbers.
  void numbers(std::string_view path, std::vector<double>& out) {
    const toml::node* n = find(path);
    if (!n) return;
    if (n->is_number()) {
      out = {*n->value<double>()};
      return;
    }
    const toml::array* arr = n->as_array();
    if (!arr) return fail(n, path, "expected a number or an array of numbers");
    std::vector<double> vals;
    for (const toml::node& e : *arr) {
      if (!e.is_number()) return fail(&e, path, "array entries must be numbers");
      vals.push_back(*e.value<double>());
    }
    out = std::move(vals);
  }

  void grid(std::string_view prefix, TimeGrid& g) {
    const std::string p(prefix);
    number(p + ".t_min", g.t_min);
    number(p + ".t_max", g.t_max);
    integer(p + ".n_points", g.n_points);
    word(p + ".spacing", g.spacing, parse_spacing);
    boolean(p + ".include_zero", g.include_zero);
  }

  /// Reports every leaf key that no reader asked for.
  void unknown_keys() { walk(root_, ""); }

 private:
  const toml::node* find(std::string_view path) {
    seen_.insert(std::string(path));
    const toml::node* n = root_.at_path(path).node();
    return n;
  }

  void fail(const toml::node* n, std::string_view path, std::string message) {
    Diagnostic d;
    d.source = source_;
    if (n) {
      const auto& src = n->source();
      if (src.path && !src.path->empty()) d.source = *src.path;
      d.line = static_cast<int>(src.begin.line);
      d.column = static_cast<int>(src.begin.column);
    }
    d.field = std::string(path);
    d.message = std::move(message);
    diags_.push_back(std::move(d));
  }

  void walk(const toml::table& t, const std::string& prefix) {
    for (const auto& [key, node] : t) {
      const std::string path = prefix.empty() ? std::string(key.str()) : prefix + "." + std::string(key.str());
      if (const toml::table* sub = node.as_table()) {
        walk(*sub, path);
      } else if (!seen_.count(path)) {
        fail(&node, path, "unknown key");
      }
    }
  }

  const toml::table& root_;
  std::string source_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> seen_;
};

void merge(toml::table& into, const toml::table& from) {
  for (const auto& [key, node] : from) {
    toml::node* existing = into.get(key);
    if (existing && existing->is_table() && node.is_table()) {
      merge(*existing->as_table(), *node.as_table());
    } else {
      into.insert_or_assign(key, node);
    }
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void add(std::vector<Diagnostic>& out, std::string field, std::string message, bool warning = false) {
  Diagnostic d;
  d.field = std::move(field);
  d.message = std::move(message);
  d.warning = warning;
  out.push_back(std::move(d));
}

void check_grid(std::vector<Diagnostic>& out, const std::string& prefix, const TimeGrid& g) {
  if (!std::isfinite(g.t_min) || g.t_min < 0.0) add(out, prefix + ".t_min", "must be finite and >= 0");
  if (!std::isfinite(g.t_max) || g.t_max < g.t_min) add(out, prefix + ".t_max", "must be finite and >= t_min");
  if (g.n_points < 1) add(out, prefix + ".n_points", "must be >= 1");
  if (g.n_points > 1 && !(g.t_max > g.t_min))
    add(out, prefix + ".t_max", "must exceed t_min when n_points > 1");
  if (g.spacing == Spacing::log && !(g.t_min > 0.0))
    add(out, prefix + ".t_min", "log spacing needs t_min > 0");
}

void check_window(std::vector<Diagnostic>& out, const std::string& prefix, FitWindow w,
                  const std::vector<double>& times) {
  if (!(w.t_min < w.t_max)) {
    add(out, prefix + ".t_max", "must exceed t_min");
    return;
  }
  if (times.empty() || w.t_min < times.front() || w.t_max > times.back())
    add(out, prefix, "window must lie inside the times grid");
}

toml::table grid_table(const TimeGrid& g) {
  return toml::table{{"t_min", g.t_min},
                     {"t_max", g.t_max},
                     {"n_points", g.n_points},
                     {"spacing", std::string(to_string(g.spacing))},
                     {"include_zero", g.include_zero}};
}

toml::array number_array(const std::vector<double>& v) {
  toml::array a;
  for (double x : v) a.push_back(x);
  return a;
}

toml::table to_table(const RunConfig& c, bool with_local) {
  toml::table plateau{{"t_min", c.plateau_window.t_min}, {"t_max", c.plateau_window.t_max}};
  if (c.m_inf) plateau.insert("m_inf", *c.m_inf);
  toml::table prep{{"kind", std::string(to_string(c.preparation))}, {"t_p", number_array(c.t_p)}};
  prep.insert("grid", grid_table(c.prep_times));
  toml::table t{
      {"experiment", std::string(to_string(c.experiment))},
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"n_samples", c.n_samples},
      {"mb_samples", c.mb_samples},
      {"estimator", std::string(to_string(c.estimator))},
      {"lattice",
       toml::table{{"lx", c.lx}, {"ly", c.ly}, {"boundary", std::string(to_string(c.boundary))}}},
      {"model", toml::table{{"lambda", number_array(c.lambdas)}, {"j0", c.j0}}},
      {"times", grid_table(c.times)},
      {"preparation", std::move(prep)},
      {"trotter", toml::table{{"integrator", std::string(to_string(c.propagation.integrator))},
                              {"dt", c.propagation.dt},
                              {"order", std::string(to_string(c.propagation.order))}}},
      {"fit", toml::table{{"t_min", c.fit_window.t_min}, {"t_max", c.fit_window.t_max}}},
      {"plateau", std::move(plateau)},
      {"oracle", toml::table{{"tolerance", c.oracle_tolerance}}},
  };
  if (with_local) {
    t.insert("output", c.output.string());
    t.insert("threads", c.threads);
  }
  return t;
}

}  // namespace

std::vector<double> TimeGrid::values() const {
  std::vector<double> v;
  if (n_points < 1) return v;
  if (spacing == Spacing::log && include_zero && t_min > 0.0) v.push_back(0.0);
  if (n_points == 1) {
    v.push_back(t_min);
    return v;
  }
  const double span = static_cast<double>(n_points - 1);
  for (int k = 0; k < n_points; ++k) {
    const double f = static_cast<double>(k) / span;
    if (spacing == Spacing::linear) {
      v.push_back(k == n_points - 1 ? t_max : t_min + (t_max - t_min) * f);
    } else {
      v.push_back(k == n_points - 1 ? t_max : t_min * std::pow(t_max / t_min, f));
    }
  }
  return v;
}

std::string Diagnostic::str() const {
  std::string s = source.empty() ? "<config>" : source;
  if (line > 0) s += ":" + std::to_string(line) + ":" + std::to_string(column);
  s += warning ? ": warning: " : ": error: ";
  if (!field.empty()) s += field + ": ";
  return s + message;
}

bool LoadResult::ok() const {
  for (const Diagnostic& d : diagnostics)
    if (!d.warning) return false;
  return true;
}

LoadResult parse_config(std::string_view text, std::string_view source, std::span<const std::string> overrides) {
  LoadResult r;
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    Diagnostic d;
    d.source = std::string(source);
    d.line = static_cast<int>(e.source().begin.line);
    d.column = static_cast<int>(e.source().begin.column);
    d.message = std::string(e.description());
    r.diagnostics.push_back(std::move(d));
    return r;
  }

  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    Diagnostic d;
    d.source = "--set " + o;
    if (eq == std::string::npos || trim(o.substr(0, eq)).empty()) {
      d.message = "expected key=value";
      r.diagnostics.push_back(std::move(d));
      continue;
    }
    const std::string key = trim(o.substr(0, eq));
    const std::string value = trim(o.substr(eq + 1));
    try {
      merge(root, toml::parse(key + " = " + value, d.source));
    } catch (const toml::parse_error&) {
      try {
        // Bare words are strings.
        merge(root, toml::parse(key + " = \"" + value + "\"", d.source));
      } catch (const toml::parse_error& e) {
        d.field = key;
        d.message = std::string(e.description());
        r.diagnostics.push_back(std::move(d));
      }
    }
  }

  RunConfig& c = r.config;
  Reader rd(root, std::string(source), r.diagnostics);
  rd.word("experiment", c.experiment, parse_experiment);
  rd.integer("seed", c.seed);
  rd.integer("n_samples", c.n_samples);
  rd.integer("mb_samples", c.mb_samples);
  rd.word("estimator", c.estimator, parse_estimator);
  rd.integer("threads", c.threads);
  std::string output = c.output.string();
  rd.text("output", output);
  c.output = output;
  rd.integer("lattice.lx", c.lx);
  rd.integer("lattice.ly", c.ly);
  rd.word("lattice.boundary", c.boundary, parse_boundary);
  rd.numbers("model.lambda", c.lambdas);
  rd.number("model.j0", c.j0);
  rd.grid("times", c.times);
  rd.word("preparation.kind", c.preparation, parse_preparation);
  rd.numbers("preparation.t_p", c.t_p);
  rd.grid("preparation.grid", c.prep_times);
  rd.word("trotter.integrator", c.propagation.integrator, parse_integrator);
  rd.number("trotter.dt", c.propagation.dt);
  rd.word("trotter.order", c.propagation.order, parse_trotter_order);
  rd.number("fit.t_min", c.fit_window.t_min);
  rd.number("fit.t_max", c.fit_window.t_max);
  rd.number("plateau.t_min", c.plateau_window.t_min);
  rd.number("plateau.t_max", c.plateau_window.t_max);
  if (root.at_path("plateau.m_inf")) {
    double m = 0.0;
    rd.number("plateau.m_inf", m);
    c.m_inf = m;
  }
  rd.number("oracle.tolerance", c.oracle_tolerance);
  rd.unknown_keys();

  // Semantic problems, located at the offending key when it is in the file.
  for (Diagnostic d : check(c)) {
    std::string probe = d.field;
    const toml::node* n = nullptr;
    while (!probe.empty() && !(n = root.at_path(probe).node())) {
      const auto dot = probe.rfind('.');
      probe = dot == std::string::npos ? std::string() : probe.substr(0, dot);
    }
    d.source = std::string(source);
    if (n) {
      const auto& src = n->source();
      if (src.path && !src.path->empty()) d.source = *src.path;
      d.line = static_cast<int>(src.begin.line);
      d.column = static_cast<int>(src.begin.column);
    }
    r.diagnostics.push_back(std::move(d));
  }
  return r;
}

LoadResult load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) {
    LoadResult r;
    Diagnostic d;
    d.source = path.string();
    d.message = "cannot open config file";
    r.diagnostics.push_back(std::move(d));
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), overrides);
}

std::vector<Diagnostic> check(const RunConfig& c) {
  std::vector<Diagnostic> out;
  if (c.lx < 1) add(out, "lattice.lx", "must be >= 1");
  if (c.ly < 1) add(out, "lattice.ly", "must be >= 1");
  if (c.boundary == Boundary::periodic && c.lx >= 1 && c.ly >= 1 && (c.lx < 3 || c.ly < 3))
    add(out, c.lx < 3 ? "lattice.lx" : "lattice.ly",
        "periodic boundaries need lx >= 3 and ly >= 3; a shorter side wraps onto an existing bond "
        "(duplicate-bond rule)");
  if (c.boundary == Boundary::cylinder && c.lx >= 1 && c.lx < 3)
    add(out, "lattice.lx", "cylinder boundaries need lx >= 3 (duplicate-bond rule)");
  const int n = c.lx * c.ly;
  if (c.lx >= 1 && c.ly >= 1 && n > kDefaultMaxSites)
    add(out, "lattice", std::to_string(n) + " sites exceeds the maximum of " + std::to_string(kDefaultMaxSites));
  if (c.lambdas.empty()) add(out, "model.lambda", "needs at least one value");
  for (double l : c.lambdas)
    if (!std::isfinite(l)) add(out, "model.lambda", "values must be finite");
  if (!std::isfinite(c.j0) || c.j0 == 0.0) add(out, "model.j0", "must be finite and nonzero");
  check_grid(out, "times", c.times);
  if (c.t_p.empty()) add(out, "preparation.t_p", "needs at least one value");
  for (double t : c.t_p)
    if (!std::isfinite(t) || t < 0.0) add(out, "preparation.t_p", "values must be finite and >= 0");
  if (c.experiment == Experiment::p11) check_grid(out, "preparation.grid", c.prep_times);
  if (!std::isfinite(c.propagation.dt) || !(c.propagation.dt > 0.0)) add(out, "trotter.dt", "must be positive");
  if (c.n_samples < 1) add(out, "n_samples", "must be >= 1");
  if (c.mb_samples < 1) add(out, "mb_samples", "must be >= 1");
  if (c.threads < 0) add(out, "threads", "must be >= 0 (0 means all cores)");
  if (c.output.empty()) add(out, "output", "must not be empty");
  if (!(c.oracle_tolerance > 0.0)) add(out, "oracle.tolerance", "must be positive");

  if (c.estimator == Estimator::exact_ensemble && n > kExactEnsembleMaxSites)
    add(out, "estimator",
        "exact_ensemble beyond n = " + std::to_string(kExactEnsembleMaxSites) + " sites is not supported", true);
  if (c.estimator == Estimator::sampled_ensemble && n >= 1 && n <= 62 &&
      static_cast<std::uint64_t>(std::max(c.n_samples, 1)) > (std::uint64_t{1} << (n - 1)))
    add(out, "n_samples", "exceeds the number of basis states with site 0 up");
  if (c.propagation.integrator == Integrator::exact && n > kDenseMaxSites)
    add(out, "trotter.integrator", "exact integrator limited to n <= " + std::to_string(kDenseMaxSites));

  const std::vector<double> times = c.times.values();
  switch (c.experiment) {
    case Experiment::decomposition:
      if (c.estimator == Estimator::typicality)
        add(out, "estimator", "decomposition needs exact_ensemble or sampled_ensemble");
      break;
    case Experiment::global_overlap:
    case Experiment::subspace_dple:
      if (c.estimator != Estimator::typicality) add(out, "estimator", "this experiment uses typicality only");
      if (c.experiment == Experiment::subspace_dple && !c.m_inf)
        check_window(out, "plateau", c.plateau_window, times);
      break;
    case Experiment::oracle_crosscheck:
      if (n > oracle::kMaxSites)
        add(out, "lattice", "oracle limited to n <= " + std::to_string(oracle::kMaxSites) + " sites");
      break;
    case Experiment::lambda_sweep:
      check_window(out, "fit", c.fit_window, times);
      break;
    default: break;
  }
  return out;
}

std::string resolved_toml(const RunConfig& c) {
  std::ostringstream ss;
  ss << toml::toml_formatter(to_table(c, true));
  return ss.str();
}

std::string resolved_json(const RunConfig& c) {
  std::ostringstream ss;
  ss << toml::json_formatter(to_table(c, true));
  return ss.str();
}

std::string config_hash(const RunConfig& c) {
  std::ostringstream ss;
  ss << toml::toml_formatter(to_table(c, false));
  // Floats are re-rendered in shortest round-trip form so the hash does not
  // depend on the formatter's precision choices.
  std::string canon = ss.str();
  canon += ";lambda=";
  for (double l : c.lambdas) canon += shortest(l) + ",";
  canon += ";t_p=";
  for (double t : c.t_p) canon += shortest(t) + ",";
  canon += ";dt=" + shortest(c.propagation.dt);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng::fnv1a64(canon)));
  return buf;
}

EchoProtocol protocol_for(const RunConfig& c, double lambda, double t_p) {
  EchoProtocol p;
  p.lx = c.lx;
  p.ly = c.ly;
  p.boundary = c.boundary;
  p.lambda = lambda;
  p.j0 = c.j0;
  p.times = c.times.values();
  p.t_p = t_p;
  p.preparation = c.preparation;
  p.n_samples = c.n_samples;
  p.seed = c.seed;
  p.propagation = c.propagation;
  p.estimator = c.estimator;
  p.threads = c.threads;
  return p;
}

std::size_t memory_estimate_bytes(const RunConfig& c) {
  const int n = c.lx * c.ly;
  if (n < 1 || n > 40) return 0;
  const std::size_t dim = std::size_t{1} << n;
  // start, forward leg, echoed copy and one temporary per worker.
  std::size_t bytes = static_cast<std::size_t>(resolve_threads(c.threads)) * 4 * dim * 16;
  if (c.propagation.integrator == Integrator::exact) bytes += 2 * dim * dim * sizeof(double);
  if (c.experiment == Experiment::oracle_crosscheck) bytes += oracle::memory_estimate_bytes(n);
  return bytes;
}

}  // namespace lecho::cli
