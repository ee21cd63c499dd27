// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lecho/echo.hpp"
#include "lecho/fit.hpp"
#include "lecho/lattice.hpp"
#include "lecho/propagator.hpp"

namespace lecho::cli {

enum class Experiment {
  local_le,
  decomposition,
  p11,
  dple,
  global_overlap,
  subspace_dple,
  oracle_crosscheck,
  lambda_sweep,
};

enum class Spacing { linear, log };

std::string_view to_string(Experiment e);
std::string_view to_string(Spacing s);

/// n_points times from t_min to t_max. Log spacing is geometric from t_min
/// (which must then be positive) and is preceded by t = 0 when
/// include_zero is set.
struct TimeGrid {
  double t_min = 0.0;
  double t_max = 20.0;
  int n_points = 21;
  Spacing spacing = Spacing::linear;
  bool include_zero = true;

  std::vector<double> values() const;
};

struct RunConfig {
  Experiment experiment = Experiment::local_le;
  int lx = 4;
  int ly = 4;
  Boundary boundary = Boundary::periodic;
  std::vector<double> lambdas{0.1};
  double j0 = 1.0;
  Preparation preparation = Preparation::double_quantum;
  TimeGrid times;
  std::vector<double> t_p{0.0};
  TimeGrid prep_times{0.0, 15.0, 31, Spacing::linear, true};
  PropagationSettings propagation;
  Estimator estimator = Estimator::typicality;
  int n_samples = 1;
  /// Basis states sampled for the prepared many-body echo (global_overlap).
  int mb_samples = 4;
  std::uint64_t seed = 1;
  /// Window for exponential rate fits (lambda_sweep).
  FitWindow fit_window{2.0, 10.0};
  /// Plateau window of the unprepared echo; supplies m_inf when not given.
  FitWindow plateau_window{28.0, 48.0};
  std::optional<double> m_inf;
  double oracle_tolerance = 1e-8;
  std::filesystem::path output = "lecho_out";
  int threads = 0;
};

struct Diagnostic {
  std::string source;
  int line = 0;
  int column = 0;
  std::string field;
  std::string message;
  bool warning = false;

  /// "<source>:<line>:<col>: error: <field>: <message>"
  std::string str() const;
};

struct LoadResult {
  RunConfig config;
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
};

/// Parses TOML text and applies `key=value` overrides (dotted keys, values
/// in TOML syntax; a bare word is taken as a string). Collects every
/// problem instead of stopping at the first.
LoadResult parse_config(std::string_view text, std::string_view source,
                        std::span<const std::string> overrides = {});
LoadResult load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Semantic checks on a parsed config; warnings are marked as such.
std::vector<Diagnostic> check(const RunConfig& c);

/// Fully resolved config as TOML, with every default spelled out.
std::string resolved_toml(const RunConfig& c);
/// Same content as JSON text.
std::string resolved_json(const RunConfig& c);

/// 16 hex digits over the resolved config, excluding output path and threads.
std::string config_hash(const RunConfig& c);

/// Echo protocol for one sweep point.
EchoProtocol protocol_for(const RunConfig& c, double lambda, double t_p);

/// Peak state-vector memory for a run: one vector per live copy per worker.
std::size_t memory_estimate_bytes(const RunConfig& c);

}  // namespace lecho::cli
