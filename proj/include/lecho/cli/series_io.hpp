// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lecho/echo.hpp"

namespace lecho::cli {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// <experiment>[_tp<t_p>][_lambda<lambda>].csv
std::string series_file_name(std::string_view experiment, std::optional<double> t_p = std::nullopt,
                             std::optional<double> lambda = std::nullopt);

/**
 * One series per file:
 *   # observable=<name> units=hbar/J0 estimator=<e> n_samples=<k> config_hash=<h> protocol_hash=<p>
 *   t,value,stderr
 *   <rows>
 */
void write_series_csv(const Series& s, const std::filesystem::path& path, std::string_view config_hash);

struct CsvSeries {
  Series series;
  std::string config_hash;
  std::map<std::string, std::string> header;
};

class ProvenanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws std::runtime_error on malformed files.
CsvSeries read_series_csv(const std::filesystem::path& path);

/// Reads several series and refuses to mix results from different configs.
std::vector<CsvSeries> read_series_set(std::span<const std::filesystem::path> paths);

}  // namespace lecho::cli
