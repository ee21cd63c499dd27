// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/cli/series_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace lecho::cli {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string series_file_name(std::string_view experiment, std::optional<double> t_p, std::optional<double> lambda) {
  std::string name(experiment);
  if (t_p) name += "_tp" + format_double(*t_p);
  if (lambda) name += "_lambda" + format_double(*lambda);
  return name + ".csv";
}

void write_series_csv(const Series& s, const std::filesystem::path& path, std::string_view config_hash) {
  s.check();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# observable=" << s.meta.observable << " units=hbar/J0 estimator=" << s.meta.estimator
      << " n_samples=" << s.meta.n_samples << " config_hash=" << config_hash
      << " protocol_hash=" << s.meta.protocol_hash << "\n";
  out << "t,value,stderr\n";
  for (std::size_t k = 0; k < s.size(); ++k)
    out << format_double(s.times[k]) << ',' << format_double(s.values[k]) << ',' << format_double(s.std_error[k])
        << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

double parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": not a number: '" +
                             std::string(field) + "'");
  return v;
}

}  // namespace

CsvSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvSeries out;
  std::string line;
  std::size_t number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream words(line.substr(1));
      std::string word;
      while (words >> word) {
        const auto eq = word.find('=');
        if (eq != std::string::npos) out.header[word.substr(0, eq)] = word.substr(eq + 1);
      }
      continue;
    }
    if (!saw_header) {
      if (line != "t,value,stderr")
        throw std::runtime_error(path.string() + ":" + std::to_string(number) +
                                 ": expected header 't,value,stderr'");
      saw_header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(number) + ": expected three columns");
    const std::string_view v(line);
    out.series.times.push_back(parse_number(v.substr(0, c1), path, number));
    out.series.values.push_back(parse_number(v.substr(c1 + 1, c2 - c1 - 1), path, number));
    out.series.std_error.push_back(parse_number(v.substr(c2 + 1), path, number));
  }
  if (!saw_header) throw std::runtime_error(path.string() + ": missing 't,value,stderr' header");
  const auto hash = out.header.find("config_hash");
  if (hash == out.header.end()) throw std::runtime_error(path.string() + ": missing config_hash");
  out.config_hash = hash->second;
  out.series.meta.observable = out.header["observable"];
  out.series.meta.estimator = out.header["estimator"];
  out.series.meta.protocol_hash = out.header["protocol_hash"];
  out.series.check();
  return out;
}

std::vector<CsvSeries> read_series_set(std::span<const std::filesystem::path> paths) {
  std::vector<CsvSeries> out;
  for (const auto& p : paths) {
    out.push_back(read_series_csv(p));
    if (out.back().config_hash != out.front().config_hash)
      throw ProvenanceError("refusing to combine " + paths.front().string() + " (config " + out.front().config_hash +
                            ") with " + p.string() + " (config " + out.back().config_hash + ")");
  }
  return out;
}

}  // namespace lecho::cli
