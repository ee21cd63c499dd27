// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lecho/cli/config.hpp"
#include "lecho/cli/runner.hpp"
#include "lecho/cli/series_io.hpp"

using namespace lecho;
using namespace lecho::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
experiment = "local_le"
seed = 3
n_samples = 2
threads = 1

[lattice]
lx = 3
ly = 2
boundary = "cylinder"

[model]
lambda = 0.3

[times]
t_min = 0.0
t_max = 4.0
n_points = 5

[trotter]
dt = 0.05
)";

bool has_error(const LoadResult& r, const std::string& field, int line = -1) {
  for (const Diagnostic& d : r.diagnostics)
    if (!d.warning && d.field == field && (line < 0 || d.line == line)) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lecho_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string body(const fs::path& csv) {
  std::string s = slurp(csv);
  return s.substr(s.find('\n') + 1);
}

}  // namespace

TEST_CASE("valid config parses with defaults filled in") {
  const LoadResult r = parse_config(kSmall, "small.toml");
  REQUIRE(r.ok());
  CHECK(r.config.lx == 3);
  CHECK(r.config.boundary == Boundary::cylinder);
  CHECK(r.config.lambdas == std::vector<double>{0.3});
  CHECK(r.config.propagation.dt == 0.05);
  CHECK(r.config.propagation.order == TrotterOrder::second_symmetric);
  CHECK(r.config.times.values() == std::vector<double>{0, 1, 2, 3, 4});
}

TEST_CASE("negative time step is reported with its location") {
  const LoadResult r = parse_config(std::string(kSmall).replace(std::string(kSmall).find("dt = 0.05"), 9, "dt = -0.1"),
                                    "bad.toml");
  CHECK_FALSE(r.ok());
  CHECK(has_error(r, "trotter.dt", 21));
  bool printed = false;
  for (const Diagnostic& d : r.diagnostics)
    if (d.str().rfind("bad.toml:21:", 0) == 0 && d.str().find("trotter.dt") != std::string::npos) printed = true;
  CHECK(printed);
}

TEST_CASE("periodic sides shorter than three cite the duplicate-bond rule") {
  const std::string overrides[] = {"lattice.lx=2", "lattice.ly=4", "lattice.boundary=periodic"};
  const LoadResult r = parse_config(kSmall, "small.toml", overrides);
  CHECK_FALSE(r.ok());
  bool cited = false;
  for (const Diagnostic& d : r.diagnostics)
    if (d.message.find("duplicate-bond") != std::string::npos) cited = true;
  CHECK(cited);
}

TEST_CASE("exact ensemble on sixteen sites is a warning") {
  const std::string overrides[] = {"lattice.lx=4", "lattice.ly=4", "lattice.boundary=periodic",
                                   "estimator=exact_ensemble"};
  const LoadResult r = parse_config(kSmall, "small.toml", overrides);
  CHECK(r.ok());
  bool warned = false;
  for (const Diagnostic& d : r.diagnostics)
    if (d.warning && d.field == "estimator") warned = true;
  CHECK(warned);
}

TEST_CASE("unknown keys and wrong types are errors") {
  CHECK_FALSE(parse_config(std::string(kSmall) + "colour = 3\n", "x.toml").ok());
  CHECK_FALSE(parse_config(R"(seed = "three")", "x.toml").ok());
  CHECK_FALSE(parse_config("experiment = \"nonsense\"", "x.toml").ok());
  CHECK_FALSE(parse_config("[lattice\nlx = 3", "x.toml").ok());
}

TEST_CASE("several problems are reported together") {
  const std::string overrides[] = {"n_samples=0", "trotter.dt=0", "model.j0=0"};
  const LoadResult r = parse_config(kSmall, "small.toml", overrides);
  CHECK(has_error(r, "n_samples"));
  CHECK(has_error(r, "trotter.dt"));
  CHECK(has_error(r, "model.j0"));
}

TEST_CASE("overrides use TOML values and bare words") {
  const std::string overrides[] = {"model.lambda=[0.1, 0.2]", "estimator=sampled_ensemble", "trotter.dt=0.02"};
  const LoadResult r = parse_config(kSmall, "small.toml", overrides);
  REQUIRE(r.ok());
  CHECK(r.config.lambdas == std::vector<double>{0.1, 0.2});
  CHECK(r.config.estimator == Estimator::sampled_ensemble);
  CHECK(r.config.propagation.dt == 0.02);
  const std::string broken[] = {"no_equals_sign"};
  CHECK_FALSE(parse_config(kSmall, "small.toml", broken).ok());
}

TEST_CASE("time grids") {
  TimeGrid g{0.0, 1.0, 3, Spacing::linear, true};
  CHECK(g.values() == std::vector<double>{0.0, 0.5, 1.0});
  g = {0.1, 10.0, 3, Spacing::log, true};
  const std::vector<double> v = g.values();
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 0.0);
  CHECK(v[2] == doctest::Approx(1.0));
  CHECK(v[3] == 10.0);
}

TEST_CASE("config hash ignores output and threads") {
  const RunConfig a = parse_config(kSmall, "a").config;
  RunConfig b = a;
  b.output = "elsewhere";
  b.threads = 5;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 4;
  CHECK(config_hash(a) != config_hash(b));
  // resolved TOML parses back to the same config
  const LoadResult back = parse_config(resolved_toml(a), "resolved");
  REQUIRE(back.ok());
  CHECK(config_hash(back.config) == config_hash(a));
  CHECK(resolved_json(a).find("\"lattice\"") != std::string::npos);
}

TEST_CASE("series CSV round-trips every bit") {
  Series s;
  s.times = {0.0, 0.1, 1.0 / 3.0};
  s.values = {1.0, 0.9999999999999999, -1e-300};
  s.std_error = {0.0, 1e-17, 0.123456789012345678};
  s.meta.observable = "m11";
  s.meta.estimator = "typicality";
  s.meta.n_samples = 4;
  s.meta.protocol_hash = "0123456789abcdef";
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  write_series_csv(s, dir / "a.csv", "feedfacefeedface");
  const CsvSeries r = read_series_csv(dir / "a.csv");
  CHECK(r.series.times == s.times);
  CHECK(r.series.values == s.values);
  CHECK(r.series.std_error == s.std_error);
  CHECK(r.config_hash == "feedfacefeedface");
  CHECK(r.header.at("units") == "hbar/J0");
  CHECK(r.header.at("n_samples") == "4");

  write_series_csv(s, dir / "b.csv", "0000000000000000");
  const fs::path mixed[] = {dir / "a.csv", dir / "b.csv"};
  CHECK_THROWS_AS(read_series_set(mixed), ProvenanceError);
  const fs::path same[] = {dir / "a.csv", dir / "a.csv"};
  CHECK(read_series_set(same).size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("series file names") {
  CHECK(series_file_name("local_le") == "local_le.csv");
  CHECK(series_file_name("dple", 2.5) == "dple_tp2.5.csv");
  CHECK(series_file_name("local_le", std::nullopt, 0.1) == "local_le_lambda0.1.csv");
}

TEST_CASE("run writes series and metadata, and reruns reproduce them") {
  const fs::path out = scratch("run");
  RunConfig c = parse_config(kSmall, "small.toml").config;
  c.output = out;
  std::ostringstream o, e;
  REQUIRE(run(c, {false, &o, &e}) == kExitOk);
  REQUIRE(fs::exists(out / "local_le.csv"));
  REQUIRE(fs::exists(out / "metadata.json"));
  const std::string meta = slurp(out / "metadata.json");
  CHECK(meta.find(config_hash(c)) != std::string::npos);
  CHECK(meta.find("\"rng\"") != std::string::npos);
  const std::string first = body(out / "local_le.csv");

  // same config into the same directory is allowed and identical
  REQUIRE(run(c, {false, &o, &e}) == kExitOk);
  CHECK(body(out / "local_le.csv") == first);

  // a different config must not overwrite it
  RunConfig other = c;
  other.seed = 99;
  CHECK(run(other, {false, &o, &e}) == kExitConfig);
  CHECK(body(out / "local_le.csv") == first);
  fs::remove_all(out);
}

TEST_CASE("dry run touches nothing") {
  const fs::path out = scratch("dry");
  RunConfig c = parse_config(kSmall, "small.toml").config;
  c.output = out;
  std::ostringstream o, e;
  CHECK(run(c, {true, &o, &e}) == kExitOk);
  CHECK_FALSE(fs::exists(out));
  CHECK(o.str().find("[lattice]") != std::string::npos);
}

TEST_CASE("numerical failures exit with the runtime code") {
  const fs::path out = scratch("fitfail");
  // the fit window holds fewer than five grid points
  const std::string overrides[] = {"experiment=lambda_sweep", "fit.t_min=0.5", "fit.t_max=2.0"};
  LoadResult r = parse_config(kSmall, "small.toml", overrides);
  REQUIRE(r.ok());
  r.config.output = out;
  std::ostringstream o, e;
  CHECK(run(r.config, {false, &o, &e}) == kExitRuntime);
  fs::remove_all(out);
}

TEST_CASE("bundled configs validate") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(LECHO_CONFIG_DIR)) {
    if (entry.path().extension() != ".toml") continue;
    ++seen;
    const LoadResult r = load_config(entry.path());
    INFO(entry.path().string());
    for (const Diagnostic& d : r.diagnostics) INFO(d.str());
    CHECK(r.ok());
  }
  CHECK(seen >= 5);
}
