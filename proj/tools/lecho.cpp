// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

// lecho: command-line driver.
//   lecho run <config> [--set key=value]... [--threads K] [--dry-run]
//   lecho validate <config> [--set key=value]...
//   lecho oracle <config> [--set key=value]... [--dry-run]
// Exit codes: 0 ok, 1 config error, 2 runtime or numerics error.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "lecho/cli/config.hpp"
#include "lecho/cli/runner.hpp"

namespace {

struct Args {
  std::string config;
  std::vector<std::string> overrides;
  int threads = -1;
  bool dry_run = false;
};

void common(CLI::App& sub, Args& a) {
  sub.add_option("config", a.config, "TOML experiment file")->required();
  sub.add_option("--set", a.overrides, "Override a config key, e.g. --set trotter.dt=0.005")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loschmidt echo simulator for spin-1/2 square lattices"};
  app.set_version_flag("--version", std::string(LECHO_VERSION));
  app.require_subcommand(1);

  Args run_args;
  Args validate_args;
  Args oracle_args;
  CLI::App* run = app.add_subcommand("run", "Run the configured experiment");
  common(*run, run_args);
  run->add_option("--threads", run_args.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--dry-run", run_args.dry_run, "Print the resolved config and memory estimate, write nothing");
  CLI::App* validate = app.add_subcommand("validate", "Check a config file");
  common(*validate, validate_args);
  CLI::App* oracle = app.add_subcommand("oracle", "Run the dense reference computations");
  common(*oracle, oracle_args);
  oracle->add_flag("--dry-run", oracle_args.dry_run, "Print the memory estimate only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lecho::cli::kExitConfig;
  }

  const auto load = [](const Args& a) {
    lecho::cli::LoadResult r = lecho::cli::load_config(a.config, a.overrides);
    if (a.threads >= 0) r.config.threads = a.threads;
    return r;
  };

  lecho::cli::RunOptions opts;
  opts.out = &std::cout;
  opts.err = &std::cerr;

  if (*validate) {
    const lecho::cli::LoadResult r = load(validate_args);
    const int code = lecho::cli::report(r.diagnostics, std::cerr);
    if (code == 0) std::cout << validate_args.config << ": ok\n";
    return code;
  }
  const Args& a = *run ? run_args : oracle_args;
  const lecho::cli::LoadResult r = load(a);
  if (lecho::cli::report(r.diagnostics, std::cerr) != 0) return lecho::cli::kExitConfig;
  opts.dry_run = a.dry_run;
  return *run ? lecho::cli::run(r.config, opts) : lecho::cli::run_oracle(r.config, opts);
}
