// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

#include "lecho/cli/config.hpp"

namespace lecho::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

struct RunOptions {
  bool dry_run = false;
  std::ostream* out = nullptr;  // resolved config, summaries
  std::ostream* err = nullptr;  // diagnostics, progress
};

/// Executes the configured experiment into c.output: one CSV per series and
/// metadata.json. Returns an exit code; never throws.
int run(const RunConfig& c, const RunOptions& o);

/// Runs the dense references for the config's protocol (first lambda and t_p).
int run_oracle(const RunConfig& c, const RunOptions& o);

/// Prints diagnostics; returns kExitConfig if any is an error.
int report(const std::vector<Diagnostic>& diags, std::ostream& err);

}  // namespace lecho::cli
