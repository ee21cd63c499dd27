// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lecho/echo.hpp"
#include "lecho/statevec.hpp"

namespace lecho::test {

/// Normalized complex Gaussian vector from a fixed-seed engine.
inline Amplitudes random_amplitudes(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  Amplitudes a(Eigen::Index{1} << n);
  for (auto& z : a) z = {g(gen), g(gen)};
  a.normalize();
  return a;
}

inline StateVector random_state(int n, std::uint64_t seed) { return {n, random_amplitudes(n, seed)}; }

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  return out;
}

inline EchoProtocol small_protocol(int lx, int ly, Boundary b, double lambda, std::vector<double> times) {
  EchoProtocol p;
  p.lx = lx;
  p.ly = ly;
  p.boundary = b;
  p.lambda = lambda;
  p.times = std::move(times);
  p.threads = 1;
  return p;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace lecho::test
