// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lecho/echo.hpp"

namespace lecho {

enum class FitKind { short_time_quadratic, exponential_rate, plateau };
enum class Trend { decay, growth };

std::string_view to_string(FitKind k);

inline constexpr std::size_t kMinFitPoints = 5;

/// Closed interval of times. Must lie inside the series' time range.
struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

/// f(t) ~ anchor - c t^2 (decay) or anchor + c t^2 (growth), anchor fixed.
struct QuadraticForm {
  Trend trend = Trend::decay;
  double anchor = 1.0;
};

/**
 * value is c for short_time_quadratic, the rate 1/T for exponential_rate
 * (f ~ A exp(-t/T)) and the mean for plateau. uncertainty is the standard
 * error of value, except for plateau where it is the spread (standard
 * deviation) of the points. window is the span of points actually used.
 */
struct FitResult {
  FitKind kind = FitKind::plateau;
  double value = 0.0;
  double intercept = 0.0;
  double uncertainty = 0.0;
  FitWindow window;
  std::size_t n_points = 0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
  bool well_conditioned = true;
  std::string diagnostic;
};

/// Fits that cannot be carried out at all: too few points, window outside
/// the data, non-positive values under a logarithm.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least squares for c with the anchor held fixed. Points at t = 0 carry no
/// information on c and are not counted.
FitResult fit_short_time(const Series& s, FitWindow w, QuadraticForm form = {});

/// Linear regression of log f against t.
FitResult fit_exponential(const Series& s, FitWindow w);

FitResult fit_plateau(const Series& s, FitWindow w);

/// Dispatches on kind; quadratic fits use the default decay form.
FitResult fit(const Series& s, FitKind kind, FitWindow w);

}  // namespace lecho
