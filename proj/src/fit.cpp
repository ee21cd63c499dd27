// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecho/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lecho {

std::string_view to_string(FitKind k) {
  switch (k) {
    case FitKind::short_time_quadratic: return "short_time_quadratic";
    case FitKind::exponential_rate: return "exponential_rate";
    case FitKind::plateau: return "plateau";
  }
  return "?";
}

namespace {

// Relative standard error above which a fitted parameter is flagged as noisy.
constexpr double kNoisyRelativeError = 0.25;

struct Points {
  std::vector<double> t;
  std::vector<double> y;
};

Points select(const Series& s, FitWindow w, bool skip_origin) {
  s.check();
  if (s.size() == 0) throw FitError("fit: empty series");
  if (!(w.t_min <= w.t_max)) throw FitError("fit: window lower bound exceeds upper bound");
  const double slack = 1e-12 * std::max(1.0, std::abs(s.times.back()));
  if (w.t_min < s.times.front() - slack || w.t_max > s.times.back() + slack)
    throw FitError("fit: window [" + std::to_string(w.t_min) + ", " + std::to_string(w.t_max) +
                   "] extends beyond the data range [" + std::to_string(s.times.front()) + ", " +
                   std::to_string(s.times.back()) + "]");
  Points p;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = s.times[k];
    if (t < w.t_min || t > w.t_max) continue;
    if (skip_origin && t == 0.0) continue;
    p.t.push_back(t);
    p.y.push_back(s.values[k]);
  }
  if (p.t.size() < kMinFitPoints)
    throw FitError("fit: " + std::to_string(p.t.size()) + " usable points in window, need at least " +
                   std::to_string(kMinFitPoints));
  return p;
}

double total_variation(const std::vector<double>& y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  return sst;
}

FitResult base(FitKind kind, const Points& p) {
  FitResult r;
  r.kind = kind;
  r.n_points = p.t.size();
  r.window = {p.t.front(), p.t.back()};
  return r;
}

void finish(FitResult& r, double ssr, double sst, const std::vector<double>& y) {
  const auto n = static_cast<double>(y.size());
  r.rms_residual = std::sqrt(ssr / n);
  r.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  if (!(sst > 0.0)) {
    r.well_conditioned = false;
    r.diagnostic = "flat data in window";
  } else if (r.value != 0.0 && r.uncertainty > kNoisyRelativeError * std::abs(r.value)) {
    r.well_conditioned = false;
    r.diagnostic = "noisy data: relative standard error " + std::to_string(r.uncertainty / std::abs(r.value));
  } else if (r.value == 0.0) {
    r.well_conditioned = false;
    r.diagnostic = "fitted parameter is exactly zero";
  }
}

}  // namespace

FitResult fit_short_time(const Series& s, FitWindow w, QuadraticForm form) {
  const Points p = select(s, w, true);
  const double sign = form.trend == Trend::decay ? -1.0 : 1.0;
  double s4 = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    const double t2 = p.t[k] * p.t[k];
    s4 += t2 * t2;
    sy += t2 * sign * (p.y[k] - form.anchor);
  }
  FitResult r = base(FitKind::short_time_quadratic, p);
  r.value = sy / s4;
  r.intercept = form.anchor;
  double ssr = 0.0;
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    const double model = form.anchor + sign * r.value * p.t[k] * p.t[k];
    ssr += (p.y[k] - model) * (p.y[k] - model);
  }
  r.uncertainty = std::sqrt(ssr / static_cast<double>(p.t.size() - 1) / s4);
  finish(r, ssr, total_variation(p.y), p.y);
  return r;
}

FitResult fit_exponential(const Series& s, FitWindow w) {
  Points p = select(s, w, false);
  for (double& v : p.y) {
    if (!(v > 0.0)) throw FitError("fit: non-positive value in window, log-linear fit undefined");
    v = std::log(v);
  }
  const auto n = static_cast<double>(p.t.size());
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    mt += p.t[k];
    my += p.y[k];
  }
  mt /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    sxx += (p.t[k] - mt) * (p.t[k] - mt);
    sxy += (p.t[k] - mt) * (p.y[k] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit: window holds a single distinct time");
  const double slope = sxy / sxx;
  FitResult r = base(FitKind::exponential_rate, p);
  r.value = -slope;
  r.intercept = my - slope * mt;
  double ssr = 0.0;
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    const double e = p.y[k] - (r.intercept + slope * p.t[k]);
    ssr += e * e;
  }
  r.uncertainty = std::sqrt(ssr / (n - 2.0) / sxx);
  finish(r, ssr, total_variation(p.y), p.y);
  return r;
}

FitResult fit_plateau(const Series& s, FitWindow w) {
  const Points p = select(s, w, false);
  const auto n = static_cast<double>(p.y.size());
  double mean = 0.0;
  for (double v : p.y) mean += v;
  mean /= n;
  const double sst = total_variation(p.y);
  FitResult r = base(FitKind::plateau, p);
  r.value = mean;
  r.uncertainty = std::sqrt(sst / (n - 1.0));
  r.rms_residual = std::sqrt(sst / n);
  r.r_squared = 0.0;
  if (r.uncertainty > std::abs(mean)) {
    r.well_conditioned = false;
    r.diagnostic = "spread exceeds the plateau value";
  }
  return r;
}

FitResult fit(const Series& s, FitKind kind, FitWindow w) {
  switch (kind) {
    case FitKind::short_time_quadratic: return fit_short_time(s, w);
    case FitKind::exponential_rate: return fit_exponential(s, w);
    case FitKind::plateau: return fit_plateau(s, w);
  }
  throw FitError("fit: unknown kind");
}

}  // namespace lecho
