// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dataset-level runs shared by the `sweep` and `benchmark` subcommands.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "eixgnn/eixgnn.hpp"

namespace eixgnn::harness {

struct RunOutcome {
  bool ok = false;
  std::string error;
  MetricReport metrics;
  double wallclock = 0.0;
};

//! explain + metrics on one graph. Exceptions are captured, not thrown, so
//! that one degenerate graph does not abort a dataset run.
inline RunOutcome explain_and_score(const Model &m, const Graph &g,
                                    const ExplainConfig &ecfg,
                                    const MetricConfig &mcfg) {
  RunOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto ex = explain(m, g, ecfg);
    out.metrics = evaluate_explanation(m, g, ex.node_relevance, mcfg);
    out.ok = true;
  } catch (const std::exception &e) {
    out.error = e.what();
  }
  out.wallclock =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

//! Shortest round-trip formatting; identical doubles print identically.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double mean(const std::vector<double> &v) {
  return v.empty() ? 0.0
                   : std::accumulate(v.begin(), v.end(), 0.0) /
                         static_cast<double>(v.size());
}

//! Sample standard deviation (n - 1); 0 for fewer than two values.
inline double stddev(const std::vector<double> &v) {
  if (v.size() < 2)
    return 0.0;
  const double mu = mean(v);
  double acc = 0.0;
  for (double x : v)
    acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

inline double median(std::vector<double> v) {
  if (v.empty())
    return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

//! (max - min) / |mean| of a set of values; 0 when the mean is 0.
inline double relative_spread(const std::vector<double> &v) {
  if (v.empty())
    return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double mu = mean(v);
  return mu == 0.0 ? 0.0 : (*hi - *lo) / std::abs(mu);
}

inline std::string scientific(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", v);
  return buf;
}

} // namespace eixgnn::harness
