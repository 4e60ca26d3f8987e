/* Copyright 2026 The QOC Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef QOC_ANALYSIS_HPP
#define QOC_ANALYSIS_HPP

#include <cstdint>
#include <map>
#include <optional>

#include "qoc/grape.hpp"

namespace qoc {

// One optimized-and-evaluated pulse in a batch study.
struct BatchRecord {
  std::uint64_t seed = 0;
  std::string mode;         // "closed" or "open"
  double phi = 0.0;         // final objective of the optimizer
  double infidelity = 0.0;  // oracle f-tilde
  int iterations = 0;
  double seconds = 0.0;
  std::string error;  // non-empty when this seed failed
};

struct ModeStatistics {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double fraction_below = 0.0;
};

// Moments, the Gaussian fit of the closed-mode infidelity distribution
// (sample moments), its mean - 3 sigma threshold, and per-mode fractions
// below the supplied threshold (the 3 sigma threshold when none is given).
struct YieldSummary {
  std::map<std::string, ModeStatistics> modes;
  double gaussian_mu = 0.0;
  double gaussian_sigma = 0.0;
  double threshold_3sigma = 0.0;
  double threshold_used = 0.0;
};

YieldSummary yield_statistics(const std::vector<BatchRecord>& records,
                              std::optional<double> threshold = std::nullopt);

// First error coefficients of a qubit under a tunable splitting u(t)/2 sigma_z
// with a transverse fluctuation: phi(t) = int u, g1(t) = int exp(i phi),
// g2(t) = int exp(i phi) conj(g1). Accumulated by the trapezoidal rule on the
// pulse grid, refined by step-doubling until |g1(T)| moves less than 1e-6 T.
struct ErrorCurve {
  std::vector<double> times;
  std::vector<Complex> g1;
  std::vector<Complex> g2;  // empty unless order 2 requested
  double rotation_angle = 0.0;
  double g1_final_abs = 0.0;
  int refinement_levels = 0;
};

ErrorCurve error_coefficients(const Pulse& pulse, int order = 1);

struct BenchRow {
  Index dim = 0;
  int f = 0;
  int v = 0;
  std::string mode;  // "closed" or "open"
  double seconds = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct BenchSummary {
  std::vector<BenchRow> dim_rows;   // dim sweep at the given (f, v)
  std::vector<BenchRow> f_rows;     // f sweep at fixed dim and v
  std::vector<BenchRow> v_rows;     // v sweep at fixed dim and f
  Index fixed_dim = 0;
  LinearFit loglog_closed;  // log t vs log d over the largest five dims
  LinearFit loglog_open;
  LinearFit time_vs_f;      // open-mode time against f
  LinearFit time_vs_v;
  double open_closed_ratio = 0.0;  // median ratio at the given (f, v)
};

// Median per-call objective+gradient time of a sparse cavity-qubit family,
// warm-up excluded. Also sweeps f in 0..6 and v in 0..6 at the middle dim.
BenchSummary complexity_bench(const std::vector<Index>& dims, int f, int v, int n_controls,
                              int n_taylor, int repetitions);

LinearFit least_squares_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qoc

#endif  // QOC_ANALYSIS_HPP
