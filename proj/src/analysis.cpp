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
#include "qoc/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace qoc {

YieldSummary yield_statistics(const std::vector<BatchRecord>& records,
                              std::optional<double> threshold) {
  std::vector<const BatchRecord*> usable;
  for (const auto& r : records)
    if (r.error.empty()) usable.push_back(&r);
  if (usable.empty()) throw ValidationError("yield statistics over an empty batch");

  YieldSummary summary;
  std::map<std::string, std::vector<double>> by_mode;
  for (const auto* r : usable) by_mode[r->mode].push_back(r->infidelity);

  auto moments = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / double(xs.size() - 1) : 0.0;
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  const auto closed_it = by_mode.find("closed");
  {
    std::vector<double> fit_sample;
    if (closed_it != by_mode.end()) {
      fit_sample = closed_it->second;
    } else {
      for (const auto* r : usable) fit_sample.push_back(r->infidelity);
    }
    const auto [mu, sigma] = moments(fit_sample);
    summary.gaussian_mu = mu;
    summary.gaussian_sigma = sigma;
    summary.threshold_3sigma = mu - 3.0 * sigma;
  }
  summary.threshold_used = threshold.value_or(summary.threshold_3sigma);

  for (auto& [mode, xs] : by_mode) {
    ModeStatistics stats;
    stats.count = int(xs.size());
    const auto [mean, stddev] = moments(xs);
    stats.mean = mean;
    stats.stddev = stddev;
    int below = 0;
    for (double x : xs)
      if (x < summary.threshold_used) ++below;
    stats.fraction_below = double(below) / double(xs.size());
    summary.modes[mode] = stats;
  }
  return summary;
}

namespace {

// One trapezoidal pass over the pulse grid split into `splits` pieces per
// step; fills g1 (and g2) at the refined nodes.
void accumulate_error_curve(const Pulse& pulse, int splits, bool want_g2,
                            std::vector<double>& times, std::vector<Complex>& g1,
                            std::vector<Complex>& g2) {
  const int n = pulse.steps();
  const double tau = pulse.grid.step_size;
  const double h = tau / splits;
  const size_t nodes = size_t(n) * splits + 1;
  times.assign(nodes, 0.0);
  g1.assign(nodes, Complex(0.0, 0.0));
  if (want_g2) g2.assign(nodes, Complex(0.0, 0.0));

  double phi = 0.0;
  Complex e_prev = Complex(1.0, 0.0);  // exp(i phi(0))
  size_t node = 0;
  for (int j = 0; j < n; ++j) {
    const double u = pulse.amplitudes(j, 0);
    for (int s = 0; s < splits; ++s) {
      const double t_next = (double(j) * splits + s + 1) * h;
      phi += u * h;
      const Complex e_next = std::polar(1.0, phi);
      times[node + 1] = t_next;
      g1[node + 1] = g1[node] + 0.5 * h * (e_prev + e_next);
      if (want_g2) {
        g2[node + 1] = g2[node] + 0.5 * h * (e_prev * std::conj(g1[node]) +
                                             e_next * std::conj(g1[node + 1]));
      }
      e_prev = e_next;
      ++node;
    }
  }
}

}  // namespace

ErrorCurve error_coefficients(const Pulse& pulse, int order) {
  if (pulse.controls() != 1)
    throw ValidationError("error coefficients are defined for a single-control pulse");
  if (order != 1 && order != 2) throw ValidationError("order must be 1 or 2");
  const double total = pulse.grid.total();
  const double tol = 1e-6 * total;
  constexpr int kMaxLevels = 12;

  std::vector<double> times;
  std::vector<Complex> g1, g2;
  accumulate_error_curve(pulse, 1, order == 2, times, g1, g2);
  Complex g1_final = g1.back();
  int level = 0;
  for (; level < kMaxLevels; ++level) {
    std::vector<double> times_fine;
    std::vector<Complex> g1_fine, g2_fine;
    accumulate_error_curve(pulse, 1 << (level + 1), order == 2, times_fine, g1_fine, g2_fine);
    const Complex refined = g1_fine.back();
    times.swap(times_fine);
    g1.swap(g1_fine);
    g2.swap(g2_fine);
    const bool converged = std::abs(refined - g1_final) < tol;
    g1_final = refined;
    if (converged) break;
  }
  if (level >= kMaxLevels)
    throw NumericalError("error-coefficient quadrature did not converge under grid doubling");

  // subsample back to the pulse grid for reporting
  ErrorCurve curve;
  const int splits = 1 << (level + 1);
  curve.times.reserve(size_t(pulse.steps()) + 1);
  curve.g1.reserve(size_t(pulse.steps()) + 1);
  for (int j = 0; j <= pulse.steps(); ++j) {
    const size_t node = size_t(j) * splits;
    curve.times.push_back(times[node]);
    curve.g1.push_back(g1[node]);
    if (order == 2) curve.g2.push_back(g2[node]);
  }
  curve.rotation_angle = pulse.amplitudes.col(0).sum() * pulse.grid.step_size;
  curve.g1_final_abs = std::abs(g1_final);
  curve.refinement_levels = level + 1;
  return curve;
}

LinearFit least_squares_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit needs >= 2 points");
  const double n = double(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit fit;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ValidationError("degenerate abscissa in fit");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    const double pred = fit.slope * x[i] + fit.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

// Sparse qubit-on-cavity benchmark family with operator norms tamed so the
// Taylor propagation stays inside its residual budget at any dimension.
ControlProblem bench_problem(Index dim, int f, int v, int n_controls, int n_taylor,
                             std::uint64_t seed) {
  if (dim < 4 || dim % 2 != 0) throw ValidationError("bench dims must be even and >= 4");
  const Index dc = dim / 2;
  ControlProblem p;
  const Operator id_cav = identity_operator(dc);
  const Operator id_qubit = identity_operator(2);
  const Operator n_cav = number_operator(dc);
  const Operator a = annihilation(dc);

  p.drift = kron(n_cav, pauli(PauliKind::Z)).scaled(Complex(0.5 / double(dc), 0.0));

  // cavity quadrature drives assembled directly, scaled to unit spectral norm
  const double drive_scale = 1.0 / (2.0 * std::sqrt(double(dc)));
  std::vector<Eigen::Triplet<Complex>> tx, ty;
  for (Index n = 1; n < dc; ++n) {
    const double val = std::sqrt(double(n)) * drive_scale;
    for (Index q = 0; q < 2; ++q) {
      tx.emplace_back((n - 1) * 2 + q, n * 2 + q, Complex(val, 0.0));
      tx.emplace_back(n * 2 + q, (n - 1) * 2 + q, Complex(val, 0.0));
      ty.emplace_back((n - 1) * 2 + q, n * 2 + q, Complex(0.0, val));
      ty.emplace_back(n * 2 + q, (n - 1) * 2 + q, Complex(0.0, -val));
    }
  }
  std::vector<Operator> palette;
  palette.push_back(kron(id_cav, pauli(PauliKind::X)));
  palette.push_back(kron(id_cav, pauli(PauliKind::Y)));
  palette.push_back(Operator::from_triplets(dim, tx, true));
  palette.push_back(Operator::from_triplets(dim, ty, true));
  for (int k = 0; k < n_controls; ++k) {
    p.controls.push_back(palette[size_t(k) % palette.size()]);
    p.bounds.push_back(1.0);
  }

  const Operator fluct_cavity = kron(n_cav, id_qubit).scaled(Complex(1.0 / double(dc), 0.0));
  const Operator fluct_qubit = kron(id_cav, pauli(PauliKind::Z));
  for (int m = 0; m < f; ++m)
    p.fluctuations.push_back({m % 2 == 0 ? fluct_cavity : fluct_qubit, 1e-3, ""});

  const Operator decay_cavity = kron(a, id_qubit).scaled(Complex(drive_scale, 0.0));
  const Operator decay_qubit = kron(id_cav, pauli(PauliKind::Minus));
  for (int m = 0; m < v; ++m)
    p.noise.push_back({m % 2 == 0 ? decay_cavity : decay_qubit, 1e-4, ""});

  std::mt19937_64 rng(seed);
  auto random_state = [&]() {
    StateVector psi(dim);
    for (Index i = 0; i < dim; ++i) {
      const double re = 2.0 * (double(rng() >> 11) * 0x1p-53) - 1.0;
      const double im = 2.0 * (double(rng() >> 11) * 0x1p-53) - 1.0;
      psi(i) = Complex(re, im);
    }
    psi /= psi.norm();
    return psi;
  };
  p.constraints.push_back({random_state(), random_state(), 1.0});
  p.grid = {100, 1e-3};
  p.propagation.taylor_order = n_taylor;
  p.validate();
  return p;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double time_objective(const ControlProblem& problem, const Pulse& pulse, EvalMode mode,
                      int repetitions) {
  using Clock = std::chrono::steady_clock;
  volatile double sink = 0.0;
  (void)objective_and_gradient(problem, pulse, mode);  // warm-up
  std::vector<double> samples;
  samples.reserve(size_t(repetitions));
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = Clock::now();
    const ObjectiveReport rep = objective_and_gradient(problem, pulse, mode);
    const auto t1 = Clock::now();
    sink = sink + rep.phi;
    samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  return median(samples);
}

}  // namespace

BenchSummary complexity_bench(const std::vector<Index>& dims, int f, int v, int n_controls,
                              int n_taylor, int repetitions) {
  if (dims.empty()) throw ValidationError("bench needs at least one dimension");
  if (repetitions < 3) throw ValidationError("bench needs repetitions >= 3");
  std::vector<Index> sorted_dims = dims;
  std::sort(sorted_dims.begin(), sorted_dims.end());

  BenchSummary summary;
  std::vector<double> ratios;
  for (Index d : sorted_dims) {
    const ControlProblem p = bench_problem(d, f, v, n_controls, n_taylor, 12345);
    const Pulse pulse = random_initial_pulse(p, 67890, 0.5);
    const double closed = time_objective(p, pulse, EvalMode::Closed, repetitions);
    const double open = time_objective(p, pulse, EvalMode::Open, repetitions);
    summary.dim_rows.push_back({d, f, v, "closed", closed});
    summary.dim_rows.push_back({d, f, v, "open", open});
    ratios.push_back(open / closed);
  }
  summary.open_closed_ratio = median(ratios);

  const Index fixed = sorted_dims[sorted_dims.size() / 2];
  summary.fixed_dim = fixed;
  for (int fs = 0; fs <= 6; ++fs) {
    const ControlProblem p = bench_problem(fixed, fs, v, n_controls, n_taylor, 12345);
    const Pulse pulse = random_initial_pulse(p, 67890, 0.5);
    summary.f_rows.push_back(
        {fixed, fs, v, "open", time_objective(p, pulse, EvalMode::Open, repetitions)});
  }
  for (int vs = 0; vs <= 6; ++vs) {
    const ControlProblem p = bench_problem(fixed, f, vs, n_controls, n_taylor, 12345);
    const Pulse pulse = random_initial_pulse(p, 67890, 0.5);
    summary.v_rows.push_back(
        {fixed, f, vs, "open", time_objective(p, pulse, EvalMode::Open, repetitions)});
  }

  auto loglog = [&](const std::string& mode) {
    std::vector<double> xs, ys;
    const size_t take = std::min<size_t>(5, sorted_dims.size());
    for (size_t i = sorted_dims.size() - take; i < sorted_dims.size(); ++i) {
      for (const auto& row : summary.dim_rows) {
        if (row.dim == sorted_dims[i] && row.mode == mode) {
          xs.push_back(std::log(double(row.dim)));
          ys.push_back(std::log(row.seconds));
        }
      }
    }
    if (xs.size() < 2) return LinearFit{};  // single-dim run, no scaling fit
    return least_squares_fit(xs, ys);
  };
  summary.loglog_closed = loglog("closed");
  summary.loglog_open = loglog("open");

  auto sweep_fit = [](const std::vector<BenchRow>& rows, bool vs_f) {
    std::vector<double> xs, ys;
    for (const auto& row : rows) {
      xs.push_back(double(vs_f ? row.f : row.v));
      ys.push_back(row.seconds);
    }
    return least_squares_fit(xs, ys);
  };
  summary.time_vs_f = sweep_fit(summary.f_rows, true);
  summary.time_vs_v = sweep_fit(summary.v_rows, false);
  return summary;
}

}  // namespace qoc
