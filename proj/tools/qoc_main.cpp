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

// Command-line front end: optimize, evaluate, batch, sweep, bench, dd,
// fixtures. Every run writes a manifest before any computation output and
// tags each produced file with it. Exit codes: 0 success, 2 bad input,
// 3 numerical failure.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "qoc/fixtures.hpp"
#include "qoc/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "qoc 0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

bool g_quiet = false;

void info(const std::string& message) {
  if (!g_quiet) std::cerr << message << "\n";
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int thread_budget(int override_value) {
  if (override_value > 0) return override_value;
  if (const char* env = std::getenv("QOC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

// Written to <out>/manifest.json before any computation output.
std::string write_manifest(const std::string& out_dir, const std::string& command,
                           const json& details) {
  fs::create_directories(out_dir);
  json manifest{{"command", command},
                {"tool_version", kVersion},
                {"timestamp", timestamp()}};
  manifest.update(details);
  const std::string path = (fs::path(out_dir) / "manifest.json").string();
  qoc::write_json_file(manifest, path);
  return "manifest.json";
}

qoc::ControlProblem load_problem_checked(const std::string& path) {
  if (!fs::exists(path)) throw qoc::ValidationError("problem file '" + path + "' does not exist");
  qoc::ControlProblem problem = qoc::load_problem(path);
  for (const auto& warning : qoc::weak_noise_warnings(problem)) info("warning: " + warning);
  return problem;
}

qoc::Pulse load_pulse_any(const std::string& path, const qoc::PulseGrid& grid) {
  if (!fs::exists(path)) throw qoc::ValidationError("pulse file '" + path + "' does not exist");
  if (fs::path(path).extension() == ".json") {
    qoc::Pulse pulse = qoc::load_pulse_json(path);
    if (grid.steps != 0 && pulse.grid.steps != grid.steps)
      throw qoc::ValidationError("pulse grid does not match the problem grid");
    return pulse;
  }
  return qoc::load_pulse_csv(path, grid);
}

qoc::EvalMode mode_from_string(const std::string& mode) {
  if (mode == "closed") return qoc::EvalMode::Closed;
  if (mode == "open") return qoc::EvalMode::Open;
  throw qoc::ValidationError("mode must be 'closed' or 'open'");
}

struct OptimizeArgs {
  std::string problem_file;
  std::string mode = "open";
  std::uint64_t seed = 1;
  std::string init = "random";
  double init_scale = 0.1;
  std::string out = "qoc-out";
  int max_iterations = 1000;
  double gradient_tolerance = 1e-8;
  double objective_tolerance = 1e-9;
};

qoc::OptimizerConfig optimizer_config(const OptimizeArgs& args) {
  qoc::OptimizerConfig config;
  config.max_iterations = args.max_iterations;
  config.gradient_tolerance = args.gradient_tolerance;
  config.objective_tolerance = args.objective_tolerance;
  return config;
}

int run_optimize(const OptimizeArgs& args) {
  const qoc::ControlProblem problem = load_problem_checked(args.problem_file);
  const std::string manifest =
      write_manifest(args.out, "optimize",
                     json{{"problem", args.problem_file},
                          {"mode", args.mode},
                          {"seed", args.seed},
                          {"init", args.init},
                          {"config", {{"max_iterations", args.max_iterations},
                                      {"gradient_tolerance", args.gradient_tolerance},
                                      {"objective_tolerance", args.objective_tolerance},
                                      {"init_scale", args.init_scale}}}});

  qoc::Pulse initial = args.init == "random"
                           ? qoc::random_initial_pulse(problem, args.seed, args.init_scale)
                           : load_pulse_any(args.init, problem.grid);
  const qoc::OptimizationResult result =
      qoc::optimize(problem, initial, optimizer_config(args), mode_from_string(args.mode));

  qoc::save_pulse_csv(result.pulse, (fs::path(args.out) / "pulse.csv").string(), manifest);
  json result_json = qoc::result_to_json(result);
  result_json["manifest"] = manifest;
  qoc::write_json_file(result_json, (fs::path(args.out) / "result.json").string());
  info("phi = " + std::to_string(result.final_report.phi) + " after " +
       std::to_string(result.iterations) + " iterations (" + to_string(result.termination) + ")");
  const bool failed_immediately =
      result.termination == qoc::TerminationReason::LineSearchFailure && result.iterations == 0;
  return failed_immediately ? kExitNumerical : kExitOk;
}

int run_evaluate(const std::string& problem_file, const std::string& pulse_file,
                 const std::string& scheme, const std::string& out) {
  const qoc::ControlProblem problem = load_problem_checked(problem_file);
  const std::string manifest = write_manifest(
      out, "evaluate",
      json{{"problem", problem_file}, {"pulse", pulse_file}, {"scheme", scheme}});
  const qoc::Pulse pulse = load_pulse_any(pulse_file, problem.grid);
  const qoc::EvaluationReport report =
      qoc::f_open_evaluate(problem, pulse, qoc::fluctuation_scheme_from_string(scheme));
  json j = qoc::evaluation_to_json(report);
  j["manifest"] = manifest;
  qoc::write_json_file(j, (fs::path(out) / "evaluation.json").string());
  info("f_open = " + std::to_string(report.f_open) +
       ", infidelity = " + std::to_string(report.infidelity));
  return kExitOk;
}

struct BatchArgs {
  std::string problem_file;
  std::string seeds = "1..30";
  std::string modes = "closed,open";
  bool refine_open_from_closed = false;
  std::string out = "qoc-out";
  int max_iterations = 1000;
  int threads = 0;
  double threshold = -1.0;  // <0: closed-mode mean - 3 sigma
  double init_scale = 0.1;
};

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  std::vector<std::uint64_t> seeds;
  try {
    if (dots == std::string::npos) {
      seeds.push_back(std::stoull(text));
    } else {
      const std::uint64_t lo = std::stoull(text.substr(0, dots));
      const std::uint64_t hi = std::stoull(text.substr(dots + 2));
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  } catch (const std::exception&) {
    throw qoc::ValidationError("bad seed range '" + text + "', expected A..B");
  }
  if (seeds.empty()) throw qoc::ValidationError("empty seed range '" + text + "'");
  return seeds;
}

int run_batch(const BatchArgs& args) {
  const qoc::ControlProblem problem = load_problem_checked(args.problem_file);
  const auto seeds = parse_seed_range(args.seeds);
  const bool want_closed = args.modes.find("closed") != std::string::npos;
  const bool want_open = args.modes.find("open") != std::string::npos;
  if (!want_closed && !want_open) throw qoc::ValidationError("modes must name closed and/or open");

  const std::string manifest =
      write_manifest(args.out, "batch",
                     json{{"problem", args.problem_file},
                          {"seeds", args.seeds},
                          {"modes", args.modes},
                          {"refine_open_from_closed", args.refine_open_from_closed},
                          {"max_iterations", args.max_iterations},
                          {"threshold", args.threshold}});
  const std::string records_path = (fs::path(args.out) / "records.jsonl").string();
  std::ofstream(records_path).close();  // truncate

  qoc::OptimizerConfig config;
  config.max_iterations = args.max_iterations;

  std::mutex io_mutex;
  std::atomic<size_t> next{0};
  std::atomic<int> failures{0};
  std::vector<std::vector<qoc::BatchRecord>> per_seed(seeds.size());

  auto run_seed = [&](size_t idx) {
    const std::uint64_t seed = seeds[idx];
    auto& records = per_seed[idx];
    try {
      const qoc::Pulse initial = qoc::random_initial_pulse(problem, seed, args.init_scale);
      qoc::Pulse closed_pulse = initial;
      if (want_closed || args.refine_open_from_closed) {
        const auto t0 = std::chrono::steady_clock::now();
        const qoc::OptimizationResult closed =
            qoc::optimize(problem, initial, config, qoc::EvalMode::Closed);
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0).count();
        closed_pulse = closed.pulse;
        if (want_closed) {
          const qoc::EvaluationReport eval = qoc::f_open_evaluate(problem, closed.pulse);
          records.push_back({seed, "closed", closed.final_report.phi, eval.infidelity,
                             closed.iterations, secs, ""});
        }
      }
      if (want_open) {
        const qoc::Pulse& start = args.refine_open_from_closed ? closed_pulse : initial;
        const auto t0 = std::chrono::steady_clock::now();
        const qoc::OptimizationResult open =
            qoc::optimize(problem, start, config, qoc::EvalMode::Open);
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0).count();
        const qoc::EvaluationReport eval = qoc::f_open_evaluate(problem, open.pulse);
        records.push_back({seed, "open", open.final_report.phi, eval.infidelity,
                           open.iterations, secs, ""});
      }
    } catch (const std::exception& e) {
      records.push_back({seed, "failed", 0.0, 0.0, 0, 0.0, e.what()});
      failures.fetch_add(1);
    }
    std::lock_guard<std::mutex> lock(io_mutex);
    info("seed " + std::to_string(seed) + " done");
  };

  const int workers = std::min<int>(thread_budget(args.threads), int(seeds.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t idx = next.fetch_add(1);
        if (idx >= seeds.size()) return;
        run_seed(idx);
      }
    });
  }
  for (auto& t : pool) t.join();

  std::vector<qoc::BatchRecord> all;
  for (const auto& seed_records : per_seed)
    for (const auto& r : seed_records) {
      all.push_back(r);
      qoc::append_batch_record(r, records_path);
    }

  std::optional<double> threshold;
  if (args.threshold >= 0.0) threshold = args.threshold;
  const qoc::YieldSummary summary = qoc::yield_statistics(all, threshold);
  json summary_json = qoc::yield_summary_to_json(summary);
  summary_json["manifest"] = manifest;
  summary_json["failed_seeds"] = failures.load();
  qoc::write_json_file(summary_json, (fs::path(args.out) / "summary.json").string());

  const double completed = double(seeds.size() - size_t(failures.load())) / double(seeds.size());
  return completed >= 0.9 ? kExitOk : kExitNumerical;
}

int run_sweep(const std::string& problem_file, const std::string& pulse_file,
              std::vector<double> s_f, std::vector<double> s_m, const std::string& scheme,
              const std::string& out) {
  const qoc::ControlProblem problem = load_problem_checked(problem_file);
  const std::string manifest = write_manifest(
      out, "sweep",
      json{{"problem", problem_file}, {"pulse", pulse_file}, {"s_f", s_f}, {"s_m", s_m}});
  const qoc::Pulse pulse = load_pulse_any(pulse_file, problem.grid);
  const auto points = qoc::robustness_sweep(problem, pulse, s_f, s_m,
                                            qoc::fluctuation_scheme_from_string(scheme));
  qoc::write_sweep_csv(points, (fs::path(out) / "sweep.csv").string(), manifest);
  return kExitOk;
}

int run_bench(std::vector<qoc::Index> dims, int f, int v, int controls, int taylor, int reps,
              const std::string& out) {
  const std::string manifest = write_manifest(
      out, "bench",
      json{{"dims", dims}, {"f", f}, {"v", v}, {"controls", controls}, {"taylor", taylor},
           {"repetitions", reps}});
  const qoc::BenchSummary summary = qoc::complexity_bench(dims, f, v, controls, taylor, reps);
  qoc::write_bench_csv(summary, (fs::path(out) / "timings.csv").string(), manifest);
  json j = qoc::bench_summary_to_json(summary);
  j["manifest"] = manifest;
  qoc::write_json_file(j, (fs::path(out) / "bench_summary.json").string());
  info("dim exponent (open) = " + std::to_string(summary.loglog_open.slope) +
       ", open/closed ratio = " + std::to_string(summary.open_closed_ratio));
  return kExitOk;
}

int run_dd(double phi, std::uint64_t seed, int max_iterations, const std::string& out) {
  const std::string manifest = write_manifest(
      out, "dd", json{{"phi", phi}, {"seed", seed}, {"max_iterations", max_iterations}});
  const qoc::ControlProblem problem = qoc::fixtures::dd_transverse(phi);
  const double total = problem.grid.total();

  qoc::OptimizerConfig config;
  config.max_iterations = max_iterations;
  config.gradient_tolerance = 1e-12;
  config.objective_tolerance = 1e-14;

  // constant winding seed, closed pass, then open refinement with the
  // fluctuation strength annealed downward (the one-sided tilt distorts
  // the optimum at full strength; the closure geometry does not depend
  // on the strength)
  qoc::Pulse pulse = qoc::random_initial_pulse(problem, seed, 0.05);
  pulse.amplitudes.col(0).array() += phi / total;
  pulse = qoc::clamp_to_bounds(pulse, problem);
  const qoc::OptimizationResult closed =
      qoc::optimize(problem, pulse, config, qoc::EvalMode::Closed);
  pulse = closed.pulse;
  double phi_open = 0.0;
  for (const double s_opt : {0.3, 0.1, 0.03}) {
    const qoc::OptimizationResult open =
        qoc::optimize(qoc::scale_noise(problem, s_opt, 1.0), pulse, config, qoc::EvalMode::Open);
    pulse = open.pulse;
    phi_open = open.final_report.phi;
  }

  const qoc::ErrorCurve curve = qoc::error_coefficients(pulse, 2);
  qoc::save_pulse_csv(pulse, (fs::path(out) / "pulse.csv").string(), manifest);
  qoc::write_error_curve_csv(curve, (fs::path(out) / "curve.csv").string(), manifest);
  json summary{{"manifest", manifest},
               {"target_angle", phi},
               {"rotation_angle", curve.rotation_angle},
               {"g1_final_abs", curve.g1_final_abs},
               {"g1_final_abs_over_T", curve.g1_final_abs / total},
               {"phi_open", phi_open},
               {"phi_close", closed.final_report.phi}};
  qoc::write_json_file(summary, (fs::path(out) / "dd_summary.json").string());
  info("|g1(T)|/T = " + std::to_string(curve.g1_final_abs / total));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory-based optimal control of open quantum systems"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  int threads_flag = 0;
  app.add_flag("--quiet", g_quiet, "suppress progress output");
  app.add_option("--threads", threads_flag, "worker threads (overrides QOC_THREADS)");

  OptimizeArgs opt;
  auto* cmd_optimize = app.add_subcommand("optimize", "optimize a pulse for a problem file");
  cmd_optimize->add_option("problem", opt.problem_file, "problem JSON file")->required();
  cmd_optimize->add_option("--mode", opt.mode, "closed|open");
  cmd_optimize->add_option("--seed", opt.seed, "random pulse seed");
  cmd_optimize->add_option("--init", opt.init, "'random' or a pulse file");
  cmd_optimize->add_option("--init-scale", opt.init_scale, "random pulse amplitude fraction");
  cmd_optimize->add_option("--out", opt.out, "output directory");
  cmd_optimize->add_option("--max-iterations", opt.max_iterations);
  cmd_optimize->add_option("--gradient-tolerance", opt.gradient_tolerance);
  cmd_optimize->add_option("--objective-tolerance", opt.objective_tolerance);

  std::string eval_problem, eval_pulse, eval_scheme = "two_point", eval_out = "qoc-out";
  auto* cmd_evaluate = app.add_subcommand("evaluate", "master-equation evaluation of a pulse");
  cmd_evaluate->add_option("problem", eval_problem)->required();
  cmd_evaluate->add_option("pulse", eval_pulse)->required();
  cmd_evaluate->add_option("--scheme", eval_scheme, "two_point|full_signs|none");
  cmd_evaluate->add_option("--out", eval_out);

  BatchArgs batch;
  auto* cmd_batch = app.add_subcommand("batch", "optimize and evaluate a seed range");
  cmd_batch->add_option("problem", batch.problem_file)->required();
  cmd_batch->add_option("--seeds", batch.seeds, "seed range A..B");
  cmd_batch->add_option("--modes", batch.modes, "comma list of closed,open");
  cmd_batch->add_flag("--refine-open-from-closed", batch.refine_open_from_closed,
                      "seed the open optimization with the closed result");
  cmd_batch->add_option("--out", batch.out);
  cmd_batch->add_option("--max-iterations", batch.max_iterations);
  cmd_batch->add_option("--threshold", batch.threshold, "yield threshold (infidelity)");
  cmd_batch->add_option("--init-scale", batch.init_scale);

  std::string sweep_problem, sweep_pulse, sweep_scheme = "two_point", sweep_out = "qoc-out";
  std::vector<double> sweep_sf{1.0}, sweep_sm{1.0};
  auto* cmd_sweep = app.add_subcommand("sweep", "infidelity under scaled noise");
  cmd_sweep->add_option("problem", sweep_problem)->required();
  cmd_sweep->add_option("pulse", sweep_pulse)->required();
  cmd_sweep->add_option("--sf", sweep_sf, "fluctuation scale factors");
  cmd_sweep->add_option("--sm", sweep_sm, "decoherence scale factors");
  cmd_sweep->add_option("--scheme", sweep_scheme);
  cmd_sweep->add_option("--out", sweep_out);

  std::vector<qoc::Index> bench_dims{256, 512, 1024, 2048, 4096};
  int bench_f = 2, bench_v = 2, bench_controls = 4, bench_taylor = 20, bench_reps = 5;
  std::string bench_out = "qoc-out";
  auto* cmd_bench = app.add_subcommand("bench", "per-iteration gradient timing");
  cmd_bench->add_option("--dims", bench_dims);
  cmd_bench->add_option("--f", bench_f);
  cmd_bench->add_option("--v", bench_v);
  cmd_bench->add_option("--controls", bench_controls);
  cmd_bench->add_option("--taylor", bench_taylor);
  cmd_bench->add_option("--reps", bench_reps);
  cmd_bench->add_option("--out", bench_out);

  double dd_phi = 3.0 * 3.14159265358979323846 / 2.0;
  std::uint64_t dd_seed = 1;
  int dd_iters = 3000;
  std::string dd_out = "qoc-out";
  auto* cmd_dd = app.add_subcommand("dd", "transverse-fluctuation suppression study");
  cmd_dd->add_option("--phi", dd_phi, "target splitting angle");
  cmd_dd->add_option("--seed", dd_seed);
  cmd_dd->add_option("--max-iterations", dd_iters);
  cmd_dd->add_option("--out", dd_out);

  std::string fixtures_out = "fixtures";
  auto* cmd_fixtures = app.add_subcommand("fixtures", "write the bundled problem files");
  cmd_fixtures->add_option("--out", fixtures_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_optimize) return run_optimize(opt);
    if (*cmd_evaluate) return run_evaluate(eval_problem, eval_pulse, eval_scheme, eval_out);
    if (*cmd_batch) {
      batch.threads = threads_flag;
      return run_batch(batch);
    }
    if (*cmd_sweep)
      return run_sweep(sweep_problem, sweep_pulse, sweep_sf, sweep_sm, sweep_scheme, sweep_out);
    if (*cmd_bench)
      return run_bench(bench_dims, bench_f, bench_v, bench_controls, bench_taylor, bench_reps,
                       bench_out);
    if (*cmd_dd) return run_dd(dd_phi, dd_seed, dd_iters, dd_out);
    if (*cmd_fixtures) {
      qoc::fixtures::write_all(fixtures_out);
      return kExitOk;
    }
  } catch (const qoc::ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const qoc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
