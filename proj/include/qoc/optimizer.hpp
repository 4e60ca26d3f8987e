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
#ifndef QOC_OPTIMIZER_HPP
#define QOC_OPTIMIZER_HPP

#include "qoc/grape.hpp"

namespace qoc {

struct OptimizerConfig {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-8;   // inf-norm of the projected gradient
  double objective_tolerance = 1e-9;  // relative change of phi
  int memory = 10;                    // quasi-Newton history length
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_steps = 40;
};

enum class TerminationReason {
  ConvergedGradient,
  ConvergedObjective,
  MaxIterations,
  LineSearchFailure,
};

const char* to_string(TerminationReason reason);

struct OptimizationResult {
  Pulse pulse;
  ObjectiveReport final_report;
  std::vector<double> phi_history;  // phi at iterate 0..n, non-increasing
  std::vector<double> seconds_per_iteration;
  int iterations = 0;
  TerminationReason termination = TerminationReason::MaxIterations;
};

// Limited-memory quasi-Newton descent on phi with the amplitudes projected
// onto the per-control box. The initial pulse must lie inside the box.
OptimizationResult optimize(const ControlProblem& problem, const Pulse& initial,
                            const OptimizerConfig& config, EvalMode mode);

}  // namespace qoc

#endif  // QOC_OPTIMIZER_HPP
