#include <doctest.h>

#include "oracles.hpp"
#include "qoc/optimizer.hpp"

using namespace qoc;

namespace {

ControlProblem pi_rotation_problem() {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(Operator::from_dense(0.5 * pauli(PauliKind::X).to_dense(), true));
  p.bounds.push_back(50.0);
  StateVector g(2), e(2);
  g << 1.0, 0.0;
  e << 0.0, 1.0;
  p.constraints.push_back({g, e, 1.0});
  p.grid = {100, 0.01};
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("a single-qubit pi rotation converges quickly") {
  const ControlProblem p = pi_rotation_problem();
  const Pulse initial = random_initial_pulse(p, 3, 0.05);
  OptimizerConfig config;
  config.max_iterations = 200;
  const OptimizationResult result = optimize(p, initial, config, EvalMode::Closed);
  CHECK(result.final_report.phi < 1e-6);
  CHECK(result.iterations <= 200);
}

TEST_CASE("an already-optimal start terminates immediately") {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(pauli(PauliKind::X));
  p.bounds.push_back(1.0);
  StateVector g(2);
  g << 1.0, 0.0;
  p.constraints.push_back({g, g, 1.0});
  p.grid = {10, 0.1};
  p.validate();
  const OptimizationResult result = optimize(p, zero_pulse(p), OptimizerConfig{}, EvalMode::Closed);
  CHECK(result.iterations == 0);
  CHECK(result.termination == TerminationReason::ConvergedGradient);
  CHECK(result.final_report.phi == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("phi decreases monotonically along the iterates") {
  const ControlProblem p = pi_rotation_problem();
  const Pulse initial = random_initial_pulse(p, 9, 0.05);
  OptimizerConfig config;
  config.max_iterations = 60;
  const OptimizationResult result = optimize(p, initial, config, EvalMode::Closed);
  for (size_t i = 1; i < result.phi_history.size(); ++i)
    CHECK(result.phi_history[i] <= result.phi_history[i - 1] + 1e-12);
  CHECK(result.seconds_per_iteration.size() >= size_t(result.iterations));
}

TEST_CASE("iterates stay inside the amplitude box") {
  ControlProblem p = pi_rotation_problem();
  p.bounds[0] = 2.0;  // tight box
  const Pulse initial = random_initial_pulse(p, 11, 0.9);
  OptimizerConfig config;
  config.max_iterations = 50;
  const OptimizationResult result = optimize(p, initial, config, EvalMode::Closed);
  CHECK(result.pulse.amplitudes.cwiseAbs().maxCoeff() <= 2.0 + 1e-12);
}

TEST_CASE("an out-of-bounds start is rejected") {
  const ControlProblem p = pi_rotation_problem();
  Pulse initial = zero_pulse(p);
  initial.amplitudes(0, 0) = 1e3;
  CHECK_THROWS_AS(optimize(p, initial, OptimizerConfig{}, EvalMode::Closed), ValidationError);
}

TEST_CASE("open refinement from a closed seed does not regress") {
  ControlProblem p = pi_rotation_problem();
  p.noise.push_back({pauli(PauliKind::Minus), 0.02, "decay"});
  p.fluctuations.push_back({pauli(PauliKind::Z), 0.05, "shift"});
  p.validate();

  OptimizerConfig config;
  config.max_iterations = 150;
  const Pulse initial = random_initial_pulse(p, 21, 0.05);
  const OptimizationResult closed = optimize(p, initial, config, EvalMode::Closed);
  const double seed_phi = objective_and_gradient(p, closed.pulse, EvalMode::Open).phi;
  const OptimizationResult open = optimize(p, closed.pulse, config, EvalMode::Open);
  CHECK(open.final_report.phi <= seed_phi + 1e-12);
}
