#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qoc/grape.hpp"

using namespace qoc;

namespace {

StateVector ket_g() {
  StateVector g(2);
  g << 1.0, 0.0;
  return g;
}
StateVector ket_e() {
  StateVector e(2);
  e << 0.0, 1.0;
  return e;
}
StateVector ket_plus() {
  StateVector p(2);
  p << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return p;
}

ControlProblem qubit_problem(int steps, double tau) {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(Operator::from_dense(0.5 * pauli(PauliKind::X).to_dense(), true));
  p.bounds.push_back(100.0);
  p.constraints.push_back({ket_g(), ket_e(), 1.0});
  p.grid = {steps, tau};
  p.validate();
  return p;
}

// qubit (x) cavity problem with weak random couplings, f fluctuation terms
// and v noise channels; tau * ||H|| stays below `strength`
ControlProblem random_open_problem(std::mt19937_64& rng, int steps, Index cavity_dim, int f, int v,
                                   double strength) {
  ControlProblem p;
  const Index d = 2 * cavity_dim;
  const double tau = 0.05;
  const double scale = strength / tau / 8.0;
  p.drift = Operator::from_dense(oracles::random_hermitian(d, rng, scale), true);
  const Operator id_qubit_side = identity_operator(2);
  const Operator id_cav = identity_operator(cavity_dim);
  p.controls.push_back(kron(pauli(PauliKind::X), id_cav));
  p.controls.push_back(kron(pauli(PauliKind::Y), id_cav));
  DenseMatrix quad_x = kron(id_qubit_side, annihilation(cavity_dim)).to_dense();
  quad_x += quad_x.adjoint().eval();
  p.controls.push_back(Operator::from_dense(quad_x / std::sqrt(double(cavity_dim)), true));
  DenseMatrix quad_y = kImag * kron(id_qubit_side, annihilation(cavity_dim)).to_dense();
  quad_y += quad_y.adjoint().eval();
  p.controls.push_back(Operator::from_dense(quad_y / std::sqrt(double(cavity_dim)), true));
  for (int k = 0; k < 4; ++k) p.bounds.push_back(scale);

  for (int m = 0; m < f; ++m)
    p.fluctuations.push_back(
        {Operator::from_dense(oracles::random_hermitian(d, rng, 1.0), true),
         0.02 * (m + 1) / (steps * tau), "f" + std::to_string(m)});
  for (int m = 0; m < v; ++m) {
    const DenseMatrix jump = oracles::random_matrix(d, rng);
    p.noise.push_back({Operator::from_dense(jump / jump.norm(), false),
                       0.01 * (m + 1) / (steps * tau), "v" + std::to_string(m)});
  }
  p.constraints.push_back({oracles::random_state(d, rng), oracles::random_state(d, rng), 1.0});
  p.grid = {steps, tau};
  p.validate();
  return p;
}

Pulse small_random_pulse(const ControlProblem& p, std::uint64_t seed, double fraction) {
  return random_initial_pulse(p, seed, fraction);
}

}  // namespace

TEST_CASE("free evolution keeps the initial state") {
  ControlProblem p = qubit_problem(10, 0.1);
  const Pulse pulse = zero_pulse(p);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  for (int j = 0; j <= 10; ++j) CHECK((bundle.fwd[size_t(j)] - ket_g()).norm() < 1e-14);
}

TEST_CASE("a pi-area pulse flips the qubit up to the -i phase") {
  ControlProblem p = qubit_problem(100, 0.01);
  Pulse pulse = zero_pulse(p);
  pulse.amplitudes.col(0).setConstant(std::numbers::pi);  // area pi over H = sigma_x/2
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  CHECK((bundle.fwd[100] - (-kImag) * ket_e()).norm() < 1e-9);
}

TEST_CASE("closed propagation matches the dense exponential product") {
  std::mt19937_64 rng(31);
  ControlProblem p = random_open_problem(rng, 8, 3, 0, 0, 0.3);
  const Pulse pulse = small_random_pulse(p, 5, 0.4);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  const DenseMatrix u = oracles::total_unitary(p, pulse);
  CHECK((bundle.fwd[8] - u * p.constraints[0].psi_in).norm() < 1e-9);
  // backward-forward overlap is step independent
  CHECK(std::abs(inner(bundle.bwd[8], bundle.fwd[8]) - inner(bundle.bwd[0], bundle.fwd[0])) <
        1e-9);
}

TEST_CASE("fluctuation trajectories collapse when sigma vanishes") {
  std::mt19937_64 rng(37);
  ControlProblem p = random_open_problem(rng, 6, 2, 2, 0, 0.2);
  for (auto& term : p.fluctuations) term.sigma = 0.0;
  const Pulse pulse = small_random_pulse(p, 6, 0.3);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_fluctuation(p, pulse, p.constraints[0], bundle);
  for (int j = 0; j <= 6; ++j) {
    CHECK((bundle.tilted_fwd[0][size_t(j)] - bundle.fwd[size_t(j)]).norm() < 1e-13);
    CHECK((bundle.tilted_bwd[0][size_t(j)] - bundle.bwd[size_t(j)]).norm() < 1e-13);
    if (j >= 1) CHECK(bundle.response_fwd[size_t(j)].norm() < 1e-13);
  }
  CHECK(j_f(bundle, p, 6) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single-step response matches the closed form") {
  std::mt19937_64 rng(41);
  ControlProblem p = random_open_problem(rng, 1, 2, 1, 0, 0.2);
  const Pulse pulse = small_random_pulse(p, 7, 0.5);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_fluctuation(p, pulse, p.constraints[0], bundle);
  const double tau = p.grid.step_size;
  const StateVector expected = Complex(0.0, -tau * p.fluctuations[0].sigma) *
                               p.fluctuations[0].hamiltonian.apply(bundle.fwd[1]);
  CHECK((bundle.response_fwd[1] - expected).norm() < 1e-13);
}

TEST_CASE("accumulated response matches direct summation") {
  std::mt19937_64 rng(43);
  ControlProblem p = random_open_problem(rng, 5, 2, 2, 0, 0.15);
  const Pulse pulse = small_random_pulse(p, 8, 0.4);
  p.propagation.unitarity_rescale = false;  // compare against exact linear recursion
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_fluctuation(p, pulse, p.constraints[0], bundle);
  const StateVector expected =
      oracles::response_reference(p, pulse, p.constraints[0].psi_in, 5);
  CHECK((bundle.response_fwd[5] - expected).norm() < 1e-9);
}

TEST_CASE("decoherence objective vanishes at zero rates") {
  std::mt19937_64 rng(47);
  ControlProblem p = random_open_problem(rng, 6, 2, 0, 2, 0.2);
  for (auto& ch : p.noise) ch.rate = 0.0;
  const Pulse pulse = small_random_pulse(p, 9, 0.3);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_decoherence(p, pulse, p.constraints[0], bundle);
  CHECK(std::abs(j_d(bundle, p, 6)) < 1e-12);
}

TEST_CASE("a dark state suffers no decoherence loss") {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(pauli(PauliKind::X));
  p.bounds.push_back(1.0);
  p.noise.push_back({pauli(PauliKind::Minus), 0.05, "decay"});
  p.constraints.push_back({ket_g(), ket_g(), 1.0});
  p.grid = {50, 0.02};
  p.validate();
  const Pulse pulse = zero_pulse(p);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_decoherence(p, pulse, p.constraints[0], bundle);
  CHECK(std::abs(j_d(bundle, p, 50)) < 1e-12);
}

TEST_CASE("dephasing of a superposition loses kappa T to first order") {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(pauli(PauliKind::X));
  p.bounds.push_back(1.0);
  const double kappa = 0.02, total = 1.0;
  p.noise.push_back({pauli(PauliKind::Z), kappa, "dephasing"});
  p.constraints.push_back({ket_plus(), ket_plus(), 1.0});
  p.grid = {200, total / 200.0};
  p.validate();
  const Pulse pulse = zero_pulse(p);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_decoherence(p, pulse, p.constraints[0], bundle);
  const double jd = j_d(bundle, p, 200);
  CHECK(jd == doctest::Approx(-kappa * total).epsilon(0.02));
}

TEST_CASE("amplitude damping of the excited state loses kappa T to first order") {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(pauli(PauliKind::X));
  p.bounds.push_back(1.0);
  const double kappa = 0.03, total = 1.0;
  p.noise.push_back({pauli(PauliKind::Minus), kappa, "decay"});
  p.constraints.push_back({ket_e(), ket_e(), 1.0});
  p.grid = {150, total / 150.0};
  p.validate();
  const Pulse pulse = zero_pulse(p);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_decoherence(p, pulse, p.constraints[0], bundle);
  CHECK(j_d(bundle, p, 150) == doctest::Approx(-kappa * total).epsilon(0.02));
}

TEST_CASE("noiseless objective equals the dense-oracle fidelity") {
  std::mt19937_64 rng(53);
  ControlProblem p = random_open_problem(rng, 7, 3, 0, 0, 0.25);
  const Pulse pulse = small_random_pulse(p, 10, 0.6);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  const DenseMatrix u = oracles::total_unitary(p, pulse);
  const Complex overlap = (p.constraints[0].psi_out.adjoint() * u * p.constraints[0].psi_in)(0, 0);
  CHECK(j_close(bundle, 7) == doctest::Approx(std::norm(overlap)).epsilon(1e-9));

  // exact transfer and orthogonal transfer
  ControlProblem exact = p;
  exact.constraints[0].psi_out = u * exact.constraints[0].psi_in;
  TrajectoryBundle b2;
  propagate_closed(exact, pulse, exact.constraints[0], b2);
  CHECK(j_close(b2, 7) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("phase fluctuations do not disturb an eigenstate") {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(pauli(PauliKind::X));
  p.bounds.push_back(1.0);
  // the linearized tilt leaves a sigma^2 tau T residue, so keep sigma weak
  p.fluctuations.push_back({pauli(PauliKind::Z), 1e-4, "shift"});
  p.constraints.push_back({ket_g(), ket_g(), 1.0});
  p.grid = {1000, 0.001};
  p.validate();
  const Pulse pulse = zero_pulse(p);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_fluctuation(p, pulse, p.constraints[0], bundle);
  CHECK(std::abs(j_f(bundle, p, 1000)) < 1e-10);
}

TEST_CASE("transverse-state fluctuation loss matches the two-point ensemble") {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(pauli(PauliKind::X));
  p.bounds.push_back(1.0);
  const double sigma = 0.08, total = 2.0;
  p.fluctuations.push_back({pauli(PauliKind::Z), sigma, "shift"});
  p.constraints.push_back({ket_plus(), ket_plus(), 1.0});
  const int steps = 400;
  p.grid = {steps, total / steps};
  p.validate();
  const Pulse pulse = zero_pulse(p);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_fluctuation(p, pulse, p.constraints[0], bundle);
  const double jf = j_f(bundle, p, steps);
  // |<+| exp(-i du T sigma_z) |+>|^2 averaged over du = +/- sigma, minus 1
  const double ensemble = std::cos(sigma * total) * std::cos(sigma * total) - 1.0;
  CHECK(jf == doctest::Approx(-sigma * sigma * total * total).epsilon(3.0 / steps + 5e-3));
  CHECK(jf == doctest::Approx(ensemble).epsilon(0.02));
}

TEST_CASE("penalty terms and their gradient") {
  PulseGrid grid{10, 0.1};
  Pulse pulse;
  pulse.grid = grid;
  pulse.amplitudes = RealMatrix::Zero(10, 1);
  PenaltyConfig config;
  config.enabled = true;
  config.amp_scale = 0.1;
  config.step_scale = 0.1;
  config.amp_threshold = 2.0;
  config.step_threshold = 1.0;

  SUBCASE("zero pulse has zero penalty") {
    const PenaltyResult r = penalties(pulse, config);
    CHECK(r.p_amp == 0.0);
    CHECK(r.p_step == 0.0);
  }

  SUBCASE("single entry at the amplitude threshold") {
    pulse.amplitudes(4, 0) = config.amp_threshold;
    const PenaltyResult r = penalties(pulse, config);
    CHECK(r.p_amp ==
          doctest::Approx(config.amp_scale * (std::numbers::e - 1.0) / 10.0).epsilon(1e-12));
  }

  SUBCASE("gradient matches central differences") {
    std::mt19937_64 rng(59);
    for (int j = 0; j < 10; ++j) pulse.amplitudes(j, 0) = 2.0 * oracles::uniform(rng) - 1.0;
    const PenaltyResult r = penalties(pulse, config);
    const double h = 1e-6;
    for (int j = 0; j < 10; ++j) {
      Pulse up = pulse, down = pulse;
      up.amplitudes(j, 0) += h;
      down.amplitudes(j, 0) -= h;
      const PenaltyResult ru = penalties(up, config);
      const PenaltyResult rd = penalties(down, config);
      const double fd = (ru.p_amp + ru.p_step - rd.p_amp - rd.p_step) / (2.0 * h);
      CHECK(r.gradient(j, 0) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("open report reduces to the closed report without noise") {
  std::mt19937_64 rng(61);
  const ControlProblem p = random_open_problem(rng, 6, 3, 0, 0, 0.2);
  const Pulse pulse = small_random_pulse(p, 11, 0.5);
  const ObjectiveReport open = objective_and_gradient(p, pulse, EvalMode::Open);
  const ObjectiveReport closed = objective_and_gradient(p, pulse, EvalMode::Closed);
  CHECK(open.j_open == closed.j_close);
  CHECK(open.phi == closed.phi);
  CHECK((open.gradient - closed.gradient).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the noiseless optimum is a stationary point") {
  ControlProblem p;
  p.drift = zero_operator(2);
  p.controls.push_back(pauli(PauliKind::X));
  p.bounds.push_back(1.0);
  p.constraints.push_back({ket_g(), ket_g(), 1.0});
  p.grid = {20, 0.05};
  p.validate();
  const ObjectiveReport report = objective_and_gradient(p, zero_pulse(p), EvalMode::Open);
  CHECK(report.phi == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(report.gradient.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic gradients agree with finite differences and improve with tau") {
  std::mt19937_64 rng(67);
  ControlProblem p = random_open_problem(rng, 10, 3, 2, 2, 0.0003);
  const Pulse pulse = small_random_pulse(p, 12, 0.5);
  auto worst_error = [&](const ControlProblem& prob, const Pulse& pl) {
    const ObjectiveReport report = objective_and_gradient(prob, pl, EvalMode::Open);
    double worst = 0.0;
    for (int j = 0; j < prob.grid.steps; ++j) {
      for (int k = 0; k < prob.num_controls(); ++k) {
        const double g = report.gradient(j, k);
        if (std::abs(g) <= 1e-8) continue;
        const double fd = oracles::phi_central_difference(prob, pl, EvalMode::Open, j, k, 1e-6);
        worst = std::max(worst, std::abs(fd - g) / std::abs(g));
      }
    }
    return worst;
  };
  const double err = worst_error(p, pulse);
  CHECK(err < 1e-3);

  // halving tau (same total time, doubled steps) shrinks the error
  ControlProblem fine = p;
  fine.grid = {20, p.grid.step_size / 2.0};
  Pulse fine_pulse;
  fine_pulse.grid = fine.grid;
  fine_pulse.amplitudes.resize(20, p.num_controls());
  for (int j = 0; j < 20; ++j) fine_pulse.amplitudes.row(j) = pulse.amplitudes.row(j / 2);
  const double err_fine = worst_error(fine, fine_pulse);
  CHECK(err_fine < err / 1.5);
}

TEST_CASE("objective pieces are independent of the evaluation index") {
  std::mt19937_64 rng(71);
  ControlProblem p = random_open_problem(rng, 8, 3, 2, 2, 0.05);
  const Pulse pulse = small_random_pulse(p, 13, 0.5);
  TrajectoryBundle bundle;
  propagate_closed(p, pulse, p.constraints[0], bundle);
  propagate_fluctuation(p, pulse, p.constraints[0], bundle);
  propagate_decoherence(p, pulse, p.constraints[0], bundle);
  const int probes[3] = {1, 4, 8};
  const double jc = j_close(bundle, 8), jf = j_f(bundle, p, 8), jd = j_d(bundle, p, 8);
  for (int j : probes) {
    CHECK(j_close(bundle, j) == doctest::Approx(jc).epsilon(1e-8));
    CHECK(j_f(bundle, p, j) == doctest::Approx(jf).epsilon(1e-8));
    CHECK(j_d(bundle, p, j) == doctest::Approx(jd).epsilon(1e-8));
  }
}

TEST_CASE("a global phase on the target changes nothing") {
  std::mt19937_64 rng(73);
  ControlProblem p = random_open_problem(rng, 6, 2, 1, 1, 0.05);
  const Pulse pulse = small_random_pulse(p, 14, 0.5);
  const ObjectiveReport base = objective_and_gradient(p, pulse, EvalMode::Open);
  ControlProblem rotated = p;
  rotated.constraints[0].psi_out *= std::polar(1.0, 1.234);
  const ObjectiveReport shifted = objective_and_gradient(rotated, pulse, EvalMode::Open);
  CHECK(shifted.j_close == doctest::Approx(base.j_close).epsilon(1e-12));
  CHECK(shifted.j_f == doctest::Approx(base.j_f).epsilon(1e-10));
  CHECK(shifted.j_d == doctest::Approx(base.j_d).epsilon(1e-10));
  CHECK((shifted.gradient - base.gradient).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multi-constraint gradients are the weighted single-constraint sums") {
  std::mt19937_64 rng(79);
  ControlProblem p = random_open_problem(rng, 6, 2, 1, 1, 0.05);
  p.constraints.push_back(
      {oracles::random_state(p.dim(), rng), oracles::random_state(p.dim(), rng), 1.0});
  p.validate();
  const Pulse pulse = small_random_pulse(p, 15, 0.5);
  const ObjectiveReport multi = objective_and_gradient(p, pulse, EvalMode::Open);

  RealMatrix weighted = RealMatrix::Zero(p.grid.steps, p.num_controls());
  for (size_t c = 0; c < p.constraints.size(); ++c) {
    ControlProblem single = p;
    single.constraints = {p.constraints[c]};
    single.constraints[0].weight = 1.0;
    const ObjectiveReport rep = objective_and_gradient(single, pulse, EvalMode::Open);
    weighted += p.constraints[c].weight * rep.j_gradient;
  }
  CHECK((multi.j_gradient - weighted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reports are bitwise deterministic") {
  std::mt19937_64 rng(83);
  const ControlProblem p = random_open_problem(rng, 6, 2, 2, 2, 0.05);
  const Pulse pulse = small_random_pulse(p, 16, 0.5);
  const ObjectiveReport a = objective_and_gradient(p, pulse, EvalMode::Open);
  const ObjectiveReport b = objective_and_gradient(p, pulse, EvalMode::Open);
  CHECK(a.phi == b.phi);
  CHECK(a.j_open == b.j_open);
  CHECK((a.gradient - b.gradient).cwiseAbs().maxCoeff() == 0.0);
}
