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
#include "qoc/serialize.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qoc {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const json& require(const json& j, const char* field, const std::string& where) {
  if (!j.is_object() || !j.contains(field)) fail(where, std::string("missing field '") + field + "'");
  return j.at(field);
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Index as_index(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<Index>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

Operator builder_by_name(const std::string& name, const json& j, const std::string& where) {
  auto dim = [&]() { return as_index(require(j, "dim", where), where + ".dim"); };
  if (name == "annihilation") return annihilation(dim());
  if (name == "creation") return creation(dim());
  if (name == "number") return number_operator(dim());
  if (name == "identity") return identity_operator(dim());
  if (name == "zero") return zero_operator(dim());
  if (name == "pauli_x") return pauli(PauliKind::X);
  if (name == "pauli_y") return pauli(PauliKind::Y);
  if (name == "pauli_z") return pauli(PauliKind::Z);
  if (name == "pauli_plus") return pauli(PauliKind::Plus);
  if (name == "pauli_minus") return pauli(PauliKind::Minus);
  fail(where + ".builder", "unknown builder name '" + name + "'");
}

Operator sum_operators(const std::vector<Operator>& parts, const std::string& where) {
  if (parts.empty()) fail(where, "empty operator list");
  const Index d = parts.front().dim();
  SparseMatrix acc(d, d);
  for (size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].dim() != d) fail(where + "[" + std::to_string(i) + "]", "dimension mismatch in sum");
    SparseMatrix term(d, d);
    const auto t = parts[i].triplets();
    term.setFromTriplets(t.begin(), t.end());
    acc += term;
  }
  return Operator::from_sparse(std::move(acc), false);
}

}  // namespace

json operator_to_json(const Operator& op) {
  json entries = json::array();
  for (const auto& t : op.triplets())
    entries.push_back({t.row(), t.col(), t.value().real(), t.value().imag()});
  return json{{"dim", op.dim()}, {"entries", std::move(entries)}};
}

Operator operator_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an operator object");
  if (j.contains("builder"))
    return builder_by_name(as_string(j.at("builder"), where + ".builder"), j, where);
  if (j.contains("kron")) {
    const json& factors = j.at("kron");
    if (!factors.is_array() || factors.size() < 2) fail(where + ".kron", "expected >= 2 factors");
    Operator acc = operator_from_json(factors.at(0), where + ".kron[0]");
    for (size_t i = 1; i < factors.size(); ++i)
      acc = kron(acc, operator_from_json(factors.at(i), where + ".kron[" + std::to_string(i) + "]"));
    return acc;
  }
  if (j.contains("sum")) {
    const json& parts = j.at("sum");
    if (!parts.is_array() || parts.empty()) fail(where + ".sum", "expected a non-empty array");
    std::vector<Operator> ops;
    for (size_t i = 0; i < parts.size(); ++i)
      ops.push_back(operator_from_json(parts.at(i), where + ".sum[" + std::to_string(i) + "]"));
    return sum_operators(ops, where + ".sum");
  }
  if (j.contains("scale")) {
    const json& s = j.at("scale");
    Complex factor;
    if (s.is_number()) {
      factor = Complex(s.get<double>(), 0.0);
    } else if (s.is_array() && s.size() == 2) {
      factor = Complex(as_double(s.at(0), where + ".scale[0]"), as_double(s.at(1), where + ".scale[1]"));
    } else {
      fail(where + ".scale", "expected a number or [re, im]");
    }
    return operator_from_json(require(j, "of", where), where + ".of").scaled(factor);
  }
  const Index d = as_index(require(j, "dim", where), where + ".dim");
  const json& entries = require(j, "entries", where);
  if (!entries.is_array()) fail(where + ".entries", "expected an array");
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(entries.size());
  for (size_t n = 0; n < entries.size(); ++n) {
    const std::string at = where + ".entries[" + std::to_string(n) + "]";
    const json& e = entries.at(n);
    if (!e.is_array() || e.size() != 4) fail(at, "expected [i, j, re, im]");
    const Index row = as_index(e.at(0), at);
    const Index col = as_index(e.at(1), at);
    if (row < 0 || col < 0 || row >= d || col >= d) fail(at, "index out of range");
    triplets.emplace_back(row, col, Complex(as_double(e.at(2), at), as_double(e.at(3), at)));
  }
  return Operator::from_triplets(d, triplets);
}

json state_to_json(const StateVector& psi) {
  json amps = json::array();
  for (Index i = 0; i < psi.size(); ++i) amps.push_back({psi(i).real(), psi(i).imag()});
  return json{{"dim", psi.size()}, {"amplitudes", std::move(amps)}};
}

StateVector state_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a state object");
  const Index d = as_index(require(j, "dim", where), where + ".dim");
  if (d <= 0) fail(where + ".dim", "must be positive");
  if (j.contains("basis")) {
    const Index idx = as_index(j.at("basis"), where + ".basis");
    if (idx < 0 || idx >= d) fail(where + ".basis", "index out of range");
    StateVector psi = StateVector::Zero(d);
    psi(idx) = 1.0;
    return psi;
  }
  const json& amps = require(j, "amplitudes", where);
  if (!amps.is_array() || Index(amps.size()) != d) fail(where + ".amplitudes", "wrong length");
  StateVector psi(d);
  for (Index i = 0; i < d; ++i) {
    const std::string at = where + ".amplitudes[" + std::to_string(i) + "]";
    const json& e = amps.at(size_t(i));
    if (!e.is_array() || e.size() != 2) fail(at, "expected [re, im]");
    psi(i) = Complex(as_double(e.at(0), at), as_double(e.at(1), at));
  }
  return psi;
}

json problem_to_json(const ControlProblem& p) {
  json j;
  j["units"] = {{"frequency", "rad_per_us"}, {"two_pi", false}};
  j["drift"] = operator_to_json(p.drift);
  json controls = json::array();
  for (size_t k = 0; k < p.controls.size(); ++k)
    controls.push_back({{"hamiltonian", operator_to_json(p.controls[k])}, {"bound", p.bounds[k]}});
  j["controls"] = std::move(controls);
  json noise = json::array();
  for (const auto& ch : p.noise)
    noise.push_back(
        {{"jump", operator_to_json(ch.jump)}, {"rate_per_us", ch.rate}, {"label", ch.label}});
  j["noise"] = std::move(noise);
  json fluct = json::array();
  for (const auto& term : p.fluctuations)
    fluct.push_back({{"hamiltonian", operator_to_json(term.hamiltonian)},
                     {"sigma", term.sigma},
                     {"label", term.label}});
  j["fluctuations"] = std::move(fluct);
  json constraints = json::array();
  for (const auto& con : p.constraints)
    constraints.push_back({{"psi_in", state_to_json(con.psi_in)},
                           {"psi_out", state_to_json(con.psi_out)},
                           {"weight", con.weight}});
  j["constraints"] = std::move(constraints);
  j["grid"] = {{"steps", p.grid.steps}, {"tau_us", p.grid.step_size}};
  j["penalties"] = {{"enabled", p.penalties.enabled},
                    {"amp_scale", p.penalties.amp_scale},
                    {"step_scale", p.penalties.step_scale},
                    {"amp_threshold", p.penalties.amp_threshold},
                    {"step_threshold", p.penalties.step_threshold}};
  j["propagation"] = {{"taylor_order", p.propagation.taylor_order},
                      {"unitarity_rescale", p.propagation.unitarity_rescale}};
  return j;
}

ControlProblem problem_from_json(const json& j, const std::string& origin) {
  if (!j.is_object()) fail(origin, "expected a JSON object");
  double scale = 1.0;  // frequency fields -> rad/us
  if (j.contains("units")) {
    const json& units = j.at("units");
    if (as_bool(require(units, "two_pi", origin + ".units"), origin + ".units.two_pi"))
      scale = kTwoPi;
  }

  ControlProblem p;
  Index cavity_dim_hint = 0;

  if (j.contains("system")) {
    const json& sys = j.at("system");
    const std::string where = origin + ".system";
    const std::string builder = as_string(require(sys, "builder", where), where + ".builder");
    if (builder != "transmon_cavity") fail(where + ".builder", "unknown builder name '" + builder + "'");
    TransmonCavityParams params;
    // builder inputs are plain frequencies; undo the file scale so the
    // builder's own 2*pi conversion is applied exactly once
    params.chi_mhz = as_double(require(sys, "chi_mhz", where), where + ".chi_mhz") * scale / kTwoPi;
    params.kerr_khz = as_double(require(sys, "k2_khz", where), where + ".k2_khz") * scale / kTwoPi;
    params.cavity_dim = as_index(require(sys, "cavity_dim", where), where + ".cavity_dim");
    params.max_amp_mhz =
        as_double(require(sys, "max_amp_mhz", where), where + ".max_amp_mhz") * scale / kTwoPi;
    params.form = DriftForm::DispersiveExcitedShift;
    if (sys.contains("form")) {
      const std::string form = as_string(sys.at("form"), where + ".form");
      if (form == "sigma_z")
        params.form = DriftForm::DispersiveSigmaZ;
      else if (form == "excited_shift")
        params.form = DriftForm::DispersiveExcitedShift;
      else
        fail(where + ".form", "expected 'sigma_z' or 'excited_shift'");
    }
    SystemOperators ops = build_transmon_cavity(params);
    p.drift = std::move(ops.drift);
    p.controls = std::move(ops.controls);
    p.bounds = std::move(ops.bounds);
    cavity_dim_hint = params.cavity_dim;
  } else {
    p.drift = operator_from_json(require(j, "drift", origin), origin + ".drift").scaled(scale);
    const json& controls = require(j, "controls", origin);
    if (!controls.is_array()) fail(origin + ".controls", "expected an array");
    for (size_t k = 0; k < controls.size(); ++k) {
      const std::string where = origin + ".controls[" + std::to_string(k) + "]";
      const json& c = controls.at(k);
      p.controls.push_back(operator_from_json(require(c, "hamiltonian", where), where + ".hamiltonian"));
      p.bounds.push_back(as_double(require(c, "bound", where), where + ".bound") * scale);
    }
  }

  if (j.contains("noise")) {
    const json& noise = j.at("noise");
    if (!noise.is_array()) fail(origin + ".noise", "expected an array");
    for (size_t m = 0; m < noise.size(); ++m) {
      const std::string where = origin + ".noise[" + std::to_string(m) + "]";
      const json& ch = noise.at(m);
      NoiseChannel channel;
      channel.jump = operator_from_json(require(ch, "jump", where), where + ".jump");
      channel.rate = as_double(require(ch, "rate_per_us", where), where + ".rate_per_us");
      if (ch.contains("label")) channel.label = as_string(ch.at("label"), where + ".label");
      p.noise.push_back(std::move(channel));
    }
  }

  if (j.contains("fluctuations")) {
    const json& fluct = j.at("fluctuations");
    if (!fluct.is_array()) fail(origin + ".fluctuations", "expected an array");
    for (size_t m = 0; m < fluct.size(); ++m) {
      const std::string where = origin + ".fluctuations[" + std::to_string(m) + "]";
      const json& term = fluct.at(m);
      FluctuationTerm out;
      out.hamiltonian =
          operator_from_json(require(term, "hamiltonian", where), where + ".hamiltonian");
      out.sigma = as_double(require(term, "sigma", where), where + ".sigma") * scale;
      if (term.contains("label")) out.label = as_string(term.at("label"), where + ".label");
      p.fluctuations.push_back(std::move(out));
    }
  }

  const json& constraints = require(j, "constraints", origin);
  if (constraints.is_object() && constraints.contains("builder")) {
    const std::string where = origin + ".constraints";
    const std::string builder = as_string(constraints.at("builder"), where + ".builder");
    if (builder != "binomial") fail(where + ".builder", "unknown builder name '" + builder + "'");
    const std::string kind = as_string(require(constraints, "kind", where), where + ".kind");
    Index cavity_dim = cavity_dim_hint;
    if (constraints.contains("cavity_dim"))
      cavity_dim = as_index(constraints.at("cavity_dim"), where + ".cavity_dim");
    if (cavity_dim <= 0) fail(where + ".cavity_dim", "missing cavity dimension");
    BinomialTask task;
    if (kind == "encode") task = BinomialTask::Encode;
    else if (kind == "initialize") task = BinomialTask::Initialize;
    else if (kind == "decode") task = BinomialTask::Decode;
    else if (kind == "ry_pi") task = BinomialTask::RyPi;
    else fail(where + ".kind", "expected encode|initialize|decode|ry_pi");
    p.constraints = binomial_constraints(task, cavity_dim);
  } else if (constraints.is_array()) {
    for (size_t c = 0; c < constraints.size(); ++c) {
      const std::string where = origin + ".constraints[" + std::to_string(c) + "]";
      const json& con = constraints.at(c);
      Constraint out;
      out.psi_in = state_from_json(require(con, "psi_in", where), where + ".psi_in");
      out.psi_out = state_from_json(require(con, "psi_out", where), where + ".psi_out");
      if (con.contains("weight")) out.weight = as_double(con.at("weight"), where + ".weight");
      p.constraints.push_back(std::move(out));
    }
  } else {
    fail(origin + ".constraints", "expected an array or a builder object");
  }

  const json& grid = require(j, "grid", origin);
  p.grid.steps = int(as_index(require(grid, "steps", origin + ".grid"), origin + ".grid.steps"));
  p.grid.step_size = as_double(require(grid, "tau_us", origin + ".grid"), origin + ".grid.tau_us");

  if (j.contains("penalties")) {
    const json& pen = j.at("penalties");
    const std::string where = origin + ".penalties";
    if (pen.contains("enabled")) p.penalties.enabled = as_bool(pen.at("enabled"), where + ".enabled");
    if (pen.contains("amp_scale"))
      p.penalties.amp_scale = as_double(pen.at("amp_scale"), where + ".amp_scale");
    if (pen.contains("step_scale"))
      p.penalties.step_scale = as_double(pen.at("step_scale"), where + ".step_scale");
    if (pen.contains("amp_threshold"))
      p.penalties.amp_threshold = as_double(pen.at("amp_threshold"), where + ".amp_threshold") * scale;
    if (pen.contains("step_threshold"))
      p.penalties.step_threshold =
          as_double(pen.at("step_threshold"), where + ".step_threshold") * scale;
  }

  if (j.contains("propagation")) {
    const json& prop = j.at("propagation");
    const std::string where = origin + ".propagation";
    if (prop.contains("taylor_order"))
      p.propagation.taylor_order = int(as_index(prop.at("taylor_order"), where + ".taylor_order"));
    if (prop.contains("unitarity_rescale"))
      p.propagation.unitarity_rescale =
          as_bool(prop.at("unitarity_rescale"), where + ".unitarity_rescale");
  }

  p.validate();
  return p;
}

ControlProblem parse_problem_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": malformed JSON: " + e.what());
  }
  return problem_from_json(j, origin);
}

ControlProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open problem file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_json(buffer.str(), path);
}

void save_problem(const ControlProblem& problem, const std::string& path) {
  write_json_file(problem_to_json(problem), path);
}

json report_to_json(const ObjectiveReport& report) {
  json per = json::array();
  for (const auto& piece : report.per_constraint)
    per.push_back({{"j_close", piece.j_close}, {"j_f", piece.j_f}, {"j_d", piece.j_d}});
  return json{{"j_close", report.j_close},
              {"j_f", report.j_f},
              {"j_d", report.j_d},
              {"j_open", report.j_open},
              {"phi", report.phi},
              {"p_amp", report.p_amp},
              {"p_step", report.p_step},
              {"phi_pinned", report.phi_pinned},
              {"clamped", report.clamped},
              {"gradient_inf_norm",
               report.gradient.size() ? report.gradient.cwiseAbs().maxCoeff() : 0.0},
              {"per_constraint", std::move(per)}};
}

json evaluation_to_json(const EvaluationReport& report) {
  json samples = json::array();
  for (const auto& s : report.samples)
    samples.push_back({{"offsets", s.offsets}, {"fidelity", s.fidelity}});
  return json{{"f_open", report.f_open},
              {"infidelity", report.infidelity},
              {"per_constraint", report.per_constraint},
              {"samples", std::move(samples)},
              {"substeps", report.substeps}};
}

json result_to_json(const OptimizationResult& result) {
  return json{{"phi_history", result.phi_history},
              {"final_report", report_to_json(result.final_report)},
              {"termination", to_string(result.termination)},
              {"iterations", result.iterations},
              {"seconds_per_iteration", result.seconds_per_iteration}};
}

json batch_record_to_json(const BatchRecord& record) {
  json j{{"seed", record.seed},          {"mode", record.mode},
         {"phi", record.phi},            {"infidelity", record.infidelity},
         {"iterations", record.iterations}, {"seconds", record.seconds}};
  if (!record.error.empty()) j["error"] = record.error;
  return j;
}

BatchRecord batch_record_from_json(const json& j) {
  BatchRecord record;
  record.seed = j.at("seed").get<std::uint64_t>();
  record.mode = j.at("mode").get<std::string>();
  record.phi = j.at("phi").get<double>();
  record.infidelity = j.at("infidelity").get<double>();
  record.iterations = j.at("iterations").get<int>();
  record.seconds = j.at("seconds").get<double>();
  if (j.contains("error")) record.error = j.at("error").get<std::string>();
  return record;
}

json yield_summary_to_json(const YieldSummary& summary) {
  json modes;
  for (const auto& [mode, stats] : summary.modes)
    modes[mode] = {{"count", stats.count},
                   {"mean", stats.mean},
                   {"stddev", stats.stddev},
                   {"fraction_below", stats.fraction_below}};
  return json{{"modes", std::move(modes)},
              {"gaussian_mu", summary.gaussian_mu},
              {"gaussian_sigma", summary.gaussian_sigma},
              {"threshold_3sigma", summary.threshold_3sigma},
              {"threshold_used", summary.threshold_used}};
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
  return j;
}

std::vector<BatchRecord> load_batch_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::vector<BatchRecord> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    try {
      records.push_back(batch_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void append_batch_record(const BatchRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << batch_record_to_json(record).dump() << "\n";
}

namespace {

std::ofstream open_csv(const std::string& path, const std::string& manifest_ref) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << "\n";
  out.precision(17);
  return out;
}

}  // namespace

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path,
                     const std::string& manifest_ref) {
  auto out = open_csv(path, manifest_ref);
  out << "s_f,s_m,infidelity\n";
  for (const auto& p : points) out << p.s_f << "," << p.s_m << "," << p.infidelity << "\n";
}

void write_bench_csv(const BenchSummary& summary, const std::string& path,
                     const std::string& manifest_ref) {
  auto out = open_csv(path, manifest_ref);
  out << "d,f,v,mode,seconds\n";
  auto dump = [&out](const std::vector<BenchRow>& rows) {
    for (const auto& r : rows)
      out << r.dim << "," << r.f << "," << r.v << "," << r.mode << "," << r.seconds << "\n";
  };
  dump(summary.dim_rows);
  dump(summary.f_rows);
  dump(summary.v_rows);
}

json bench_summary_to_json(const BenchSummary& summary) {
  auto fit = [](const LinearFit& f) {
    return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
  };
  return json{{"fixed_dim", summary.fixed_dim},
              {"dim_exponent_closed", summary.loglog_closed.slope},
              {"dim_exponent_open", summary.loglog_open.slope},
              {"loglog_closed", fit(summary.loglog_closed)},
              {"loglog_open", fit(summary.loglog_open)},
              {"time_vs_f", fit(summary.time_vs_f)},
              {"time_vs_v", fit(summary.time_vs_v)},
              {"open_closed_ratio", summary.open_closed_ratio}};
}

void write_error_curve_csv(const ErrorCurve& curve, const std::string& path,
                           const std::string& manifest_ref) {
  auto out = open_csv(path, manifest_ref);
  out << "t,re_g1,im_g1\n";
  for (size_t i = 0; i < curve.times.size(); ++i)
    out << curve.times[i] << "," << curve.g1[i].real() << "," << curve.g1[i].imag() << "\n";
}

void save_pulse_csv(const Pulse& pulse, const std::string& path, const std::string& manifest_ref) {
  auto out = open_csv(path, manifest_ref);
  out << "step";
  for (int k = 1; k <= pulse.controls(); ++k) out << ",u_" << k;
  out << "\n";
  for (int j = 0; j < pulse.steps(); ++j) {
    out << j;
    for (int k = 0; k < pulse.controls(); ++k) out << "," << pulse.amplitudes(j, k);
    out << "\n";
  }
}

Pulse load_pulse_csv(const std::string& path, const PulseGrid& grid) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open pulse file '" + path + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.rfind("step", 0) != 0)
        throw ValidationError(path + ": expected header 'step,u_1,...'");
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() < 2) throw ValidationError(path + ":" + std::to_string(lineno) + ": short row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": no pulse rows");
  const size_t controls = rows.front().size() - 1;
  Pulse pulse;
  pulse.grid = grid;
  pulse.amplitudes.resize(Index(rows.size()), Index(controls));
  for (size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != controls + 1)
      throw ValidationError(path + ": inconsistent column count at row " + std::to_string(j));
    for (size_t k = 0; k < controls; ++k) pulse.amplitudes(Index(j), Index(k)) = rows[j][k + 1];
  }
  if (grid.steps != 0 && grid.steps != int(rows.size()))
    throw ValidationError(path + ": pulse has " + std::to_string(rows.size()) +
                          " steps but the problem grid has " + std::to_string(grid.steps));
  pulse.grid.steps = int(rows.size());
  return pulse;
}

void save_pulse_json(const Pulse& pulse, const std::string& path, const std::string& manifest_ref) {
  json rows = json::array();
  for (int j = 0; j < pulse.steps(); ++j) {
    json row = json::array();
    for (int k = 0; k < pulse.controls(); ++k) row.push_back(pulse.amplitudes(j, k));
    rows.push_back(std::move(row));
  }
  json j{{"grid", {{"steps", pulse.grid.steps}, {"tau_us", pulse.grid.step_size}}},
         {"amplitudes", std::move(rows)}};
  if (!manifest_ref.empty()) j["manifest"] = manifest_ref;
  write_json_file(j, path);
}

Pulse load_pulse_json(const std::string& path) {
  const json j = read_json_file(path);
  Pulse pulse;
  const json& grid = require(j, "grid", path);
  pulse.grid.steps = int(as_index(require(grid, "steps", path + ".grid"), path + ".grid.steps"));
  pulse.grid.step_size = as_double(require(grid, "tau_us", path + ".grid"), path + ".grid.tau_us");
  const json& rows = require(j, "amplitudes", path);
  if (!rows.is_array() || rows.empty()) throw ValidationError(path + ".amplitudes: expected rows");
  const size_t controls = rows.at(0).size();
  pulse.amplitudes.resize(Index(rows.size()), Index(controls));
  for (size_t jj = 0; jj < rows.size(); ++jj) {
    const json& row = rows.at(jj);
    if (!row.is_array() || row.size() != controls)
      throw ValidationError(path + ".amplitudes: ragged rows");
    for (size_t k = 0; k < controls; ++k)
      pulse.amplitudes(Index(jj), Index(k)) = as_double(row.at(k), path + ".amplitudes");
  }
  if (pulse.grid.steps != pulse.steps())
    throw ValidationError(path + ": grid steps disagree with the amplitude table");
  return pulse;
}

}  // namespace qoc
