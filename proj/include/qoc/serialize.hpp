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
#ifndef QOC_SERIALIZE_HPP
#define QOC_SERIALIZE_HPP

#include <nlohmann/json_fwd.hpp>

#include "qoc/analysis.hpp"
#include "qoc/lindblad.hpp"
#include "qoc/optimizer.hpp"

// JSON forms of the reports, records, and curves the CLI writes, plus the
// operator/state sub-schema shared with the problem files.
namespace qoc {

nlohmann::json operator_to_json(const Operator& op);
// Accepts {"dim", "entries": [[i,j,re,im],...]}, a named builder
// {"builder": "annihilation"|"creation"|"number"|"identity"|"pauli_x"|...,
//  "dim": d}, {"kron": [ ... ]}, {"sum": [ ... ]}, or
// {"scale": [re, im], "of": ...}. `where` prefixes error messages.
Operator operator_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json state_to_json(const StateVector& psi);
StateVector state_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json problem_to_json(const ControlProblem& problem);
ControlProblem problem_from_json(const nlohmann::json& j, const std::string& origin);

nlohmann::json report_to_json(const ObjectiveReport& report);
nlohmann::json evaluation_to_json(const EvaluationReport& report);
nlohmann::json result_to_json(const OptimizationResult& result);

nlohmann::json batch_record_to_json(const BatchRecord& record);
BatchRecord batch_record_from_json(const nlohmann::json& j);
nlohmann::json yield_summary_to_json(const YieldSummary& summary);

void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

std::vector<BatchRecord> load_batch_records(const std::string& path);
void append_batch_record(const BatchRecord& record, const std::string& path);

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path,
                     const std::string& manifest_ref = "");
void write_bench_csv(const BenchSummary& summary, const std::string& path,
                     const std::string& manifest_ref = "");
nlohmann::json bench_summary_to_json(const BenchSummary& summary);
void write_error_curve_csv(const ErrorCurve& curve, const std::string& path,
                           const std::string& manifest_ref = "");

}  // namespace qoc

#endif  // QOC_SERIALIZE_HPP
