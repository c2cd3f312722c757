// Copyright 2026 The cpslab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPS_JSON_IO_HPP
#define CPS_JSON_IO_HPP

#include <json.hpp>

#include "cps/dynamics.hpp"
#include "cps/measures.hpp"
#include "cps/randomness.hpp"

namespace cps {

using Json = nlohmann::json;

// FiniteMeasure <-> {"space": ..., "atoms": [{"point": ..., "weight": "p/q"}]}
Json finite_measure_to_json(const FiniteMeasure& m);
FiniteMeasure finite_measure_from_json(const Json& j);

// EffectiveOpen snapshot at a stage: list of {"center": ..., "radius": "p/q"}.
Json effective_open_snapshot(const EffectiveOpen& u, long stage);

Json certificate_to_json(const FailureCertificate& cert);
FailureCertificate certificate_from_json(const Json& j, SpaceId space);

Json verify_result_to_json(const VerifyResult& res);

// ZeroMeasureTrace as CSV rows: k,a,b,upper_bound.
std::string zero_trace_csv(const ZeroMeasureTrace& trace);

// BirkhoffReport CSV: n,S_n_over_n,mean,abs_dev,on_schedule.
std::string birkhoff_report_csv(const BirkhoffReport& report);

std::string mixing_report_csv(const std::vector<MixingRow>& rows);

// (x, F(x), G(F(x))) triples.
std::string isomorphism_csv(const std::vector<std::array<Rational, 3>>& rows);

// Serialized description of a (converted) Schnorr test: per-level ball
// snapshots and certified measure brackets.
Json schnorr_test_to_json(const SchnorrTest& test, long levels, long stage, long precision);

}  // namespace cps

#endif  // CPS_JSON_IO_HPP
