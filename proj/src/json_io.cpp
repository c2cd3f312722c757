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

#include "cps/json_io.hpp"

#include <sstream>

#include "cps/errors.hpp"

namespace cps {

namespace {

Json point_to_json(const IdealPoint& p) {
  if (const Word* w = std::get_if<Word>(&p)) return Json{{"word", *w}};
  return Json{{"rational", rat_to_string(std::get<Rational>(p))}};
}

IdealPoint point_from_json(const Json& j, SpaceId space) {
  if (space == SpaceId::cantor) return IdealPoint(j.at("word").get<std::string>());
  return IdealPoint(rat_from_string(j.at("rational").get<std::string>()));
}

SpaceId space_from_string(const std::string& s) {
  if (s == "cantor") return SpaceId::cantor;
  if (s == "unit_interval") return SpaceId::unit_interval;
  fail(Errc::bad_parameter, "unknown space: " + s);
}

}  // namespace

Json finite_measure_to_json(const FiniteMeasure& m) {
  Json atoms = Json::array();
  for (const auto& [p, w] : m.atoms)
    atoms.push_back({{"point", point_to_json(p)}, {"weight", rat_to_string(w)}});
  return Json{{"space", space_name(m.space)}, {"atoms", atoms}};
}

FiniteMeasure finite_measure_from_json(const Json& j) {
  SpaceId space = space_from_string(j.at("space").get<std::string>());
  std::vector<std::pair<IdealPoint, Rational>> atoms;
  for (const auto& a : j.at("atoms"))
    atoms.push_back({point_from_json(a.at("point"), space),
                     rat_from_string(a.at("weight").get<std::string>())});
  return make_finite_measure(space, std::move(atoms));
}

Json effective_open_snapshot(const EffectiveOpen& u, long stage) {
  Json balls = Json::array();
  for (const auto& b : u.enumerate(stage))
    balls.push_back(
        {{"center", point_to_json(b.center)}, {"radius", rat_to_string(b.radius)}});
  return Json{{"space", space_name(u.space)}, {"stage", stage}, {"balls", balls}};
}

Json certificate_to_json(const FailureCertificate& cert) {
  return Json{{"test", cert.test_id},
              {"level", cert.level},
              {"stage", cert.stage},
              {"ball",
               {{"center", point_to_json(cert.ball.center)},
                {"radius", rat_to_string(cert.ball.radius)}}}};
}

FailureCertificate certificate_from_json(const Json& j, SpaceId space) {
  return {j.at("test").get<std::string>(), j.at("level").get<long>(),
          j.at("stage").get<long>(),
          IdealBall{space, point_from_json(j.at("ball").at("center"), space),
                    rat_from_string(j.at("ball").at("radius").get<std::string>())}};
}

Json verify_result_to_json(const VerifyResult& res) {
  Json certs = Json::array();
  for (const auto& c : res.certificates) certs.push_back(certificate_to_json(c));
  return Json{{"certificates", certs},
              {"uncertified_levels", res.uncertified},
              {"complete", res.complete()}};
}

std::string zero_trace_csv(const ZeroMeasureTrace& trace) {
  std::ostringstream out;
  out << "k,a,b,upper_bound\n";
  for (std::size_t k = 0; k < trace.intervals.size(); ++k) {
    out << k << ',' << rat_to_string(trace.intervals[k].first) << ','
        << rat_to_string(trace.intervals[k].second) << ','
        << rat_to_string(trace.upper_bounds[k]) << '\n';
  }
  return out.str();
}

std::string birkhoff_report_csv(const BirkhoffReport& report) {
  std::ostringstream out;
  out << "n,S_n_over_n,mean,abs_dev,on_schedule\n";
  for (const auto& row : report.rows) {
    Rational mid = (row.avg_lo + row.avg_hi) / 2;
    out << row.n.str() << ',' << rat_to_string(mid) << ',' << rat_to_string(row.mean) << ','
        << rat_to_string(row.abs_dev) << ',' << (row.on_schedule ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string mixing_report_csv(const std::vector<MixingRow>& rows) {
  std::ostringstream out;
  out << "i,j,n,C_n_lo,C_n_hi,exact,bound,pass,exact_zero_expected\n";
  for (const auto& r : rows) {
    out << r.i << ',' << r.j << ',' << r.n << ',' << rat_to_string(r.value_lo) << ','
        << rat_to_string(r.value_hi) << ',' << (r.exact ? "true" : "false") << ','
        << rat_to_string(r.bound_value) << ',' << (r.pass ? "true" : "false") << ','
        << (r.expect_exact_zero ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string isomorphism_csv(const std::vector<std::array<Rational, 3>>& rows) {
  std::ostringstream out;
  out << "x,F_x,G_F_x\n";
  for (const auto& r : rows)
    out << rat_to_string(r[0]) << ',' << rat_to_string(r[1]) << ',' << rat_to_string(r[2])
        << '\n';
  return out.str();
}

Json schnorr_test_to_json(const SchnorrTest& test, long levels, long stage, long precision) {
  Json out;
  out["id"] = test.ml.id;
  out["space"] = space_name(test.ml.mu.space());
  Json lv = Json::array();
  for (long k = 1; k <= levels; ++k) {
    Json entry;
    entry["level"] = k;
    entry["balls"] = effective_open_snapshot(test.ml.levels(k), stage);
    Rational measured = eval(test.measure_oracle(k), precision);
    entry["measure"] = rat_to_string(measured);
    entry["measure_precision"] = precision;
    entry["bound_2_minus_k"] = rat_to_string(pow2(-k));
    entry["within_bound"] = measured - pow2(-precision) < pow2(-k);
    if (test.ml.exact_measure) {
      if (auto m = test.ml.exact_measure(k)) entry["exact_measure"] = rat_to_string(*m);
    }
    lv.push_back(std::move(entry));
  }
  out["levels"] = lv;
  return out;
}

}  // namespace cps
