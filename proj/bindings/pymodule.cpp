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
//
// Python veneer over the main operations. Rationals cross the boundary as
// "p/q" strings so nothing ever rounds.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cps/isomorphism.hpp"
#include "cps/json_io.hpp"
#include "cps/randomness.hpp"

namespace py = pybind11;
using namespace cps;

namespace {

std::string qs(const Rational& q) { return rat_to_string(q); }
Rational qr(const std::string& s) { return rat_from_string(s); }

DynSystem system_by_name(const std::string& name, const std::string& p) {
  if (name == "shift") return shift_system(qr(p));
  if (name == "doubling") return doubling_system();
  if (name == "mp") return mp_system(qr(p));
  if (name == "rotation-golden") return rotation_system(golden_conjugate());
  fail(Errc::bad_parameter, "unknown system: " + name);
}

ComputableMeasure measure_by_name(const std::string& name) {
  if (name == "lebesgue") return lebesgue();
  if (name == "piecewise-halves") return piecewise_halves();
  if (name == "quadratic") return quadratic_cdf();
  if (name == "flat-middle") return flat_middle();
  if (name == "half-atom-mixture")
    return atomic_mixture({{Rational(1, 2), 1}}, lebesgue(), Rational(1, 2));
  fail(Errc::bad_parameter, "unknown measure: " + name);
}

ObservableFn observable_for(const DynSystem& sys, const std::string& spec) {
  if (sys.kind == DynKind::shift) return obs_cylinder(spec);
  auto comma = spec.find(',');
  if (comma == std::string::npos) fail(Errc::bad_parameter, "dyadic observable is 'lo,hi'");
  return obs_dyadic(qr(spec.substr(0, comma)), qr(spec.substr(comma + 1)));
}

ApproxPoint point_for(const DynSystem& sys, const py::dict& spec) {
  std::string type = spec["type"].cast<std::string>();
  if (type == "pseudorandom")
    return pseudorandom_point(spec["seed"].cast<std::uint64_t>(),
                              spec["bits"].cast<std::uint64_t>());
  if (type == "oscillating") return oscillating_point(spec["base"].cast<int>());
  if (type == "word") return point_from_word(spec["word"].cast<std::string>());
  if (type == "rational") return point_from_rational(qr(spec["value"].cast<std::string>()));
  (void)sys;
  fail(Errc::bad_parameter, "unknown point type: " + type);
}

}  // namespace

PYBIND11_MODULE(_cpslab, m) {
  m.doc() = "exact-arithmetic computable probability spaces";

  py::register_exception<Error>(m, "CpsError");

  m.def("prokhorov", [](const std::string& mu, const std::string& nu) {
    return qs(prokhorov_exact(finite_measure_from_json(Json::parse(mu)),
                              finite_measure_from_json(Json::parse(nu))));
  }, py::arg("mu_json"), py::arg("nu_json"),
     "Exact Prokhorov distance of two finite measures (JSON payloads).");

  m.def("prokhorov_bracket", [](const std::string& mu, const std::string& nu, long n) {
    auto [lo, hi] = prokhorov_bracket(finite_measure_from_json(Json::parse(mu)),
                                      finite_measure_from_json(Json::parse(nu)), n);
    return py::make_tuple(qs(lo), qs(hi));
  }, py::arg("mu_json"), py::arg("nu_json"), py::arg("precision"));

  m.def("correlation", [](const std::string& sys_name, const std::string& p,
                          const std::string& e, const std::string& f, long n) {
    DynSystem sys = system_by_name(sys_name, p);
    return qs(correlation(sys, observable_for(sys, e), observable_for(sys, f), n));
  }, py::arg("system"), py::arg("param"), py::arg("e"), py::arg("f"), py::arg("n"));

  m.def("deviation_measure", [](const std::string& sys_name, const std::string& p,
                                const std::string& obs, const std::string& delta, long n,
                                const std::string& mode) {
    DynSystem sys = system_by_name(sys_name, p);
    DeviationMode dm = mode == "exact" ? DeviationMode::exact : DeviationMode::chebyshev;
    return qs(deviation_measure(sys, observable_for(sys, obs), qr(delta), n, dm));
  }, py::arg("system"), py::arg("param"), py::arg("observable"), py::arg("delta"),
     py::arg("n"), py::arg("mode") = "exact");

  m.def("birkhoff_average", [](const std::string& sys_name, const std::string& p,
                               const std::string& obs, const py::dict& point,
                               const std::string& n) {
    DynSystem sys = system_by_name(sys_name, p);
    BirkhoffValue v = birkhoff_average(sys, observable_for(sys, obs), point_for(sys, point),
                                       Int(n));
    return py::make_tuple(qs(v.lo), qs(v.hi));
  }, py::arg("system"), py::arg("param"), py::arg("observable"), py::arg("point"),
     py::arg("n"));

  m.def("typicality_report", [](const std::string& sys_name, const std::string& p,
                                const std::string& obs, const py::dict& point,
                                const std::string& alpha, std::size_t max_i,
                                std::size_t dense) {
    DynSystem sys = system_by_name(sys_name, p);
    BirkhoffReport rep = typicality_experiment(sys, point_for(sys, point),
                                               observable_for(sys, obs),
                                               make_schedule(qr(alpha)), max_i, dense);
    py::list rows;
    for (const auto& r : rep.rows)
      rows.append(py::make_tuple(r.n.str(), qs(r.avg_lo), qs(r.avg_hi), r.on_schedule));
    return py::make_tuple(qs(rep.mean), qs(rep.window_oscillation), rows);
  }, py::arg("system"), py::arg("param"), py::arg("observable"), py::arg("point"),
     py::arg("alpha") = "1/2", py::arg("max_i") = 16, py::arg("dense_upto") = 64);

  m.def("schedule", [](const std::string& alpha) {
    SubsequenceSchedule s = make_schedule(qr(alpha));
    return py::make_tuple(s.beta, qs(s.tail_bound(1)), qs(s.tail_bound(10)));
  }, py::arg("alpha"));

  m.def("zero_measure_point", [](const std::string& measure, const std::string& a,
                                 const std::string& b, std::size_t depth, long budget) {
    ZeroMeasurePoint zp = find_zero_measure_point(measure_by_name(measure), qr(a), qr(b),
                                                   budget);
    zp.extend(depth);
    ZeroMeasureTrace t = zp.trace();
    py::list rows;
    for (std::size_t k = 0; k < t.intervals.size(); ++k)
      rows.append(py::make_tuple(qs(t.intervals[k].first), qs(t.intervals[k].second),
                                 qs(t.upper_bounds[k])));
    return py::make_tuple(qs(eval(zp.value, long(depth))), rows);
  }, py::arg("measure"), py::arg("a") = "0/1", py::arg("b") = "1/1", py::arg("depth") = 20,
     py::arg("budget") = 64);

  m.def("cdf_forward", [](const std::string& measure, const std::string& x, long n) {
    CdfIsomorphism iso = make_cdf_isomorphism(measure_by_name(measure));
    return qs(cdf_forward(iso, const_real(qr(x)), n));
  }, py::arg("measure"), py::arg("x"), py::arg("precision") = 10);

  m.def("cdf_inverse", [](const std::string& measure, const std::string& y, long n,
                          long budget) {
    CdfIsomorphism iso = make_cdf_isomorphism(measure_by_name(measure), budget);
    return qs(cdf_inverse(iso, const_real(qr(y)), n));
  }, py::arg("measure"), py::arg("y"), py::arg("precision") = 8, py::arg("budget") = 80);

  m.def("binary_expand", [](const std::string& x, long k) {
    return binary_expand(const_real(qr(x)), k);
  }, py::arg("x"), py::arg("bits"));

  m.def("binary_decode", [](const std::string& bits, long n) {
    return qs(eval(binary_decode(point_from_word(bits)), n));
  }, py::arg("bits"), py::arg("precision") = 20);

  m.def("convert_halving_test", [](long k, long precision) {
    SchnorrTest s = strong_bc_to_schnorr(halving_intervals_test(), 1);
    return qs(eval(s.measure_oracle(k), precision));
  }, py::arg("level"), py::arg("precision") = 40,
     "Certified level measure of the converted halving-intervals test.");

  m.def("verify_point", [](const std::string& test, const std::string& point, long levels,
                           long budget) {
    SchnorrTest t = test == "halving-schnorr" ? halving_schnorr_test()
                                              : zero_cylinder_schnorr_test();
    ApproxPoint x = point.find('/') != std::string::npos
                        ? point_from_rational(qr(point))
                        : point_from_word(point);
    VerifyResult res = verify_failure(x, t, levels, budget);
    py::list certs;
    for (const auto& cert : res.certificates)
      certs.append(py::make_tuple(cert.level, cert.stage));
    return py::make_tuple(res.complete(), certs);
  }, py::arg("test"), py::arg("point"), py::arg("levels") = 8, py::arg("budget") = 48);

  m.def("mp_orbit", [](const std::string& x0, long steps, long work_bits) {
    DynSystem mp = mp_system(1);
    auto orbit = mp_orbit_enclosure(mp, qr(x0), steps, work_bits);
    py::list rows;
    for (const auto& I : orbit) rows.append(py::make_tuple(qs(I.lo), qs(I.width)));
    return rows;
  }, py::arg("x0") = "1/3", py::arg("steps") = 100, py::arg("work_bits") = 128);

  m.def("oscillating_block_average", [](int base, int block) {
    ApproxPoint x = oscillating_point(base);
    DynSystem s = shift_system();
    Int n = 0, len = 1;
    for (int j = 1; j <= block; ++j) {
      len *= base;
      n += len;
    }
    BirkhoffValue v = birkhoff_average(s, obs_cylinder("1"), x, n);
    return qs(v.lo);
  }, py::arg("base") = 10, py::arg("block") = 4);
}
