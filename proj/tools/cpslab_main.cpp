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
// Experiment runner: wires the measure/randomness/dynamics machinery to
// config files and CSV/JSON artifacts. Identical config and seed give
// byte-identical outputs; all mathematical computation is deterministic and
// seed-free (seeds only generate pseudorandom test points).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "cps/isomorphism.hpp"
#include "cps/json_io.hpp"

namespace fs = std::filesystem;
using namespace cps;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  long precision = 10;
  long budget = 64;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned jobs = 1;
};

Json load_config(const GlobalOpts& opts) {
  if (opts.config_path.empty()) fail(Errc::bad_parameter, "--config is required here");
  std::ifstream in(opts.config_path);
  if (!in) fail(Errc::bad_parameter, "cannot open config: " + opts.config_path);
  Json j;
  in >> j;
  return j;
}

void write_file(const GlobalOpts& opts, const std::string& name, const std::string& body) {
  fs::create_directories(opts.out_dir);
  fs::path path = fs::path(opts.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  out << body;
  std::cout << "wrote " << path.string() << "\n";
}

void write_json(const GlobalOpts& opts, const std::string& name, const Json& j) {
  write_file(opts, name, j.dump(2) + "\n");
}

Rational rat_field(const Json& j, const std::string& key) {
  return rat_from_string(j.at(key).get<std::string>());
}

DynSystem system_from_config(const Json& j) {
  std::string kind = j.at("system").get<std::string>();
  Json params = j.value("params", Json::object());
  if (kind == "shift") {
    Rational p = params.contains("p") ? rat_field(params, "p") : Rational(1, 2);
    return shift_system(p);
  }
  if (kind == "doubling") return doubling_system();
  if (kind == "mp") {
    Rational s = params.contains("s") ? rat_field(params, "s") : Rational(1);
    return mp_system(s);
  }
  if (kind == "rotation") {
    if (params.value("theta", "") == "golden") return rotation_system(golden_conjugate());
    return rotation_system(const_real(rat_field(params, "theta")));
  }
  fail(Errc::bad_parameter, "unknown system: " + kind);
}

ObservableFn observable_from_config(const Json& j) {
  const Json& o = j.at("observable");
  std::string type = o.at("type").get<std::string>();
  if (type == "cylinder") return obs_cylinder(o.at("word").get<std::string>());
  if (type == "dyadic") return obs_dyadic(rat_field(o, "lo"), rat_field(o, "hi"));
  fail(Errc::bad_parameter, "unknown observable type: " + type);
}

ApproxPoint point_from_config(const Json& j, std::uint64_t seed) {
  const Json& p = j.at("point_spec");
  std::string type = p.at("type").get<std::string>();
  if (type == "pseudorandom")
    return pseudorandom_point(seed, p.value("bits", std::uint64_t(1) << 20));
  if (type == "oscillating") return oscillating_point(p.value("base", 10));
  if (type == "word") return point_from_word(p.at("word").get<std::string>());
  if (type == "rational") return point_from_rational(rat_field(p, "value"));
  if (type == "bits_file") {
    std::ifstream in(p.at("path").get<std::string>());
    if (!in) fail(Errc::bad_parameter, "cannot open bits file");
    std::string bits;
    in >> bits;
    return point_from_word(bits);
  }
  fail(Errc::bad_parameter, "unknown point_spec type: " + type);
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

int run_birkhoff(const GlobalOpts& opts) {
  Json cfg = load_config(opts);
  DynSystem sys = system_from_config(cfg);
  ObservableFn f = observable_from_config(cfg);
  std::uint64_t seed = opts.seed_set ? opts.seed : cfg.value("seed", std::uint64_t(42));
  ApproxPoint x = point_from_config(cfg, seed);
  Rational alpha = cfg.contains("schedule") ? rat_field(cfg.at("schedule"), "alpha")
                                            : Rational(1, 2);
  SubsequenceSchedule sched = make_schedule(alpha);
  std::size_t max_i = cfg.value("max_i", std::size_t(16));
  std::size_t dense = cfg.value("dense_upto", std::size_t(64));
  BirkhoffReport report = typicality_experiment(sys, x, f, sched, max_i, dense);
  write_file(opts, "birkhoff.csv", birkhoff_report_csv(report));
  Json summary{{"mean", rat_to_string(report.mean)},
               {"window_oscillation", rat_to_string(report.window_oscillation)},
               {"rows", report.rows.size()},
               {"schedule_beta", sched.beta},
               {"seed", seed}};
  write_json(opts, "birkhoff_summary.json", summary);
  return 0;
}

int run_correlation(const GlobalOpts& opts) {
  Json cfg = load_config(opts);
  DynSystem sys = system_from_config(cfg);
  std::vector<ObservableFn> events;
  for (const auto& e : cfg.at("events")) {
    if (e.contains("word")) events.push_back(obs_cylinder(e.at("word").get<std::string>()));
    else events.push_back(obs_dyadic(rat_field(e, "lo"), rat_field(e, "hi")));
  }
  Rational alpha = rat_field(cfg.at("bound"), "alpha");
  Rational c = rat_field(cfg.at("bound"), "c");
  CorrelationBound bound{alpha, [c](std::size_t, std::size_t) { return c; }};
  long n_lo = cfg.value("n_lo", 1L), n_hi = cfg.value("n_hi", 8L);

  // Parameter grid parallelism: rows per n, merged by parameter order.
  std::vector<std::vector<MixingRow>> chunks(std::size_t(n_hi - n_lo + 1));
  unsigned jobs = std::max(1u, opts.jobs);
  std::vector<std::thread> workers;
  std::atomic<long> next{n_lo};
  auto work = [&]() {
    while (true) {
      long n = next.fetch_add(1);
      if (n > n_hi) break;
      chunks[std::size_t(n - n_lo)] = verify_mixing(sys, events, bound, n, n, opts.precision);
    }
  };
  for (unsigned t = 0; t < jobs; ++t) workers.emplace_back(work);
  for (auto& w : workers) w.join();
  std::vector<MixingRow> rows;
  for (auto& ch : chunks) rows.insert(rows.end(), ch.begin(), ch.end());
  write_file(opts, "correlation.csv", mixing_report_csv(rows));
  return 0;
}

int run_deviation(const GlobalOpts& opts) {
  Json cfg = load_config(opts);
  DynSystem sys = system_from_config(cfg);
  ObservableFn f = observable_from_config(cfg);
  Rational delta = rat_field(cfg, "delta");
  std::ostringstream csv;
  csv << "n,exact,chebyshev\n";
  for (const auto& nj : cfg.at("n_values")) {
    long n = nj.get<long>();
    Rational exact = deviation_measure(sys, f, delta, n, DeviationMode::exact);
    Rational cheb = deviation_measure(sys, f, delta, n, DeviationMode::chebyshev);
    csv << n << ',' << rat_to_string(exact) << ',' << rat_to_string(cheb) << '\n';
  }
  write_file(opts, "deviation.csv", csv.str());
  return 0;
}

int run_prokhorov(const GlobalOpts& opts, const std::string& mu_path,
                  const std::string& nu_path, bool approx) {
  auto load = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::bad_parameter, "cannot open measure file: " + path);
    Json j;
    in >> j;
    return finite_measure_from_json(j);
  };
  FiniteMeasure mu = load(mu_path), nu = load(nu_path);
  Json out;
  if (approx) {
    auto [lo, hi] = prokhorov_bracket(mu, nu, opts.precision);
    out = Json{{"lower", rat_to_string(lo)}, {"upper", rat_to_string(hi)}};
    std::cout << rat_to_string(lo) << " .. " << rat_to_string(hi) << "\n";
  } else {
    Rational d = prokhorov_exact(mu, nu);
    out = Json{{"distance", rat_to_string(d)}};
    std::cout << rat_to_string(d) << "\n";
  }
  write_json(opts, "prokhorov.json", out);
  return 0;
}

int run_zero_point(const GlobalOpts& opts, const std::string& measure_name, const Rational& a,
                   const Rational& b, long depth) {
  ComputableMeasure mu = measure_by_name(measure_name);
  ZeroMeasurePoint zp = find_zero_measure_point(mu, a, b, opts.budget);
  zp.extend(std::size_t(depth));
  write_file(opts, "zero_trace.csv", zero_trace_csv(zp.trace()));
  Rational value = eval(zp.value, opts.precision);
  write_json(opts, "zero_point.json",
             Json{{"measure", measure_name},
                  {"precision", opts.precision},
                  {"value", rat_to_string(value)}});
  return 0;
}

int run_convert_test(const GlobalOpts& opts, const std::string& name, long levels, long c) {
  StrongBCTest input = name == "halving-intervals" ? halving_intervals_test()
                       : name == "ones-cylinders"  ? ones_cylinders_test()
                       : name == "empty"
                           ? empty_strong_bc_test(SpaceId::unit_interval)
                           : (fail(Errc::bad_parameter, "unknown test: " + name), StrongBCTest{
                                 "", lebesgue(), nullptr, ApproxReal{}, 0, nullptr, nullptr,
                                 false});
  SchnorrTest converted =
      strong_bc_to_schnorr(input, c >= 0 ? std::optional<long>(c) : std::nullopt);
  Json j = schnorr_test_to_json(converted, levels, opts.budget, opts.precision);
  write_json(opts, "converted_test.json", j);
  return 0;
}

int run_verify(const GlobalOpts& opts, const std::string& point_spec,
               const std::string& test_name, long levels) {
  SchnorrTest test = test_name == "halving-schnorr" ? halving_schnorr_test()
                     : test_name == "zero-cylinders"
                         ? zero_cylinder_schnorr_test()
                         : (fail(Errc::bad_parameter, "unknown test: " + test_name),
                            zero_cylinder_schnorr_test());
  ApproxPoint x = [&]() {
    if (point_spec.find('/') != std::string::npos)
      return point_from_rational(rat_from_string(point_spec));
    if (fs::exists(point_spec)) {
      std::ifstream in(point_spec);
      std::string bits;
      in >> bits;
      return point_from_word(bits);
    }
    return point_from_word(point_spec);  // inline binary string
  }();
  if ((test.ml.mu.space() == SpaceId::cantor) != (x.space == SpaceId::cantor))
    fail(Errc::bad_parameter, "point/test space mismatch");
  VerifyResult res = verify_failure(x, test, levels, opts.budget);
  write_json(opts, "verify.json", verify_result_to_json(res));
  std::cout << (res.complete() ? "certified at every level" : "partial certification") << "\n";
  return 0;
}

int run_construct(const GlobalOpts& opts, const std::string& name, long levels) {
  SchnorrTest test = name == "zero-cylinders"
                         ? zero_cylinder_schnorr_test()
                         : (fail(Errc::bad_parameter, "unknown witnessed test: " + name),
                            zero_cylinder_schnorr_test());
  WitnessedTest wt{test, [](long n) {
                     return IdealBall{SpaceId::cantor, IdealPoint(Word(std::size_t(n), '0')),
                                      pow2(-n - 1)};
                   }};
  ApproxPoint x = construct_failing_point(wt, levels, opts.budget);
  VerifyResult res = verify_failure(x, test, levels, opts.budget);
  Json j{{"test", test.ml.id},
         {"point_prefix", point_to_string(x.oracle(std::max(opts.precision, levels)))},
         {"verification", verify_result_to_json(res)}};
  write_json(opts, "constructed_point.json", j);
  return 0;
}

int run_isomorphism(const GlobalOpts& opts, const std::string& measure_name, long count) {
  ComputableMeasure mu = measure_by_name(measure_name);
  CdfIsomorphism iso = make_cdf_isomorphism(mu, opts.budget);
  std::vector<std::array<Rational, 3>> rows;
  for (long i = 0; i < count; ++i) {
    // Non-dyadic sample grid: (3i+1)/(3 count).
    Rational x(3 * i + 1, 3 * count);
    Rational fx = cdf_forward(iso, const_real(x), opts.precision);
    Rational back = cdf_inverse(iso, cdf_forward_real(iso, const_real(x)), opts.precision);
    rows.push_back({x, fx, back});
  }
  write_file(opts, "isomorphism.csv", isomorphism_csv(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpslab: exact-arithmetic experiments on computable probability spaces"};
  app.require_subcommand(1);

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "JSON experiment config");
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--precision", opts.precision, "target precision (2^-n)");
  app.add_option("--budget", opts.budget, "stage budget for semi-decisions");
  auto* seed_opt = app.add_option("--seed", opts.seed, "pseudorandom seed");
  app.add_option("--jobs", opts.jobs, "parallel workers for parameter grids");

  auto* birkhoff = app.add_subcommand("birkhoff", "Birkhoff averages along a schedule");
  auto* correlation = app.add_subcommand("correlation", "correlation decay report");
  auto* deviation = app.add_subcommand("deviation", "deviation-set measures");
  auto* prokhorov = app.add_subcommand("prokhorov", "Prokhorov distance of finite measures");
  std::string mu_path, nu_path;
  bool approx = false;
  prokhorov->add_option("--mu", mu_path, "measure JSON")->required();
  prokhorov->add_option("--nu", nu_path, "measure JSON")->required();
  prokhorov->add_flag("--approx", approx, "bisection bracket instead of the exact method");

  auto* zero_point = app.add_subcommand("zero-point", "zero-measure point search");
  std::string measure_name = "lebesgue", a_str = "0/1", b_str = "1/1";
  long depth = 20;
  zero_point->add_option("--measure", measure_name, "built-in measure name");
  zero_point->add_option("--a", a_str, "interval left end (p/q)");
  zero_point->add_option("--b", b_str, "interval right end (p/q)");
  zero_point->add_option("--depth", depth, "nesting depth");

  auto* convert = app.add_subcommand("convert-test", "strong BC to Schnorr conversion");
  std::string test_name = "halving-intervals";
  long levels = 4, c_value = -1;
  convert->add_option("--test", test_name, "built-in strong BC test");
  convert->add_option("--levels", levels, "levels to serialize");
  convert->add_option("--c", c_value, "intersection constant (2^c > sum)");

  auto* verify = app.add_subcommand("verify", "failure certificates for a point");
  std::string point_spec, verify_test = "zero-cylinders";
  long verify_levels = 8;
  verify->add_option("--point", point_spec, "binary string, file, or p/q")->required();
  verify->add_option("--test", verify_test, "built-in test name");
  verify->add_option("--levels", verify_levels, "levels to certify");

  auto* construct = app.add_subcommand("construct", "build a point failing a test");
  std::string construct_test = "zero-cylinders";
  long construct_levels = 12;
  construct->add_option("--test", construct_test, "witnessed test name");
  construct->add_option("--levels", construct_levels, "levels to validate");

  auto* isomorphism = app.add_subcommand("isomorphism", "CDF transform round trips");
  std::string iso_measure = "piecewise-halves";
  long iso_count = 8;
  isomorphism->add_option("--measure", iso_measure, "built-in measure name");
  isomorphism->add_option("--count", iso_count, "sample count");

  // Global flags may appear after the subcommand name.
  for (CLI::App* sub : {birkhoff, correlation, deviation, prokhorov, zero_point, convert,
                        verify, construct, isomorphism})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opts.seed_set = seed_opt->count() > 0;

  try {
    if (*birkhoff) return run_birkhoff(opts);
    if (*correlation) return run_correlation(opts);
    if (*deviation) return run_deviation(opts);
    if (*prokhorov) return run_prokhorov(opts, mu_path, nu_path, approx);
    if (*zero_point)
      return run_zero_point(opts, measure_name, rat_from_string(a_str),
                            rat_from_string(b_str), depth);
    if (*convert) return run_convert_test(opts, test_name, levels, c_value);
    if (*verify) return run_verify(opts, point_spec, verify_test, verify_levels);
    if (*construct) return run_construct(opts, construct_test, construct_levels);
    if (*isomorphism) return run_isomorphism(opts, iso_measure, iso_count);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_budget() ? 3 : 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
