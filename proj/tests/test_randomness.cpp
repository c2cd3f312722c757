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

#include <doctest.h>

#include "cps/isomorphism.hpp"
#include "cps/randomness.hpp"
#include "oracles.hpp"

using namespace cps;

TEST_SUITE_BEGIN("randomness");

TEST_CASE("verify_failure on the zero-cylinder test") {
  SchnorrTest t = zero_cylinder_schnorr_test();
  ApproxPoint zeros = point_from_word("");
  VerifyResult res = verify_failure(zeros, t, 8, 32);
  CHECK(res.complete());
  CHECK(res.certificates.size() == 8);
  for (const auto& cert : res.certificates) CHECK(replay_certificate(zeros, t.ml, cert));

  // 0100... leaves [00] at level 2.
  ApproxPoint x = point_from_word("01");
  VerifyResult partial = verify_failure(x, t, 3, 32);
  CHECK(!partial.complete());
  CHECK(partial.certificates.size() == 1);  // level 1 only
  CHECK(std::find(partial.uncertified.begin(), partial.uncertified.end(), 2) !=
        partial.uncertified.end());

  // The all-ones tail 0111... is the boundary point of the level-1 ball;
  // it is never certified (open balls exclude their sphere).
  ApproxPoint boundary = point_from_bits([](std::uint64_t i) { return i == 1 ? 0 : 1; });
  CHECK(verify_failure(boundary, t, 1, 32).certificates.empty());
}

TEST_CASE("verify_failure on the halving interval test") {
  SchnorrTest t = halving_schnorr_test();
  // x = 2^-(n+2) is certified at level n.
  for (long n : {1L, 3L, 6L}) {
    ApproxPoint x = point_from_rational(pow2(-(n + 2)));
    VerifyResult res = verify_failure(x, t, n, 64);
    bool found = false;
    for (const auto& cert : res.certificates)
      if (cert.level == n) found = true;
    CHECK(found);
  }
  // The boundary point 0 is never certified (it sits on the open edge).
  VerifyResult res = verify_failure(point_from_rational(0), t, 3, 64);
  CHECK(res.certificates.empty());
}

TEST_CASE("certified hit counts are monotone in the stage") {
  StrongBCTest t = halving_intervals_test();
  ApproxPoint x = point_from_rational(Rational(1, 1000));
  long prev = 0;
  for (long stage = 1; stage <= 24; ++stage) {
    long hits = count_hits(x, t, 12, stage);
    CHECK(hits >= prev);
    prev = hits;
  }
  // 1/1000 lies in (0, 2^-n) exactly for n <= 9.
  CHECK(count_hits(x, t, 12, 40) == 9);
}

TEST_CASE("strong_bc_to_schnorr on the halving intervals") {
  StrongBCTest t = halving_intervals_test();
  SchnorrTest s = strong_bc_to_schnorr(t, 1);
  // A_k = (0, 2^-2^(k+1)) exactly.
  for (long k = 1; k <= 4; ++k) {
    Rational expected = pow2(-(1 << (k + 1)));
    auto measure = s.ml.exact_measure(k);
    REQUIRE(measure.has_value());
    CHECK(*measure == expected);
    CHECK(*measure < pow2(-k));
    CHECK(eval(s.measure_oracle(k), 40) == expected);
    // The region transfer: an interval of that exact length.
    auto region = s.ml.exact_region(k);
    REQUIRE(region.has_value());
    CHECK(std::get<IntervalSet>(*region).length() == expected);
  }
  // k = 1 spot value from the conversion: 1/16 < 1/2.
  CHECK(*s.ml.exact_measure(1) == Rational(1, 16));

  // The effective-open side certifies points of A_k = (0, 2^-8) for k = 2.
  ApproxPoint x = point_from_rational(pow2(-10));
  EffectiveOpen level2 = s.ml.levels(2);
  bool certified = false;
  for (long stage = 8; stage <= 40 && !certified; stage += 4)
    certified = open_membership(x, level2, stage) == SemiDecision::yes;
  CHECK(certified);

  CHECK_THROWS_AS(strong_bc_to_schnorr(t, 0), Error);  // 2^0 <= sum = 1
}

TEST_CASE("strong_bc_to_schnorr on the ones cylinders and the empty test") {
  SchnorrTest s = strong_bc_to_schnorr(ones_cylinders_test(), 1);
  for (long k = 1; k <= 4; ++k) {
    Rational expected = pow2(-(1 << (k + 1)));
    CHECK(*s.ml.exact_measure(k) == expected);
    CHECK(*s.ml.exact_measure(k) < pow2(-k));
  }
  SchnorrTest e = strong_bc_to_schnorr(empty_strong_bc_test(SpaceId::cantor));
  CHECK(*e.ml.exact_measure(3) == 0);
  CHECK(e.ml.levels(3).enumerate(10).empty());
}

TEST_CASE("the converted measure bound holds for k up to 6 on all built-ins") {
  for (const auto& t : {halving_intervals_test(), ones_cylinders_test(),
                        empty_strong_bc_test(SpaceId::unit_interval)}) {
    SchnorrTest s = strong_bc_to_schnorr(t);
    for (long k = 1; k <= 6; ++k) {
      Rational certified = eval(s.measure_oracle(k), 30);
      CHECK(certified - pow2(-30) < pow2(-k));
      // Consistency with derive_bounds on the exact region.
      auto m = s.ml.exact_measure(k);
      if (m) CHECK(rat_abs(certified - *m) <= pow2(-30));
    }
  }
}

TEST_CASE("bc_to_ml keeps the level structure without a measure oracle") {
  MLTest ml = bc_to_ml(halving_intervals_test(), 1);
  ApproxPoint x = point_from_rational(pow2(-10));
  bool certified = false;
  for (long stage = 8; stage <= 40 && !certified; stage += 4)
    certified = open_membership(x, ml.levels(2), stage) == SemiDecision::yes;
  CHECK(certified);
}

TEST_CASE("epsilon-scheme conversion on a non-nested test") {
  // Two-interval levels that are not nested: C_n = (0, 2^-n) u (1/2, 1/2 + 2^-n-1).
  StrongBCTest t{"two-arms",
                 lebesgue(),
                 nullptr,
                 ApproxReal{},
                 0,
                 nullptr,
                 nullptr,
                 false};
  t.levels = [](long n) {
    std::vector<IdealBall> balls;
    balls.push_back({SpaceId::unit_interval, IdealPoint(pow2(-n - 1)), pow2(-n - 1)});
    balls.push_back({SpaceId::unit_interval,
                     IdealPoint(Rational(1, 2) + pow2(-n - 2)), pow2(-n - 2)});
    return effective_open_from_balls(SpaceId::unit_interval, balls);
  };
  t.exact_region = [](long n) -> std::optional<Region> {
    return Region(IntervalSet::open(0, pow2(-n))
                      .unite(IntervalSet::open(Rational(1, 2), Rational(1, 2) + pow2(-n - 1))));
  };
  t.exact_measure = [](long n) -> std::optional<Rational> {
    return pow2(-n) + pow2(-n - 1);
  };
  t.sum_oracle = const_real(Rational(3, 2));
  t.sum_upper = Rational(3, 2);
  SchnorrTest s = strong_bc_to_schnorr(t);  // c = 1
  for (long k = 1; k <= 4; ++k) {
    Rational certified = eval(s.measure_oracle(k), 20);
    // A_k = C_{2^(k+1)} by nesting of each arm: both arms shrink, so the
    // hit-count region is the union at the threshold index.
    Rational expected = pow2(-(1 << (k + 1))) + pow2(-(1 << (k + 1)) - 1);
    CHECK(rat_abs(certified - expected) <= pow2(-19));
    CHECK(certified < pow2(-k));
  }
}

TEST_CASE("deviation test along the schedule is a strong BC test") {
  DynSystem s = shift_system();
  SubsequenceSchedule sched = make_schedule(Rational(1, 2));
  ObservableFn f = obs_cylinder("1");
  StrongBCTest t = deviation_schnorr_test(s, f, Rational(2, 5), sched);

  // Level 1 is n = 1: every point deviates (measure 1); level 2 is n = 8.
  CHECK(*t.exact_measure(1) == 1);
  CHECK(*t.exact_measure(2) == oracles::binomial_deviation_mass(8, Rational(2, 5)));
  // Partial sums of certified lower bounds stay below sum_upper.
  Rational partial = 0;
  for (long i = 1; i <= 6; ++i) partial += *t.exact_measure(i);
  CHECK(partial <= t.sum_upper);
  // The sum oracle is consistent with its upper bound.
  Rational sum4 = eval(t.sum_oracle, 4);
  CHECK(sum4 - pow2(-4) <= t.sum_upper);
  // Exact regions exist at small levels and their masses match.
  auto region = t.exact_region(2);
  REQUIRE(region.has_value());
  CHECK(std::get<CylinderSet>(*region).mass(Rational(1, 2)) == *t.exact_measure(2));
}

TEST_CASE("deviation level measures: DP agrees with enumeration") {
  DynSystem s = shift_system();
  // delta = 3/7 misses every achievable average at these n; the DP
  // distribution must reproduce the enumeration masses exactly.
  for (const Word& w : {Word("1"), Word("01")}) {
    ObservableFn f = obs_cylinder(w);
    for (long n : {3L, 7L, 12L}) {
      Rational via_enum = deviation_measure(s, f, Rational(3, 7), n, DeviationMode::exact);
      auto dist = occurrence_distribution(f.cylinders, n, Rational(1, 2));
      Rational mean = f.cylinders.mass(Rational(1, 2));
      Rational via_dp = 0;
      for (std::size_t sv = 0; sv < dist.size(); ++sv)
        if (rat_abs(Rational(Int(sv)) / n - mean) > Rational(3, 7)) via_dp += dist[sv];
      CHECK(via_dp == via_enum);
    }
  }
  // Distributions sum to one (biased case too).
  for (const Rational& p : {Rational(1, 2), Rational(2, 7)}) {
    auto dist = occurrence_distribution(CylinderSet::cylinder("01"), 9, p);
    Rational total = 0;
    for (const auto& m : dist) total += m;
    CHECK(total == 1);
  }
  // A genuinely large level through the DP (n = 27 = 3^3).
  ObservableFn f = obs_cylinder("1");
  Rational dp27 = deviation_level_measure(s, f, Rational(2, 5), 27);
  CHECK(dp27 == oracles::binomial_deviation_mass(27, Rational(2, 5)));
  Rational dp216 = deviation_level_measure(s, f, Rational(2, 5), 216);
  CHECK(dp216 == oracles::binomial_deviation_mass(216, Rational(2, 5)));
}

TEST_CASE("deviation test with delta beyond the range is empty") {
  DynSystem s = shift_system();
  SubsequenceSchedule sched = make_schedule(Rational(1, 2));
  StrongBCTest t = deviation_schnorr_test(s, obs_cylinder("1"), 3, sched);
  for (long i = 1; i <= 4; ++i) CHECK(*t.exact_measure(i) == 0);
  CHECK(t.sum_upper < 1);
}

TEST_CASE("deviation test on the doubling map through the conjugacy") {
  DynSystem d = doubling_system();
  SubsequenceSchedule sched = make_schedule(Rational(1, 2));
  ObservableFn f = obs_dyadic(Rational(1, 2), 1);
  StrongBCTest t = deviation_schnorr_test(d, f, Rational(2, 5), sched);
  CHECK(*t.exact_measure(2) == oracles::binomial_deviation_mass(8, Rational(2, 5)));
}

TEST_CASE("construct_failing_point from a valid witness chain") {
  SchnorrTest t = zero_cylinder_schnorr_test();
  WitnessedTest wt{t, [](long n) {
                     return IdealBall{SpaceId::cantor, IdealPoint(Word(std::size_t(n), '0')),
                                      pow2(-n - 1)};
                   }};
  ApproxPoint x = construct_failing_point(wt, 20, 64);
  VerifyResult res = verify_failure(x, t, 20, 64);
  CHECK(res.complete());
  for (const auto& cert : res.certificates) CHECK(replay_certificate(x, t.ml, cert));
}

TEST_CASE("construct_failing_point on alternating cylinders") {
  // A_n = [(01)^n]; witnesses around the alternating point.
  SchnorrTest t{MLTest{"alternating", bernoulli(Rational(1, 2)),
                       [](long n) {
                         Word w;
                         for (long i = 0; i < n; ++i) w += "01";
                         return effective_open_from_balls(
                             SpaceId::cantor, {{SpaceId::cantor, IdealPoint(w), pow2(-2 * n)}});
                       },
                       nullptr, nullptr},
                [](long n) { return const_real(pow2(-2 * n)); }};
  WitnessedTest wt{t, [](long n) {
                     Word w;
                     for (long i = 0; i <= n; ++i) w += "01";
                     return IdealBall{SpaceId::cantor, IdealPoint(w), pow2(-2 * n - 2)};
                   }};
  ApproxPoint x = construct_failing_point(wt, 10, 64);
  // The limit is 010101...; its prefix oracle says so.
  Word prefix = std::get<Word>(x.oracle(6));
  CHECK(prefix.substr(0, 6) == "010101");
  VerifyResult res = verify_failure(x, t, 10, 64);
  CHECK(res.complete());
}

TEST_CASE("broken witness chains are rejected") {
  SchnorrTest t = zero_cylinder_schnorr_test();
  // Radius violates the 2^-n schedule.
  WitnessedTest bad_radius{t, [](long n) {
                             return IdealBall{SpaceId::cantor,
                                              IdealPoint(Word(std::size_t(n), '0')), pow2(-n + 1)};
                           }};
  CHECK_THROWS_AS(construct_failing_point(bad_radius, 5, 16), Error);
  // B_2 not inside B_1 (jumps to the ones cylinder).
  WitnessedTest bad_nesting{t, [](long n) {
                              Word w = n == 1 ? Word("0") : Word(std::size_t(n), '1');
                              return IdealBall{SpaceId::cantor, IdealPoint(w), pow2(-n - 1)};
                            }};
  try {
    construct_failing_point(bad_nesting, 5, 16);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::broken_witness_chain);
  }
}

TEST_CASE("oscillating point block averages match the block oracle") {
  ApproxPoint x = oscillating_point(10);
  auto [len4, ones4] = oracles::oscillating_block_end(10, 4);
  auto [len5, ones5] = oracles::oscillating_block_end(10, 5);
  Int c4 = 0, c5 = 0;
  for (std::uint64_t i = 1; i <= len5.convert_to<std::uint64_t>(); ++i) {
    if ((*x.bits)(i)) {
      if (Int(i) <= len4) ++c4;
      ++c5;
    }
  }
  CHECK(c4 == ones4);
  CHECK(c5 == ones5);
  CHECK(Rational(ones4) / Rational(len4) >= Rational(9, 10));
  CHECK(Rational(ones5) / Rational(len5) <= Rational(13, 100));

  // Base 2: the gap between block-end averages stays positive.
  auto [l4, o4] = oracles::oscillating_block_end(2, 4);
  auto [l5, o5] = oracles::oscillating_block_end(2, 5);
  CHECK(Rational(o4) / Rational(l4) - Rational(o5) / Rational(l5) > 0);
}

TEST_CASE("a decoded pseudorandom point passes the halving test empirically") {
  // Morphisms preserve randomness (tested empirically): the image of a
  // pseudorandom sequence under binary_decode escapes the halving levels.
  ApproxPoint bits = pseudorandom_point(7, 4096);
  ApproxPoint x = point_from_real(binary_decode(bits));
  SchnorrTest t = halving_schnorr_test();
  VerifyResult res = verify_failure(x, t, 10, 24);
  CHECK(res.certificates.size() <= 2);  // no certificates at deep levels
}

TEST_SUITE_END();
