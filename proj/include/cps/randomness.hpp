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

#ifndef CPS_RANDOMNESS_HPP
#define CPS_RANDOMNESS_HPP

#include "cps/dynamics.hpp"
#include "cps/measures.hpp"

namespace cps {

using Region = std::variant<IntervalSet, CylinderSet>;

// Leveled families of effective open sets. Levels are 1-indexed. Built-in
// tests also carry exact level regions and measures, which the conversion
// machinery exploits; the effective-open side remains the contract.
struct MLTest {
  std::string id;
  ComputableMeasure mu;
  std::function<EffectiveOpen(long)> levels;
  std::function<std::optional<Region>(long)> exact_region;      // may be null
  std::function<std::optional<Rational>(long)> exact_measure;   // may be null
};

struct SchnorrTest {
  MLTest ml;
  // Uniformly computable level measures.
  std::function<ApproxReal(long)> measure_oracle;
};

// Borel-Cantelli style tests: levels with summable measures. The strong
// variant knows the sum as a computable real.
struct StrongBCTest {
  std::string id;
  ComputableMeasure mu;
  std::function<EffectiveOpen(long)> levels;
  ApproxReal sum_oracle;
  Rational sum_upper;
  std::function<std::optional<Region>(long)> exact_region;
  std::function<std::optional<Rational>(long)> exact_measure;
  bool nested_levels = false;  // C_1 contains C_2 contains ...
};

struct FailureCertificate {
  std::string test_id;
  long level;
  long stage;
  IdealBall ball;
};

struct VerifyResult {
  std::vector<FailureCertificate> certificates;
  std::vector<long> uncertified;  // levels with no certificate within budget
  bool complete() const { return uncertified.empty(); }
};

// Attempts to certify x in every level up to `upto_level`, each within
// `stage_budget` stages. Absence of a certificate proves nothing (the
// semi-decision side of membership).
VerifyResult verify_failure(const ApproxPoint& x, const MLTest& test, long upto_level,
                            long stage_budget);
VerifyResult verify_failure(const ApproxPoint& x, const SchnorrTest& test, long upto_level,
                            long stage_budget);

bool replay_certificate(const ApproxPoint& x, const MLTest& test,
                        const FailureCertificate& cert);

// Certified number of levels among C_1..C_upto that contain x at the given
// stage; non-decreasing in the stage.
long count_hits(const ApproxPoint& x, const StrongBCTest& test, long upto_level, long stage);

// The hit-count conversion: level k of the output collects canonical
// witness balls certified inside at least 2^(k+c) of the input levels,
// where 2^c exceeds the sum of the level measures. Exact measures transfer
// when the input levels are nested (A_k is then exactly C_{2^(k+c)}).
// Supplying c with 2^c <= sum_upper raises bad_constant.
SchnorrTest strong_bc_to_schnorr(const StrongBCTest& test, std::optional<long> c = std::nullopt);

// Same construction from the sum's upper bound alone (the plain BC-to-ML
// direction); no measure oracle on the output.
MLTest bc_to_ml(const StrongBCTest& test, std::optional<long> c = std::nullopt);

// Deviation sets A_{n_i}(delta) of a cylinder-form observable along a
// subsequence schedule, as a strong BC-test: exact level regions while the
// enumeration horizon allows, exact level measures by closed form or
// transfer DP, and the Chebyshev tail certifying the computable sum.
StrongBCTest deviation_schnorr_test(const DynSystem& sys, const ObservableFn& f,
                                    const Rational& delta, const SubsequenceSchedule& schedule);

// Exact mu(A_n(delta)) for cylinder events: prefix enumeration for small n,
// an integer transfer DP otherwise (n capped at 4096).
Rational deviation_level_measure(const DynSystem& sys, const ObservableFn& f,
                                 const Rational& delta, long n);

// Exact distribution of the occurrence count of the event among the first
// n shifts under Bernoulli(p), by the window-automaton transfer DP.
std::vector<Rational> occurrence_distribution(const CylinderSet& event, long n,
                                              const Rational& p);

// A Schnorr test together with a nested chain of witness balls
// B_n inside A_n with radius(B_n) <= 2^-n; the constructive stand-in for
// producing points that fail the test.
struct WitnessedTest {
  SchnorrTest test;
  std::function<IdealBall(long)> witness;
};

// The limit of the witness centers; certified (broken_witness_chain
// otherwise) to lie in B_n subset A_n at every level the caller checks.
ApproxPoint construct_failing_point(const WitnessedTest& wt, long check_levels = 20,
                                    long stage_budget = 64);

// Concatenated constant blocks (block i of length base^i, all-0 for odd i,
// all-1 for even i): Birkhoff averages of 1_[1] oscillate between block
// boundaries forever.
ApproxPoint oscillating_point(int base);

// --- built-in tests ---------------------------------------------------------

// C_n = (0, 2^-n) on ([0,1], lebesgue); sum of measures exactly 1.
StrongBCTest halving_intervals_test();
// C_n = [1^n] on (Cantor, bernoulli(1/2)); sum exactly 1.
StrongBCTest ones_cylinders_test();
StrongBCTest empty_strong_bc_test(SpaceId space);
// Schnorr test A_n = [0^n] on (Cantor, bernoulli(1/2)).
SchnorrTest zero_cylinder_schnorr_test();
// Schnorr test A_n = (0, 2^-n) on ([0,1], lebesgue).
SchnorrTest halving_schnorr_test();

}  // namespace cps

#endif  // CPS_RANDOMNESS_HPP
