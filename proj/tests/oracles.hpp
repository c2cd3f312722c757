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
// Independent oracles used by the test suites. Everything here recomputes
// expected values through routes that do not share code with the library
// paths under test.

#ifndef CPS_TESTS_ORACLES_HPP
#define CPS_TESTS_ORACLES_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "cps/measures.hpp"
#include "cps/rational.hpp"
#include "cps/region.hpp"

namespace cps::oracles {

// Interval bisection enclosure of sqrt(k), halving until the width drops
// below 10^-digits.
std::pair<Rational, Rational> bisect_sqrt(const Rational& k, int digits);

// Base-2 digits of p/q in [0,1) by long division.
Word long_division_bits(const Rational& x, int k);

// lambda_p(sigma^-n [w1] cap [w2]) by merging the two position constraints
// (conflict -> 0; otherwise the product of per-position weights).
Rational shift_intersection_mass(const Word& w1, long n, const Word& w2, const Rational& p);

// C_n([w1],[w2]) from the merged-constraint masses.
Rational shift_correlation(const Word& w1, const Word& w2, long n, const Rational& p);

Int binomial(unsigned n, unsigned k);

// lambda{ x : |S_n(x)/n - 1/2| > delta } for the shift with f = 1_[1],
// via the binomial distribution of S_n.
Rational binomial_deviation_mass(unsigned n, const Rational& delta);

// Exact Prokhorov distance by scanning every candidate epsilon (pairwise
// distances and all weight-difference values) and checking the defining
// condition subset-by-subset with closed enlargements.
Rational prokhorov_candidate_scan(const FiniteMeasure& mu, const FiniteMeasure& nu);

// MPFR round-to-nearest orbit of x -> x + x^2 mod 1 at the given precision;
// values read back exactly as rationals.
std::vector<Rational> mp_reference_orbit(const Rational& x0, int steps, int bits);

// Block-boundary arithmetic for the oscillating point: total length and
// number of ones at the end of block B (blocks 1,2,... of length base^i,
// odd blocks all-0, even blocks all-1).
std::pair<Int, Int> oscillating_block_end(int base, int block);

// Lower bound of sum_{i=I}^{I+terms-1} i^(-num/den) in 2^-48 fixed point.
Rational tail_partial_sum_lower(std::uint64_t I, unsigned num, unsigned den,
                                std::uint64_t terms);

// Closed-form CDF / quantile of the density (3/2 on [0,1/2], 1/2 on (1/2,1]).
Rational piecewise_halves_cdf(const Rational& x);
Rational piecewise_halves_quantile(const Rational& y);

// Closed-form masses for the zero-measure-trace replay.
Rational lebesgue_mass(const Rational& a, const Rational& b);
Rational half_atom_half_lebesgue_mass(const Rational& a, const Rational& b);

// Replays a nested-thirds trace against a closed-form mass function:
// checks nesting, exact third lengths, the bound schedule, and that every
// recorded bound really dominates the closed-form mass.
bool replay_zero_trace(const ZeroMeasureTrace& trace,
                       Rational (*closed_mass)(const Rational&, const Rational&));

}  // namespace cps::oracles

#endif  // CPS_TESTS_ORACLES_HPP
