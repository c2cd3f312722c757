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

#ifndef CPS_APPROX_REAL_HPP
#define CPS_APPROX_REAL_HPP

#include <functional>
#include <optional>
#include <vector>

#include "cps/rational.hpp"

namespace cps {

// A real presented by a precision oracle: eval(n) is within 2^-n of the
// abstract value, deterministically. Values are immutable and the oracles
// pure, so ApproxReal is freely shareable across threads.
//
// magnitude_bound, when present, is a rational B with |x| <= B. Products
// need it to split their error budget (see combine).
struct ApproxReal {
  std::function<Rational(long)> oracle;
  std::optional<Rational> magnitude_bound;
};

enum class SemiDirection { lower, upper };

// Monotone stage stream converging to an abstract real from one side.
struct SemiReal {
  SemiDirection direction;
  std::function<Rational(long)> stream;
};

enum class Separation { less, greater, unseparated };

enum class CombineOp { add, sub, mul, negate, max, min, abs };

Rational eval(const ApproxReal& x, long n);

// Pointwise combination with the error budget split evenly: each operand is
// evaluated at n + ceil(log2 m) + 1 (plus magnitude headroom for mul).
// sub folds as x0 - x1 - ... - x_{m-1}; negate and abs are unary.
ApproxReal combine(CombineOp op, const std::vector<ApproxReal>& xs);

// Runs both streams until hi(t) - lo(t) <= 2^-n and returns the midpoint.
// max_stage bounds the search per eval; exceeding it means the two semis do
// not meet or converge too slowly.
ApproxReal semis_to_computable(const SemiReal& lo, const SemiReal& hi, long max_stage);

// Certified strict comparison at precision n: decisive only when the
// evaluation gap exceeds 2 * 2^-n. Equality is never certified.
Separation separate(const ApproxReal& x, const ApproxReal& y, long n);

ApproxReal const_real(const Rational& q);

// sqrt(k) for a non-negative rational, via integer square roots of scaled
// numerators; carries a magnitude bound.
ApproxReal sqrt_real(const Rational& k);

// (sqrt(5) - 1) / 2, the rotation angle used by the non-mixing example.
ApproxReal golden_conjugate();

}  // namespace cps

#endif  // CPS_APPROX_REAL_HPP
