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

#include "cps/approx_real.hpp"

#include <algorithm>

namespace cps {

Rational eval(const ApproxReal& x, long n) {
  if (n < 0) fail(Errc::bad_parameter, "negative precision");
  return x.oracle(n);
}

namespace {

long log2_ceil(std::size_t m) {
  long b = 0;
  while ((std::size_t(1) << b) < m) ++b;
  return b;
}

}  // namespace

ApproxReal combine(CombineOp op, const std::vector<ApproxReal>& xs) {
  if (xs.empty()) fail(Errc::bad_parameter, "combine on empty operand list");
  const long shift = log2_ceil(xs.size()) + 1;

  switch (op) {
    case CombineOp::negate:
    case CombineOp::abs: {
      ApproxReal x = xs.front();
      bool neg = op == CombineOp::negate;
      return {[x, neg](long n) {
                Rational q = eval(x, n);
                return neg ? Rational(-q) : rat_abs(q);
              },
              x.magnitude_bound};
    }
    case CombineOp::add:
    case CombineOp::sub: {
      bool sub = op == CombineOp::sub;
      std::optional<Rational> bound;
      if (std::all_of(xs.begin(), xs.end(),
                      [](const ApproxReal& x) { return x.magnitude_bound.has_value(); })) {
        Rational b = 0;
        for (const auto& x : xs) b += *x.magnitude_bound;
        bound = b;
      }
      return {[xs, shift, sub](long n) {
                Rational acc = eval(xs[0], n + shift);
                for (std::size_t i = 1; i < xs.size(); ++i) {
                  Rational q = eval(xs[i], n + shift);
                  acc = sub ? Rational(acc - q) : Rational(acc + q);
                }
                return acc;
              },
              bound};
    }
    case CombineOp::max:
    case CombineOp::min: {
      bool want_max = op == CombineOp::max;
      std::optional<Rational> bound;
      if (std::all_of(xs.begin(), xs.end(),
                      [](const ApproxReal& x) { return x.magnitude_bound.has_value(); })) {
        Rational b = 0;
        for (const auto& x : xs) b = std::max(b, *x.magnitude_bound);
        bound = b;
      }
      return {[xs, want_max](long n) {
                Rational acc = eval(xs[0], n + 1);
                for (std::size_t i = 1; i < xs.size(); ++i) {
                  Rational q = eval(xs[i], n + 1);
                  acc = want_max ? std::max(acc, q) : std::min(acc, q);
                }
                return acc;
              },
              bound};
    }
    case CombineOp::mul: {
      for (const auto& x : xs) {
        if (!x.magnitude_bound)
          fail(Errc::missing_bound, "mul requires magnitude bounds on every operand");
      }
      // |prod x_i - prod q_i| <= sum_i err_i * prod_{j != i}(B_j + 1); pad
      // every operand so each term stays under 2^-(n + shift).
      Rational pad_product = 1;
      for (const auto& x : xs) pad_product *= (*x.magnitude_bound + 1);
      long extra = bit_length(ceil_rat(pad_product));
      Rational bound = 1;
      for (const auto& x : xs) bound *= *x.magnitude_bound;
      return {[xs, shift, extra](long n) {
                Rational acc = 1;
                for (const auto& x : xs) acc *= eval(x, n + shift + extra);
                return acc;
              },
              bound};
    }
  }
  fail(Errc::bad_parameter, "unknown combine op");
}

ApproxReal semis_to_computable(const SemiReal& lo, const SemiReal& hi, long max_stage) {
  if (lo.direction != SemiDirection::lower || hi.direction != SemiDirection::upper)
    fail(Errc::bad_parameter, "semis_to_computable needs a (lower, upper) pair");
  auto lo_s = lo.stream;
  auto hi_s = hi.stream;
  return {[lo_s, hi_s, max_stage](long n) {
            Rational tol = pow2(-n);
            for (long t = 0; t <= max_stage; ++t) {
              Rational a = lo_s(t), b = hi_s(t);
              if (b - a <= tol) return (a + b) / 2;
            }
            fail(Errc::stage_budget_exceeded,
                 "semi streams did not close a 2^-" + std::to_string(n) +
                     " gap within " + std::to_string(max_stage) + " stages");
          },
          std::nullopt};
}

Separation separate(const ApproxReal& x, const ApproxReal& y, long n) {
  Rational qx = eval(x, n), qy = eval(y, n);
  Rational margin = 2 * pow2(-n);
  if (qy - qx > margin) return Separation::less;
  if (qx - qy > margin) return Separation::greater;
  return Separation::unseparated;
}

ApproxReal const_real(const Rational& q) {
  return {[q](long) { return q; }, rat_abs(q)};
}

ApproxReal sqrt_real(const Rational& k) {
  if (k < 0) fail(Errc::bad_parameter, "sqrt of a negative rational");
  Rational bound = std::max<Rational>(k, 1);
  return {[k](long n) {
            // floor(sqrt(k) * 2^m) / 2^m with one guard bit.
            long m = n + 1;
            Int scaled = (num(k) << (2 * m)) / den(k);
            return Rational(isqrt_floor(scaled), Int(1) << m);
          },
          bound};
}

ApproxReal golden_conjugate() {
  ApproxReal r5 = sqrt_real(5);
  return {[r5](long n) { return (eval(r5, n + 1) - 1) / 2; }, Rational(1)};
}

}  // namespace cps
