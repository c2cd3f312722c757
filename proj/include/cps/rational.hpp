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

#ifndef CPS_RATIONAL_HPP
#define CPS_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

#include "cps/errors.hpp"

namespace cps {

// Exact arbitrary-precision arithmetic. The rational backend keeps values
// in lowest terms with a positive denominator, which is exactly the
// representation contract we need; no operation ever rounds. Expression
// templates are off: oracles return values out of lambdas all the time and
// deferred expressions would dangle.
using Int = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                          boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<
    boost::multiprecision::backends::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

inline Int num(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Int den(const Rational& q) { return boost::multiprecision::denominator(q); }

// 2^n for n of either sign.
inline Rational pow2(long n) {
  if (n >= 0) return Rational(Int(1) << n);
  return Rational(1, Int(1) << (-n));
}

inline Rational rat_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Int floor_rat(const Rational& q) {
  Int n = num(q), d = den(q);
  Int t = n / d;
  if (n < 0 && n % d != 0) --t;
  return t;
}

inline Int ceil_rat(const Rational& q) { return -floor_rat(-q); }

// Fractional part in [0, 1).
inline Rational frac_rat(const Rational& q) { return q - Rational(floor_rat(q)); }

// Nearest multiples of 2^-bits. round_down <= q <= round_up, each within
// 2^-bits of q; the pair gives an outward dyadic enclosure.
inline Rational dyadic_round_down(const Rational& q, long bits) {
  Int scaled = floor_rat(q * pow2(bits));
  return Rational(scaled) * pow2(-bits);
}

inline Rational dyadic_round_up(const Rational& q, long bits) {
  Int scaled = ceil_rat(q * pow2(bits));
  return Rational(scaled) * pow2(-bits);
}

inline unsigned bit_length(Int v) {
  if (v < 0) v = -v;
  return v == 0 ? 0 : boost::multiprecision::msb(v) + 1;
}

// Floor of the k-th root of a non-negative integer (Newton iteration).
inline Int iroot_floor(const Int& a, unsigned k) {
  if (a < 0) fail(Errc::bad_parameter, "iroot of negative value");
  if (k == 0) fail(Errc::bad_parameter, "0th root");
  if (a == 0 || a == 1 || k == 1) return a;
  unsigned bits = bit_length(a);
  Int x = Int(1) << (bits / k + 1);
  while (true) {
    // next = ((k-1)x + a / x^(k-1)) / k
    Int xk1 = 1;
    for (unsigned i = 0; i + 1 < k; ++i) xk1 *= x;
    Int next = (Int(k - 1) * x + a / xk1) / k;
    if (next >= x) break;
    x = next;
  }
  // Newton overshoots by at most a few ulps near powers; settle exactly.
  auto pow_le = [&](const Int& v) {
    Int p = 1;
    for (unsigned i = 0; i < k; ++i) {
      p *= v;
      if (p > a) return false;
    }
    return p <= a;
  };
  while (!pow_le(x)) --x;
  while (pow_le(x + 1)) ++x;
  return x;
}

inline Int isqrt_floor(const Int& a) { return boost::multiprecision::sqrt(a); }

// Rational enclosure of base^(p/q) for base > 0 and integer p, q > 0, with
// 2^-prec_bits relative granularity. Used wherever an irrational quantity
// like n^alpha enters a certified bound.
Rational pow_rat_lower(const Rational& base, const Int& p, unsigned q, long prec_bits);
Rational pow_rat_upper(const Rational& base, const Int& p, unsigned q, long prec_bits);

inline Rational pow_int(const Rational& base, long e) {
  Rational r = 1;
  Rational b = e >= 0 ? base : Rational(1) / base;
  long n = e >= 0 ? e : -e;
  for (long i = 0; i < n; ++i) r *= b;
  return r;
}

// "p/q" serialization; integers render as "p/1" so the format is uniform.
inline std::string rat_to_string(const Rational& q) {
  return num(q).str() + "/" + den(q).str();
}

Rational rat_from_string(const std::string& s);

}  // namespace cps

#endif  // CPS_RATIONAL_HPP
