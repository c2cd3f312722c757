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

#include "cps/rational.hpp"

namespace cps {

namespace {

Int pow_int_exact(const Int& b, const Int& e) {
  Int r = 1, base = b, n = e;
  while (n > 0) {
    if ((n & 1) != 0) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}

}  // namespace

Rational pow_rat_lower(const Rational& base, const Int& p, unsigned q, long prec_bits) {
  if (base <= 0) fail(Errc::bad_parameter, "pow_rat on non-positive base");
  if (q == 0) fail(Errc::bad_parameter, "pow_rat with zero root index");
  if (p < 0) return Rational(1) / pow_rat_upper(base, -p, q, prec_bits);
  // base^(p/q) = (N^p / D^p)^(1/q); lower bound via floor((N^p * M^q) / D^p)
  // with M = 2^prec_bits, then divide the floor q-th root by M.
  Int N = pow_int_exact(num(base), p);
  Int D = pow_int_exact(den(base), p);
  Int M = Int(1) << prec_bits;
  Int scaled = (N * pow_int_exact(M, q)) / D;  // floor
  Int r = iroot_floor(scaled, q);
  return Rational(r, M);
}

Rational pow_rat_upper(const Rational& base, const Int& p, unsigned q, long prec_bits) {
  if (base <= 0) fail(Errc::bad_parameter, "pow_rat on non-positive base");
  if (q == 0) fail(Errc::bad_parameter, "pow_rat with zero root index");
  if (p < 0) return Rational(1) / pow_rat_lower(base, -p, q, prec_bits);
  Int N = pow_int_exact(num(base), p);
  Int D = pow_int_exact(den(base), p);
  Int M = Int(1) << prec_bits;
  Int scaled = (N * pow_int_exact(M, q) + D - 1) / D;  // ceil
  Int r = iroot_floor(scaled, q);
  // r^q <= scaled; (r+1) is a safe upper root unless r is exact.
  Int rq = pow_int_exact(r, q);
  if (rq * D < N * pow_int_exact(M, q)) ++r;
  return Rational(r, M);
}

Rational rat_from_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(Int(s));
    Int n(s.substr(0, slash));
    Int d(s.substr(slash + 1));
    if (d <= 0) fail(Errc::bad_parameter, "denominator must be positive: " + s);
    return Rational(n, d);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Errc::bad_parameter, "malformed rational: " + s);
  }
}

}  // namespace cps
