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

#include "cps/isomorphism.hpp"

#include <algorithm>

#include "cps/errors.hpp"

namespace cps {

CdfIsomorphism make_cdf_isomorphism(const ComputableMeasure& mu, long stage_budget) {
  if (mu.space() != SpaceId::unit_interval)
    fail(Errc::bad_parameter, "the CDF transform lives on the unit interval");
  if (mu.atom_flag() != AtomFlag::non_atomic)
    fail(Errc::atomic_measure, "the CDF transform needs a non-atomic base measure");
  return {mu, stage_budget};
}

namespace {

// Certified bracket of F(q) = mu([0, q]) at working stage t:
// mu[0, q - 2^-t) from below, 1 - mu((q + 2^-t, 1]) from above.
std::pair<Rational, Rational> cdf_bracket(const ComputableMeasure& mu, const Rational& q,
                                          long t) {
  Rational step = pow2(-t);
  Rational lo = 0, hi = 1;
  if (q - step > 0) {
    std::vector<IdealBall> left{{SpaceId::unit_interval, IdealPoint(Rational(0)),
                                 std::min<Rational>(q - step, 1)}};
    lo = mu.lower_union(left, t);
  }
  if (q + step < 1) {
    std::vector<IdealBall> right{{SpaceId::unit_interval, IdealPoint(Rational(1)),
                                  1 - std::max<Rational>(q + step, 0)}};
    hi = Rational(1) - mu.lower_union(right, t);
  }
  return {lo, hi};
}

}  // namespace

Rational cdf_forward(const CdfIsomorphism& iso, const ApproxReal& x, long n) {
  if (iso.base.atom_flag() != AtomFlag::non_atomic)
    fail(Errc::atomic_measure, "cdf_forward needs a non-atomic measure");
  for (long t = std::max<long>(n, 2); t <= std::max<long>(n, 2) + iso.stage_budget; ++t) {
    Rational q = eval(x, t);
    auto [lo, hi] = cdf_bracket(iso.base, q, t);
    if (hi - lo <= pow2(-n) * 2) return (lo + hi) / 2;
  }
  fail(Errc::stage_budget_exceeded,
       "cdf sandwich did not close at precision 2^-" + std::to_string(n) +
           " (suspect an atom near the query point)");
}

ApproxReal cdf_forward_real(const CdfIsomorphism& iso, const ApproxReal& x) {
  CdfIsomorphism iso_copy = iso;
  ApproxReal x_copy = x;
  return {[iso_copy, x_copy](long n) { return cdf_forward(iso_copy, x_copy, n); }, Rational(1)};
}

Rational cdf_inverse(const CdfIsomorphism& iso, const ApproxReal& y, long n) {
  // Bracket [lo, hi] always contains [G_<(y), G_>(y)]; each decisive round
  // shrinks it by at least a third using certified strict comparisons.
  Rational lo = 0, hi = 1;
  long t = std::max<long>(n, 3);
  for (long round = 0; round < iso.stage_budget; ++round) {
    if (hi - lo <= pow2(-n) * 2) return (lo + hi) / 2;
    Rational m1 = lo + (hi - lo) / 3;
    Rational m2 = lo + (hi - lo) * 2 / 3;
    bool moved = false;
    Separation s1 = separate(cdf_forward_real(iso, const_real(m1)), y, t);
    if (s1 == Separation::greater) {  // F(m1) > y
      hi = m1;
      moved = true;
    } else if (s1 == Separation::less) {
      lo = m1;
      moved = true;
    }
    if (hi - lo <= pow2(-n) * 2) return (lo + hi) / 2;
    if (m2 > lo && m2 < hi) {
      Separation s2 = separate(cdf_forward_real(iso, const_real(m2)), y, t);
      if (s2 == Separation::less) {  // F(m2) < y
        lo = m2;
        moved = true;
      } else if (s2 == Separation::greater) {
        hi = m2;
        moved = true;
      }
    }
    if (!moved) ++t;
  }
  fail(Errc::stage_budget_exceeded,
       "inverse bracket stalled at width " + rat_to_string(hi - lo) +
           " (y likely sits under a plateau of F)");
}

ApproxReal cdf_inverse_real(const CdfIsomorphism& iso, const ApproxReal& y) {
  CdfIsomorphism iso_copy = iso;
  ApproxReal y_copy = y;
  return {[iso_copy, y_copy](long n) { return cdf_inverse(iso_copy, y_copy, n); }, Rational(1)};
}

Word binary_expand(const ApproxReal& x, long k, long budget) {
  Word out;
  Rational lo = 0;
  for (long i = 1; i <= k; ++i) {
    Rational mid = lo + pow2(-i);
    Separation s = Separation::unseparated;
    for (long t = i + 1; t <= i + 1 + budget; ++t) {
      s = separate(x, const_real(mid), t);
      if (s != Separation::unseparated) break;
    }
    if (s == Separation::unseparated)
      fail(Errc::dyadic_boundary,
           "bit " + std::to_string(i) + " undecided: the point is (near-)dyadic at " +
               rat_to_string(mid));
    if (s == Separation::greater) {  // x > mid
      out.push_back('1');
      lo = mid;
    } else {
      out.push_back('0');
    }
  }
  return out;
}

ApproxReal binary_decode(const ApproxPoint& bits) {
  if (bits.space != SpaceId::cantor) fail(Errc::space_mismatch, "binary_decode");
  if (!bits.bits) fail(Errc::bad_parameter, "binary_decode needs a bit stream");
  auto stream = *bits.bits;
  return {[stream](long n) {
            // n+1 bits leave a tail of at most 2^-(n+1).
            Rational s = 0;
            for (long i = 1; i <= n + 1; ++i)
              if (stream(std::uint64_t(i))) s += pow2(-i);
            return s;
          },
          Rational(1)};
}

Morphism morphism_cdf(const CdfIsomorphism& iso) {
  CdfIsomorphism iso_copy = iso;
  Rational lipschitz = iso.base.density_sup().value_or(Rational(0));
  if (lipschitz <= 0)
    fail(Errc::unsupported_morphism, "cdf morphism needs a density bound on its base");
  long lip_bits = long(bit_length(ceil_rat(lipschitz)));
  return {SpaceId::unit_interval, SpaceId::unit_interval, "cdf",
          [iso_copy](const IdealPoint& p, long prec) {
            return IdealPoint(cdf_forward(iso_copy, const_real(std::get<Rational>(p)), prec));
          },
          [iso_copy](const std::vector<IdealBall>& balls, long stage) {
            // Monotone enumeration of certified grid intervals inside
            // F^-1((a, b)); F is non-decreasing so grid endpoints certify
            // whole runs.
            std::vector<IdealBall> out;
            long res = std::clamp<long>(stage, 2, 12);
            for (const auto& ball : balls) {
              Rational a = std::get<Rational>(ball.center) - ball.radius;
              Rational b = std::get<Rational>(ball.center) + ball.radius;
              Int cells = Int(1) << res;
              Rational lo_pt = -1, hi_pt = -1;
              for (Int i = 0; i <= cells; ++i) {
                Rational x(i, cells);
                ApproxReal fx = cdf_forward_real(iso_copy, const_real(x));
                bool above_a =
                    a < 0 || separate(const_real(a), fx, res + 2) == Separation::less;
                bool below_b =
                    b > 1 || separate(fx, const_real(b), res + 2) == Separation::less;
                if (above_a && below_b) {
                  if (lo_pt < 0) lo_pt = x;
                  hi_pt = x;
                } else if (lo_pt >= 0) {
                  break;
                }
              }
              if (lo_pt >= 0 && hi_pt > lo_pt)
                out.push_back({SpaceId::unit_interval, IdealPoint((lo_pt + hi_pt) / 2),
                               (hi_pt - lo_pt) / 2});
            }
            return out;
          },
          [lip_bits](long n) { return n + lip_bits + 1; }};
}

}  // namespace cps
