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

#ifndef CPS_ISOMORPHISM_HPP
#define CPS_ISOMORPHISM_HPP

#include "cps/measures.hpp"

namespace cps {

// The CDF transform F(x) = mu([0,x]) carrying a non-atomic measure on the
// unit interval to the Lebesgue space, with semi-computable envelope
// inverses. F is evaluated by sandwiching through the measure's dual
// oracles, never through a symbolic closed form.
struct CdfIsomorphism {
  ComputableMeasure base;
  long stage_budget = 80;
};

CdfIsomorphism make_cdf_isomorphism(const ComputableMeasure& mu, long stage_budget = 80);

// F(x) within 2^-n. Raises atomic_measure if the base admits atoms and
// stage_budget_exceeded when the sandwich cannot close (a diagnostic for a
// suspected atom at x).
Rational cdf_forward(const CdfIsomorphism& iso, const ApproxReal& x, long n);
ApproxReal cdf_forward_real(const CdfIsomorphism& iso, const ApproxReal& x);

// Right-inverse at y, certified between the envelopes G_< and G_>: shrinks
// a bracket with certified strict comparisons of F against y until its
// width drops below 2^-n. Stalls (stage_budget_exceeded) when y sits under
// a plateau of F, i.e. outside the G_< = G_> domain.
Rational cdf_inverse(const CdfIsomorphism& iso, const ApproxReal& y, long n);
ApproxReal cdf_inverse_real(const CdfIsomorphism& iso, const ApproxReal& y);

// First k binary digits of x, each certified by a strict comparison against
// the dyadic cut; a comparison that stays undecided past the budget raises
// dyadic_boundary (x is dyadic or too close to tell).
Word binary_expand(const ApproxReal& x, long k, long budget = 64);

// Total on Cantor points: partial sums of bit values.
ApproxReal binary_decode(const ApproxPoint& bits);

// The CDF transform as a morphism (for pushforward).
Morphism morphism_cdf(const CdfIsomorphism& iso);

}  // namespace cps

#endif  // CPS_ISOMORPHISM_HPP
