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

#ifndef CPS_SPACES_HPP
#define CPS_SPACES_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cps/approx_real.hpp"
#include "cps/rational.hpp"

namespace cps {

// The two concrete computable metric spaces: the binary Cantor space with
// d(x,y) = sum over differing coordinates i >= 1 of 2^-i (diameter 1), and
// the unit interval with |x - y|.
enum class SpaceId { cantor, unit_interval };

inline const char* space_name(SpaceId s) {
  return s == SpaceId::cantor ? "cantor" : "unit_interval";
}

// Finite binary word over {0,1}, stored as '0'/'1' characters. As an ideal
// point it denotes the ultimately-0 sequence w 0 0 0 ...
using Word = std::string;

// Ideal points: finite words for Cantor, rationals in [0,1] for the interval.
using IdealPoint = std::variant<Word, Rational>;

SpaceId point_space(const IdealPoint& p);
std::string point_to_string(const IdealPoint& p);

// Open metric ball around an ideal point with positive rational radius.
struct IdealBall {
  SpaceId space;
  IdealPoint center;
  Rational radius;

  // Index under the diagonal pairing of (center index, radius index) in the
  // canonical enumerations below. Computed on demand; not part of identity.
  Int index() const;
};

// A point given by a precision oracle: oracle(n) is an ideal point within
// distance 2^-n. Cantor points additionally expose their bit stream
// (1-based) and interval points may carry an exact rational or an
// ApproxReal; the exact forms feed the exact-arithmetic code paths.
struct ApproxPoint {
  SpaceId space;
  std::function<IdealPoint(long)> oracle;
  std::optional<std::function<int(std::uint64_t)>> bits;  // cantor only
  std::optional<Rational> exact;                          // unit interval only
  std::optional<ApproxReal> real;                         // unit interval only
};

ApproxPoint point_from_word(const Word& w);
ApproxPoint point_from_bits(std::function<int(std::uint64_t)> bits);
ApproxPoint point_from_rational(const Rational& q);
ApproxPoint point_from_real(const ApproxReal& x);

// Deterministic pseudorandom bit stream (test-point generation only; all
// mathematical computations stay seed-free).
ApproxPoint pseudorandom_point(std::uint64_t seed, std::uint64_t nbits);

// Monotone stage enumeration of ideal balls denoting an r.e. open set.
struct EffectiveOpen {
  SpaceId space;
  std::function<std::vector<IdealBall>(long)> enumerate;
};

EffectiveOpen effective_open_from_balls(SpaceId space, std::vector<IdealBall> balls);
EffectiveOpen effective_open_empty(SpaceId space);

enum class SemiDecision { yes, not_yet };

// Exact distance between two finite-word ideal points (coordinates start
// at 1, so the space has diameter 1).
Rational cantor_distance(const Word& a, const Word& b);

// Two-sided enclosure of d(x, y) from k agreed coordinates; width <= 2^-k.
std::pair<Rational, Rational> cantor_distance_enclosure(const ApproxPoint& x,
                                                        const ApproxPoint& y,
                                                        std::uint64_t k);

// Exact distance from a finite word to an ideal point of its space.
Rational distance_word_to_word(const Word& a, const Word& b);

// Distance between ideal points (exact, same space).
Rational ideal_distance(const IdealPoint& a, const IdealPoint& b);

// Membership semi-decision: yes only when
// d(oracle(stage), center) + 2^-stage < radius holds in exact arithmetic.
SemiDecision ball_membership(const ApproxPoint& x, const IdealBall& ball, long stage);

// yes iff some ball of enumerate(stage) certifies x at precision stage.
SemiDecision open_membership(const ApproxPoint& x, const EffectiveOpen& u, long stage);
// Same, also reporting the certifying ball.
std::pair<SemiDecision, std::optional<IdealBall>> open_membership_witness(
    const ApproxPoint& x, const EffectiveOpen& u, long stage);

EffectiveOpen open_union(const EffectiveOpen& u, const EffectiveOpen& v);

// Enumerates canonical ideal balls certified (by exact center-distance and
// radius arithmetic) to sit inside a stage ball of each operand. Extensional:
// the result denotes the intersection but uses its own ball numbering.
EffectiveOpen open_intersect(const EffectiveOpen& u, const EffectiveOpen& v);

// B(inner) certified inside B(outer): d(centers) + r_inner <= r_outer.
bool ball_contained(const IdealBall& inner, const IdealBall& outer);

// Canonical enumerations backing ball indices and open_intersect witnesses.
Word nth_word(std::uint64_t k);
Rational nth_unit_rational(std::uint64_t k);   // dense in [0,1]
Rational nth_positive_rational(std::uint64_t k);
IdealPoint nth_ideal_point(SpaceId space, std::uint64_t k);
Int pairing(const Int& i, const Int& j);

}  // namespace cps

#endif  // CPS_SPACES_HPP
