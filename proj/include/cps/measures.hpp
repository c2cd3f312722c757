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

#ifndef CPS_MEASURES_HPP
#define CPS_MEASURES_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cps/region.hpp"
#include "cps/spaces.hpp"

namespace cps {

// Finitely supported measure with rational weights: the ideal points of the
// Prokhorov metric space of measures.
struct FiniteMeasure {
  SpaceId space;
  std::vector<std::pair<IdealPoint, Rational>> atoms;
};

// Builds a validated FiniteMeasure: positive weights, exact sum 1, duplicate
// locations merged.
FiniteMeasure make_finite_measure(SpaceId space,
                                  std::vector<std::pair<IdealPoint, Rational>> atoms);

enum class AtomFlag { non_atomic, atomic, unknown };

class ComputableMeasure;

// A concrete morphism of computable probability spaces, presented by the
// pieces pushforward needs: finite-precision images of ideal points, a
// monotone enumeration of ball preimages, and a modulus translating output
// precision to input precision for the coupling argument.
struct Morphism {
  SpaceId from;
  SpaceId to;
  std::string name;
  std::function<IdealPoint(const IdealPoint&, long)> map_point;
  std::function<std::vector<IdealBall>(const std::vector<IdealBall>&, long)> preimage;
  std::function<long(long)> modulus;
  // The binary-expansion map has no modulus; its coupling argument uses the
  // dyadically aligned approximant cells instead.
  bool needs_aligned_cells = false;
};

// Dual representation of a computable probability measure: a Prokhorov
// approximation oracle (n -> finitely supported measure within 2^-n) and a
// monotone lower oracle on finite unions of ideal balls. Built-in measures
// additionally expose exact region masses, which the oracles are derived
// from. Immutable and safe to share.
class ComputableMeasure {
 public:
  class Kernel;

  explicit ComputableMeasure(std::shared_ptr<const Kernel> kernel);

  SpaceId space() const;
  const std::string& name() const;

  // mu_n with rho(mu, mu_n) <= 2^-n.
  FiniteMeasure prokhorov_approx(long n) const;

  // Monotone in stage, converging to the measure of the open union.
  Rational lower_union(const std::vector<IdealBall>& balls, long stage) const;

  AtomFlag atom_flag() const;
  std::vector<IdealPoint> known_atoms() const;

  // Exact region masses when the measure has a closed form.
  std::optional<Rational> exact_mass(const IntervalSet& region) const;
  std::optional<Rational> exact_mass(const CylinderSet& region) const;

  // Supremum of the density of the continuous part, when known (Lipschitz
  // bound for the CDF morphism).
  std::optional<Rational> density_sup() const;

  const Kernel& kernel() const { return *kernel_; }
  std::shared_ptr<const Kernel> kernel_ptr() const { return kernel_; }

 private:
  std::shared_ptr<const Kernel> kernel_;
};

// --- constructors ----------------------------------------------------------

ComputableMeasure lebesgue();
ComputableMeasure bernoulli(const Rational& p);

// Piecewise density c0 + c1*x per piece; pieces must tile [0,1].
struct DensityPiece {
  Rational lo, hi;
  Rational c0, c1;
};
ComputableMeasure density_measure(std::vector<DensityPiece> pieces, std::string name);

// Density 3/2 on [0,1/2], 1/2 on (1/2,1].
ComputableMeasure piecewise_halves();
// CDF x^2 (density 2x).
ComputableMeasure quadratic_cdf();
// Density 3/2 on [0,1/3] and [2/3,1], flat in between; its CDF plateau
// makes the inverse stall at the plateau level.
ComputableMeasure flat_middle();

// blend * (discrete part) + (1 - blend) * continuous. Unit interval only.
ComputableMeasure atomic_mixture(std::vector<std::pair<Rational, Rational>> atoms,
                                 std::optional<ComputableMeasure> continuous,
                                 const Rational& blend);

ComputableMeasure pushforward(const ComputableMeasure& mu, const Morphism& f);

// --- morphisms -------------------------------------------------------------

Morphism morphism_identity(SpaceId space);
Morphism morphism_distance_to(const IdealPoint& center);
Morphism morphism_binary_decode();
Morphism morphism_binary_expand();
Morphism morphism_doubling_map();
Morphism morphism_shift_map();

// --- Prokhorov distance ----------------------------------------------------

// Exact one-sided Prokhorov value (the inf over epsilon of the defining
// condition; symmetric for probability measures, which the tests check).
// Support sizes above 15 are refused: the method walks all subsets.
Rational prokhorov_exact(const FiniteMeasure& mu, const FiniteMeasure& nu);

// Bracket of width <= 2^-n via bisection; each feasibility test is an exact
// max-flow check, so the bracket is certified. Works at any support size.
std::pair<Rational, Rational> prokhorov_bracket(const FiniteMeasure& mu,
                                                const FiniteMeasure& nu, long n);

// Merges atoms into resolution-2^-r cells (grid midpoints on the interval,
// length-r prefixes on Cantor). Moves every atom by at most 2^-r, so
// rho(coarsened, original) <= 2^-r.
FiniteMeasure coarsen_measure(const FiniteMeasure& mu, long r);

// The open interval (lo, hi) cap [0,1] as a unit-interval ball, when the
// intersection is nonempty (balls denote their truncation to the carrier).
std::optional<IdealBall> interval_ball_clipped(const Rational& lo, const Rational& hi);

// --- bounds ----------------------------------------------------------------

// lower <= mu(union of open balls) <= upper. The lower side is the lower
// oracle at stage n; the upper side comes from the exact region mass when
// available, otherwise from the precision-n approximant: mass within 2^-n
// of the enlarged balls plus 2^-n slack.
std::pair<Rational, Rational> derive_bounds(const ComputableMeasure& mu,
                                            const std::vector<IdealBall>& balls, long n);

// Certified upper bound of mu([a,b]) at working precision n.
Rational upper_closed_interval(const ComputableMeasure& mu, const Rational& a,
                               const Rational& b, long n);

// --- zero-measure points ---------------------------------------------------

struct ZeroMeasureTrace {
  // intervals[k] = J_k (closed); upper_bounds[k] is the certified bound
  // used for J_k, with upper_bounds[k] < 2^(1-k) and |J_{k+1}| = |J_k|/3.
  std::vector<std::pair<Rational, Rational>> intervals;
  std::vector<Rational> upper_bounds;
};

struct ZeroMeasurePoint {
  ApproxReal value;
  // Snapshot of the trace as deepened so far; refreshed by trace().
  std::function<ZeroMeasureTrace()> trace;
  // Deepen to at least k nesting levels.
  std::function<void(std::size_t)> extend;
};

// Nested-thirds search inside the closed interval I = [a,b]: dovetails the
// two candidate thirds through rising precision, takes the first one
// certified below 2^-k (left preferred on ties), and returns the nested
// limit with its certificate trace. stage_budget caps the precision rounds
// per level; exceeding it raises precision_stall.
ZeroMeasurePoint find_zero_measure_point(const ComputableMeasure& mu, const Rational& a,
                                         const Rational& b, long stage_budget);

struct AlmostDecidableBall {
  IdealPoint center;
  ApproxReal radius;
  ZeroMeasureTrace certificate;
};

// Radii with zero boundary mass around the given center, one inside each of
// `count` equal cells of [r_lo, r_hi], via zero-measure search on the
// pushforward of mu under the distance to the center.
std::vector<AlmostDecidableBall> almost_decidable_radii(const ComputableMeasure& mu,
                                                        const IdealPoint& center,
                                                        std::size_t count,
                                                        const Rational& r_lo,
                                                        const Rational& r_hi,
                                                        long stage_budget);

}  // namespace cps

#endif  // CPS_MEASURES_HPP
