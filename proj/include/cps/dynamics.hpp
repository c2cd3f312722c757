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

#ifndef CPS_DYNAMICS_HPP
#define CPS_DYNAMICS_HPP

#include "cps/measures.hpp"

namespace cps {

// Everything reducible to cylinder/dyadic combinatorics runs in exact
// rationals; only Manneville-Pomeau and rotation orbits use validated
// enclosures.

enum class DynKind { shift, doubling, manneville_pomeau, rotation };

// Claimed polynomial mixing: |C_n(E_i, E_j)| <= c(i,j) / n^alpha.
struct CorrelationBound {
  Rational alpha;
  std::function<Rational(std::size_t, std::size_t)> c;
};

struct DynSystem {
  DynKind kind;
  SpaceId space;
  ComputableMeasure invariant_measure;
  Rational shift_p = Rational(1, 2);        // Bernoulli parameter (shift)
  Rational mp_s = 1;                        // T(x) = x + x^(1+s) mod 1
  std::optional<ApproxReal> rotation_theta;
  std::optional<CorrelationBound> mixing_info;
};

DynSystem shift_system(const Rational& p = Rational(1, 2));
DynSystem doubling_system();
// s must be a positive rational with denominator <= 4 (exact root
// enclosures); the a.c. invariant measure has no closed form here, so the
// measure slot carries Lebesgue as the reference measure for observables.
DynSystem mp_system(const Rational& s);
DynSystem rotation_system(const ApproxReal& theta);

// --- observables ------------------------------------------------------------

enum class ObservableForm { cylinder_indicator, dyadic_indicator, step_function };

struct ObservableFn {
  ObservableForm form;
  CylinderSet cylinders;     // cylinder_indicator (possibly several words)
  IntervalSet region;        // dyadic_indicator
  std::vector<Rational> step_levels;      // step_function
  std::vector<IntervalSet> step_cells;
  Rational bound;            // M with |f| <= M
};

ObservableFn obs_cylinder(const Word& w, const Rational& M = 1);
ObservableFn obs_cylinder_set(const CylinderSet& s, const Rational& M = 1);
ObservableFn obs_dyadic(const Rational& lo, const Rational& hi, const Rational& M = 1);
ObservableFn obs_step(std::vector<Rational> levels, std::vector<IntervalSet> cells);

// Exact integral of f against the system's invariant measure.
Rational observable_mean(const DynSystem& sys, const ObservableFn& f);

// The indicator event on the symbolic side: cylinder observables pass
// through, dyadic observables ride the binary conjugacy of the doubling
// map (unsupported_observable otherwise).
CylinderSet symbolic_event_of(const DynSystem& sys, const ObservableFn& f);

// Exact upper bound of sum_{i >= I} i^-beta for an integer beta >= 2
// (integral test; no roots involved).
Rational tail_sum_upper(std::size_t I, unsigned beta);

// --- orbits -----------------------------------------------------------------

// Arc on the circle: [lo, lo + width] mod 1 with lo in [0, 1).
struct CircleInterval {
  Rational lo;
  Rational width;
};

bool circle_contains(const CircleInterval& I, const Rational& x);

// Validated orbit of the Manneville-Pomeau map from an exact start, with
// outward dyadic rounding at work_bits per step. Raises precision_exhausted
// once an enclosure width passes 1/2.
std::vector<CircleInterval> mp_orbit_enclosure(const DynSystem& sys, const Rational& x0,
                                               long steps, long work_bits);

// Same computation, returning the sound prefix instead of throwing when a
// width passes 1/2.
struct MpOrbit {
  std::vector<CircleInterval> enclosures;
  bool exhausted = false;  // stopped because the next width passed 1/2
};
MpOrbit mp_orbit_enclosure_prefix(const DynSystem& sys, const Rational& x0, long steps,
                                  long work_bits);

// n-fold image of a point. Shift drops symbols exactly; doubling is exact
// on rationals; MP and rotation return oracle-backed points with validated
// enclosures behind them.
ApproxPoint iterate(const DynSystem& sys, const ApproxPoint& x, long n);

// --- Birkhoff machinery -----------------------------------------------------

struct BirkhoffValue {
  Rational lo, hi;
  bool exact() const { return lo == hi; }
};

BirkhoffValue birkhoff_average(const DynSystem& sys, const ObservableFn& f,
                               const ApproxPoint& x, const Int& n);

// Exact C_n(E, F) for the shift/doubling with indicator observables; the
// enumeration walks prefixes of length n + max word length (too_large
// beyond 24).
Rational correlation(const DynSystem& sys, const ObservableFn& e, const ObservableFn& f, long n);

// Enclosure of C_n(E, F) for a rotation with interval indicators.
std::pair<Rational, Rational> rotation_correlation(const DynSystem& sys, const ObservableFn& e,
                                                   const ObservableFn& f, long n, long prec);

struct MixingRow {
  std::size_t i, j;
  long n;
  Rational value_lo, value_hi;  // equal when exact
  bool exact;
  Rational bound_value;         // c(i,j) / n^alpha (upper bound)
  bool pass;                    // |C_n| certified <= bound
  bool expect_exact_zero;       // shift/doubling horizon reached
};

std::vector<MixingRow> verify_mixing(const DynSystem& sys,
                                     const std::vector<ObservableFn>& events,
                                     const CorrelationBound& bound, long n_lo, long n_hi,
                                     long prec = 20);

enum class DeviationMode { exact, chebyshev };

// mu{ |S_n/n - mean| > delta }, exact by prefix enumeration, or the
// Chebyshev-chain upper bound. bad_delta when delta lands exactly on an
// achievable deviation (the almost-decidability grid excludes it).
Rational deviation_measure(const DynSystem& sys, const ObservableFn& f, const Rational& delta,
                           long n, DeviationMode mode);

// The exact cylinder decomposition of the deviation set (level material for
// tests); too_large when the servicing enumeration would exceed the cap.
CylinderSet deviation_region(const DynSystem& sys, const ObservableFn& f, const Rational& delta,
                             long n);

// --- schedules and the interpolation bound ----------------------------------

struct SubsequenceSchedule {
  Rational alpha;
  long beta;
  Int index(std::size_t i) const;            // n_i = i^beta
  Rational ratio(std::size_t i) const;       // beta_i = n_i / n_{i+1}
  Rational tail_bound(std::size_t I) const;  // >= sum_{i >= I} n_i^-alpha
};

SubsequenceSchedule make_schedule(const Rational& alpha);

// S_k/k - S_l/l <= 2(1-beta)M for any |values| <= M with beta <= k/l <= 1;
// a regression guard over the summation code.
bool interpolation_gap_check(const std::vector<Rational>& values, std::size_t k, std::size_t l,
                             const Rational& beta, const Rational& M);

// --- step approximation -----------------------------------------------------

struct StepApproximation {
  std::vector<ApproxReal> levels;      // r_1 = -M .. r_k = M
  std::vector<Rational> level_values;  // snapshots at high precision
  Rational epsilon;
  Rational bound;                      // M
  std::vector<ZeroMeasureTrace> certificates;  // one per level
};

// Levels spanning [-M, M] with gaps < epsilon and certified zero pushforward
// mass (nested-interval certificates). The identity descriptor approximates
// f(x) = x on the carrier.
struct IdentityObservable {
  Rational bound = 1;
};
using StepTarget = std::variant<ObservableFn, IdentityObservable>;

StepApproximation step_approx(const StepTarget& f, const ComputableMeasure& mu,
                              const Rational& epsilon, long stage_budget = 64);

// --- experiments -------------------------------------------------------------

struct BirkhoffRow {
  Int n;
  Rational avg_lo, avg_hi;
  bool exact;
  Rational mean;
  Rational abs_dev;  // max over the enclosure
  bool on_schedule;
};

struct BirkhoffReport {
  std::vector<BirkhoffRow> rows;
  Rational mean;
  // max - min of S_n/n over the schedule samples in the window (certified
  // from the enclosures; no claim about true limits).
  Rational window_oscillation;
};

BirkhoffReport typicality_experiment(const DynSystem& sys, const ApproxPoint& x,
                                     const ObservableFn& f, const SubsequenceSchedule& schedule,
                                     std::size_t max_i, std::size_t dense_upto = 64);

}  // namespace cps

#endif  // CPS_DYNAMICS_HPP
