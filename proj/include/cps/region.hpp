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

#ifndef CPS_REGION_HPP
#define CPS_REGION_HPP

#include <vector>

#include "cps/rational.hpp"
#include "cps/spaces.hpp"

namespace cps {

// --- Interval regions on [0,1] -------------------------------------------
//
// Endpoint openness matters for atomic measures, so endpoints are "cuts":
// (x, after=false) sits just at x, (x, after=true) just beyond it. A segment
// [lo, hi) in cut order contains the point p iff lo <= (p, false) < hi.
// Closed [a,b] is [(a,false),(b,true)); open (a,b) is [(a,true),(b,false)).

struct Cut {
  Rational x;
  bool after = false;
};

inline bool operator<(const Cut& a, const Cut& b) {
  return a.x < b.x || (a.x == b.x && !a.after && b.after);
}
inline bool operator==(const Cut& a, const Cut& b) { return a.x == b.x && a.after == b.after; }
inline bool operator<=(const Cut& a, const Cut& b) { return a < b || a == b; }

struct Segment {
  Cut lo, hi;  // half-open in cut order; nonempty iff lo < hi
};

// Normalized: sorted, pairwise disjoint, non-touching, nonempty segments.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Segment> segments);

  static IntervalSet closed(const Rational& a, const Rational& b);
  static IntervalSet open(const Rational& a, const Rational& b);
  static IntervalSet half_open(const Rational& a, const Rational& b);  // [a,b)
  static IntervalSet full();                                           // [0,1]

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  bool contains(const Rational& p) const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet complement() const;  // within [0,1]

  // Total length of the segments (the Lebesgue part; openness irrelevant).
  Rational length() const;

 private:
  std::vector<Segment> segments_;
};

// Region covered by at least `threshold` of the given interval sets.
IntervalSet coverage_at_least(const std::vector<IntervalSet>& sets, std::size_t threshold);

// --- Cylinder regions on the Cantor space ---------------------------------
//
// A finite union of cylinders, normalized to an antichain with sibling
// pairs merged (so equal sets have equal representations).

class CylinderSet {
 public:
  CylinderSet() = default;
  explicit CylinderSet(std::vector<Word> words);

  static CylinderSet cylinder(const Word& w);
  static CylinderSet full();

  const std::vector<Word>& words() const { return words_; }
  bool empty() const { return words_.empty(); }
  bool contains_prefix(const Word& w) const;  // [w] subset of the region

  CylinderSet unite(const CylinderSet& other) const;
  CylinderSet intersect(const CylinderSet& other) const;
  CylinderSet complement() const;

  // Mass under Bernoulli(p): sum over words of p^#1 (1-p)^#0.
  Rational mass(const Rational& p) const;

 private:
  std::vector<Word> words_;
};

CylinderSet coverage_at_least(const std::vector<CylinderSet>& sets, std::size_t threshold);

// Mass of a single cylinder under Bernoulli(p).
Rational cylinder_mass(const Word& w, const Rational& p);

Rational word_value(const Word& w);  // sum of w_i 2^-i (left end of the dyadic cell)

}  // namespace cps

#endif  // CPS_REGION_HPP
