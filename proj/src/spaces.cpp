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

#include "cps/spaces.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>

#include "cps/errors.hpp"

namespace cps {

SpaceId point_space(const IdealPoint& p) {
  return std::holds_alternative<Word>(p) ? SpaceId::cantor : SpaceId::unit_interval;
}

std::string point_to_string(const IdealPoint& p) {
  if (const Word* w = std::get_if<Word>(&p)) return *w;
  return rat_to_string(std::get<Rational>(p));
}

Rational cantor_distance(const Word& a, const Word& b) {
  Rational d = 0;
  std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    char ca = i < a.size() ? a[i] : '0';
    char cb = i < b.size() ? b[i] : '0';
    if (ca != cb) d += pow2(-long(i + 1));
  }
  return d;
}

Rational distance_word_to_word(const Word& a, const Word& b) { return cantor_distance(a, b); }

Rational ideal_distance(const IdealPoint& a, const IdealPoint& b) {
  if (point_space(a) != point_space(b)) fail(Errc::space_mismatch, "ideal_distance");
  if (const Word* wa = std::get_if<Word>(&a))
    return cantor_distance(*wa, std::get<Word>(b));
  return rat_abs(std::get<Rational>(a) - std::get<Rational>(b));
}

std::pair<Rational, Rational> cantor_distance_enclosure(const ApproxPoint& x,
                                                        const ApproxPoint& y,
                                                        std::uint64_t k) {
  if (x.space != SpaceId::cantor || y.space != SpaceId::cantor)
    fail(Errc::space_mismatch, "cantor_distance_enclosure");
  if (!x.bits || !y.bits)
    fail(Errc::bad_parameter, "cantor distance needs bit streams");
  Rational lo = 0;
  for (std::uint64_t i = 1; i <= k; ++i)
    if ((*x.bits)(i) != (*y.bits)(i)) lo += pow2(-long(i));
  return {lo, lo + pow2(-long(k))};
}

namespace {

Word word_prefix(const std::function<int(std::uint64_t)>& bits, long n) {
  Word w;
  w.reserve(std::size_t(std::max<long>(n, 0)));
  for (long i = 1; i <= n; ++i) w.push_back(bits(std::uint64_t(i)) ? '1' : '0');
  return w;
}

}  // namespace

ApproxPoint point_from_word(const Word& w) {
  for (char c : w)
    if (c != '0' && c != '1') fail(Errc::bad_parameter, "word must be over {0,1}");
  auto bits = [w](std::uint64_t i) { return i >= 1 && i <= w.size() && w[i - 1] == '1' ? 1 : 0; };
  return {SpaceId::cantor,
          [bits](long n) { return IdealPoint(word_prefix(bits, n)); },
          bits, std::nullopt, std::nullopt};
}

ApproxPoint point_from_bits(std::function<int(std::uint64_t)> bits) {
  return {SpaceId::cantor,
          [bits](long n) { return IdealPoint(word_prefix(bits, n)); },
          bits, std::nullopt, std::nullopt};
}

ApproxPoint point_from_rational(const Rational& q) {
  return {SpaceId::unit_interval,
          [q](long) { return IdealPoint(q); },
          std::nullopt, q, const_real(q)};
}

ApproxPoint point_from_real(const ApproxReal& x) {
  return {SpaceId::unit_interval,
          [x](long n) { return IdealPoint(eval(x, n)); },
          std::nullopt, std::nullopt, x};
}

ApproxPoint pseudorandom_point(std::uint64_t seed, std::uint64_t nbits) {
  // Materialized once: the oracle contract requires repeatable answers.
  auto bits = std::make_shared<std::vector<std::uint8_t>>();
  bits->reserve(nbits);
  std::mt19937_64 gen(seed);
  std::uint64_t word = 0;
  for (std::uint64_t i = 0; i < nbits; ++i) {
    if (i % 64 == 0) word = gen();
    bits->push_back(std::uint8_t((word >> (i % 64)) & 1));
  }
  return point_from_bits([bits](std::uint64_t i) {
    return (i >= 1 && i <= bits->size()) ? int((*bits)[std::size_t(i - 1)]) : 0;
  });
}

EffectiveOpen effective_open_from_balls(SpaceId space, std::vector<IdealBall> balls) {
  for (const auto& b : balls)
    if (b.space != space) fail(Errc::space_mismatch, "effective_open_from_balls");
  return {space, [balls](long stage) {
            std::size_t n = std::min<std::size_t>(balls.size(),
                                                  stage < 0 ? 0 : std::size_t(stage) + 1);
            return std::vector<IdealBall>(balls.begin(), balls.begin() + n);
          }};
}

EffectiveOpen effective_open_empty(SpaceId space) {
  return {space, [](long) { return std::vector<IdealBall>{}; }};
}

SemiDecision ball_membership(const ApproxPoint& x, const IdealBall& ball, long stage) {
  if (x.space != ball.space) fail(Errc::space_mismatch, "ball_membership");
  if (stage < 0) return SemiDecision::not_yet;
  IdealPoint approx = x.oracle(stage);
  Rational d = ideal_distance(approx, ball.center);
  if (d + pow2(-stage) < ball.radius) return SemiDecision::yes;
  return SemiDecision::not_yet;
}

std::pair<SemiDecision, std::optional<IdealBall>> open_membership_witness(
    const ApproxPoint& x, const EffectiveOpen& u, long stage) {
  if (x.space != u.space) fail(Errc::space_mismatch, "open_membership");
  for (const IdealBall& b : u.enumerate(stage)) {
    if (ball_membership(x, b, stage) == SemiDecision::yes) return {SemiDecision::yes, b};
  }
  return {SemiDecision::not_yet, std::nullopt};
}

SemiDecision open_membership(const ApproxPoint& x, const EffectiveOpen& u, long stage) {
  return open_membership_witness(x, u, stage).first;
}

EffectiveOpen open_union(const EffectiveOpen& u, const EffectiveOpen& v) {
  if (u.space != v.space) fail(Errc::space_mismatch, "open_union");
  auto eu = u.enumerate, ev = v.enumerate;
  return {u.space, [eu, ev](long stage) {
            std::vector<IdealBall> out = eu(stage);
            std::vector<IdealBall> more = ev(stage);
            out.insert(out.end(), more.begin(), more.end());
            return out;
          }};
}

bool ball_contained(const IdealBall& inner, const IdealBall& outer) {
  if (inner.space != outer.space) fail(Errc::space_mismatch, "ball_contained");
  return ideal_distance(inner.center, outer.center) + inner.radius <= outer.radius;
}

Int pairing(const Int& i, const Int& j) { return (i + j) * (i + j + 1) / 2 + j; }

Word nth_word(std::uint64_t k) {
  // Bijection N -> {0,1}*: k + 1 in binary with the leading 1 dropped.
  std::uint64_t v = k + 1;
  Word w;
  while (v > 1) {
    w.push_back((v & 1) ? '1' : '0');
    v >>= 1;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

namespace {

// Memoized enumeration tables; guarded so measure oracles can be queried
// from concurrent workers.
struct RationalTables {
  std::mutex mu;
  // [0,1] in Farey-style order: 0/1, 1/1, 1/2, 1/3, 2/3, 1/4, 3/4, ...
  std::vector<Rational> unit{Rational(0), Rational(1)};
  Int unit_next_den{2};
  // Positive rationals by increasing a+b over coprime pairs.
  std::vector<Rational> positive{Rational(1)};
  Int positive_next_sum{3};

  void grow_unit(std::size_t upto) {
    while (unit.size() <= upto) {
      for (Int a = 1; a < unit_next_den; ++a)
        if (boost::multiprecision::gcd(a, unit_next_den) == 1)
          unit.emplace_back(a, unit_next_den);
      ++unit_next_den;
    }
  }
  void grow_positive(std::size_t upto) {
    while (positive.size() <= upto) {
      for (Int a = 1; a < positive_next_sum; ++a) {
        Int b = positive_next_sum - a;
        if (boost::multiprecision::gcd(a, b) == 1) positive.emplace_back(a, b);
      }
      ++positive_next_sum;
    }
  }
};

RationalTables& tables() {
  static RationalTables t;
  return t;
}

std::optional<std::uint64_t> index_of_unit(const Rational& q, std::size_t scan) {
  auto& t = tables();
  std::lock_guard<std::mutex> lock(t.mu);
  t.grow_unit(scan);
  for (std::size_t i = 0; i < t.unit.size(); ++i)
    if (t.unit[i] == q) return i;
  return std::nullopt;
}

std::optional<std::uint64_t> index_of_positive(const Rational& q, std::size_t scan) {
  auto& t = tables();
  std::lock_guard<std::mutex> lock(t.mu);
  t.grow_positive(scan);
  for (std::size_t i = 0; i < t.positive.size(); ++i)
    if (t.positive[i] == q) return i;
  return std::nullopt;
}

}  // namespace

Rational nth_unit_rational(std::uint64_t k) {
  auto& t = tables();
  std::lock_guard<std::mutex> lock(t.mu);
  t.grow_unit(k);
  return t.unit[k];
}

Rational nth_positive_rational(std::uint64_t k) {
  auto& t = tables();
  std::lock_guard<std::mutex> lock(t.mu);
  t.grow_positive(k);
  return t.positive[k];
}

IdealPoint nth_ideal_point(SpaceId space, std::uint64_t k) {
  if (space == SpaceId::cantor) return nth_word(k);
  return nth_unit_rational(k);
}

Int IdealBall::index() const {
  constexpr std::size_t kScan = 4096;
  Int ci = -1, ri = -1;
  if (space == SpaceId::cantor) {
    const Word& w = std::get<Word>(center);
    // Inverse of nth_word.
    Int v = 1;
    for (char c : w) v = v * 2 + (c == '1' ? 1 : 0);
    ci = v - 1;
  } else {
    auto i = index_of_unit(std::get<Rational>(center), kScan);
    if (!i) fail(Errc::bad_parameter, "ball center outside the scanned enumeration");
    ci = Int(*i);
  }
  auto j = index_of_positive(radius, kScan);
  if (!j) fail(Errc::bad_parameter, "ball radius outside the scanned enumeration");
  ri = Int(*j);
  return pairing(ci, ri);
}

EffectiveOpen open_intersect(const EffectiveOpen& u, const EffectiveOpen& v) {
  if (u.space != v.space) fail(Errc::space_mismatch, "open_intersect");
  auto eu = u.enumerate, ev = v.enumerate;
  SpaceId space = u.space;
  return {space, [eu, ev, space](long stage) {
            std::vector<IdealBall> a = eu(stage), b = ev(stage);
            std::vector<IdealBall> out;
            if (a.empty() || b.empty() || stage < 0) return out;
            // Diagonal sweep over canonical candidate balls.
            std::uint64_t count = std::uint64_t(stage + 1) * std::uint64_t(stage + 1) * 4;
            for (std::uint64_t n = 0; n < count; ++n) {
              // Unpair n into (i, j).
              std::uint64_t s = 0;
              while ((s + 1) * (s + 2) / 2 <= n) ++s;
              std::uint64_t j = n - s * (s + 1) / 2;
              std::uint64_t i = s - j;
              IdealBall cand{space, nth_ideal_point(space, i), nth_positive_rational(j)};
              auto inside = [&](const std::vector<IdealBall>& list) {
                return std::any_of(list.begin(), list.end(),
                                   [&](const IdealBall& o) { return ball_contained(cand, o); });
              };
              if (inside(a) && inside(b)) out.push_back(cand);
            }
            return out;
          }};
}

}  // namespace cps
