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

#include "cps/region.hpp"

#include <algorithm>
#include <functional>

#include "cps/errors.hpp"

namespace cps {

namespace {

std::vector<Segment> normalize(std::vector<Segment> segs) {
  std::vector<Segment> in;
  for (auto& s : segs)
    if (s.lo < s.hi) in.push_back(s);
  std::sort(in.begin(), in.end(),
            [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
  std::vector<Segment> out;
  for (auto& s : in) {
    if (!out.empty() && s.lo <= out.back().hi) {
      if (out.back().hi < s.hi) out.back().hi = s.hi;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

IntervalSet::IntervalSet(std::vector<Segment> segments) : segments_(normalize(std::move(segments))) {}

IntervalSet IntervalSet::closed(const Rational& a, const Rational& b) {
  return IntervalSet({Segment{{a, false}, {b, true}}});
}
IntervalSet IntervalSet::open(const Rational& a, const Rational& b) {
  return IntervalSet({Segment{{a, true}, {b, false}}});
}
IntervalSet IntervalSet::half_open(const Rational& a, const Rational& b) {
  return IntervalSet({Segment{{a, false}, {b, false}}});
}
IntervalSet IntervalSet::full() { return closed(0, 1); }

bool IntervalSet::contains(const Rational& p) const {
  Cut c{p, false};
  for (const auto& s : segments_)
    if (s.lo <= c && c < s.hi) return true;
  return false;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Segment> all = segments_;
  all.insert(all.end(), other.segments_.begin(), other.segments_.end());
  return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Segment> out;
  std::size_t i = 0, j = 0;
  while (i < segments_.size() && j < other.segments_.size()) {
    const Segment& a = segments_[i];
    const Segment& b = other.segments_[j];
    Cut lo = std::max(a.lo, b.lo, [](const Cut& x, const Cut& y) { return x < y; });
    Cut hi = std::min(a.hi, b.hi, [](const Cut& x, const Cut& y) { return x < y; });
    if (lo < hi) out.push_back({lo, hi});
    if (a.hi < b.hi) ++i;
    else ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::complement() const {
  IntervalSet clipped = intersect(full());
  std::vector<Segment> out;
  Cut cursor{Rational(0), false};
  for (const auto& s : clipped.segments_) {
    if (cursor < s.lo) out.push_back({cursor, s.lo});
    cursor = s.hi;
  }
  Cut end{Rational(1), true};
  if (cursor < end) out.push_back({cursor, end});
  return IntervalSet(std::move(out));
}

Rational IntervalSet::length() const {
  Rational total = 0;
  for (const auto& s : segments_) total += s.hi.x - s.lo.x;
  return total;
}

IntervalSet coverage_at_least(const std::vector<IntervalSet>& sets, std::size_t threshold) {
  if (threshold == 0) return IntervalSet::full();
  // Sweep over cut events.
  std::vector<std::pair<Cut, int>> events;
  for (const auto& set : sets) {
    for (const auto& s : set.segments()) {
      events.push_back({s.lo, +1});
      events.push_back({s.hi, -1});
    }
  }
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    if (a.first == b.first) return a.second > b.second;  // opens before closes
    return a.first < b.first;
  });
  std::vector<Segment> out;
  std::size_t depth = 0;
  Cut open_at{Rational(0), false};
  bool open = false;
  for (const auto& [cut, delta] : events) {
    if (delta > 0) {
      ++depth;
      if (depth == threshold) {
        open_at = cut;
        open = true;
      }
    } else {
      if (depth == threshold && open) {
        out.push_back({open_at, cut});
        open = false;
      }
      --depth;
    }
  }
  return IntervalSet(std::move(out));
}

Rational word_value(const Word& w) {
  Rational v = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] == '1') v += pow2(-long(i + 1));
  return v;
}

Rational cylinder_mass(const Word& w, const Rational& p) {
  Rational m = 1;
  for (char c : w) m *= (c == '1') ? p : Rational(1) - p;
  return m;
}

namespace {

bool is_prefix(const Word& a, const Word& b) {  // a prefix of b
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

std::vector<Word> normalize_words(std::vector<Word> ws) {
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  // Drop words that have an ancestor present.
  std::vector<Word> anti;
  for (const auto& w : ws) {
    bool covered = false;
    for (const auto& a : anti)
      if (is_prefix(a, w)) { covered = true; break; }
    if (!covered) anti.push_back(w);
  }
  // Merge sibling pairs upward until stable.
  bool changed = true;
  while (changed) {
    changed = false;
    std::sort(anti.begin(), anti.end());
    for (std::size_t i = 0; i + 1 < anti.size(); ++i) {
      const Word& a = anti[i];
      const Word& b = anti[i + 1];
      if (!a.empty() && a.size() == b.size() &&
          a.compare(0, a.size() - 1, b, 0, b.size() - 1) == 0 &&
          a.back() == '0' && b.back() == '1') {
        Word parent = a.substr(0, a.size() - 1);
        anti.erase(anti.begin() + long(i), anti.begin() + long(i + 2));
        anti.push_back(parent);
        changed = true;
        break;
      }
    }
  }
  std::sort(anti.begin(), anti.end());
  return anti;
}

}  // namespace

CylinderSet::CylinderSet(std::vector<Word> words) : words_(normalize_words(std::move(words))) {}

CylinderSet CylinderSet::cylinder(const Word& w) { return CylinderSet({w}); }

CylinderSet CylinderSet::full() { return CylinderSet({Word()}); }

bool CylinderSet::contains_prefix(const Word& w) const {
  for (const auto& a : words_)
    if (is_prefix(a, w)) return true;
  return false;
}

CylinderSet CylinderSet::unite(const CylinderSet& other) const {
  std::vector<Word> all = words_;
  all.insert(all.end(), other.words_.begin(), other.words_.end());
  return CylinderSet(std::move(all));
}

CylinderSet CylinderSet::intersect(const CylinderSet& other) const {
  std::vector<Word> out;
  for (const auto& a : words_) {
    for (const auto& b : other.words_) {
      if (is_prefix(a, b)) out.push_back(b);
      else if (is_prefix(b, a)) out.push_back(a);
    }
  }
  return CylinderSet(std::move(out));
}

CylinderSet CylinderSet::complement() const {
  // Walk down the prefix tree; siblings of every word's path are outside.
  std::vector<Word> out;
  std::function<void(const Word&)> walk = [&](const Word& prefix) {
    bool any_below = false;
    for (const auto& w : words_) {
      if (w == prefix) return;  // fully covered, contributes nothing
      if (is_prefix(prefix, w)) any_below = true;
    }
    if (!any_below) {
      out.push_back(prefix);
      return;
    }
    walk(prefix + '0');
    walk(prefix + '1');
  };
  walk(Word());
  return CylinderSet(std::move(out));
}

Rational CylinderSet::mass(const Rational& p) const {
  Rational total = 0;
  for (const auto& w : words_) total += cylinder_mass(w, p);
  return total;
}

CylinderSet coverage_at_least(const std::vector<CylinderSet>& sets, std::size_t threshold) {
  if (threshold == 0) return CylinderSet::full();
  if (threshold > sets.size()) return CylinderSet();
  std::vector<Word> out;
  std::function<void(const Word&, std::size_t, std::vector<const CylinderSet*>)> walk =
      [&](const Word& prefix, std::size_t acc, std::vector<const CylinderSet*> live) {
        std::vector<const CylinderSet*> next;
        for (const CylinderSet* s : live) {
          if (s->contains_prefix(prefix)) ++acc;
          else {
            // Keep only sets that still have words below this prefix.
            bool below = false;
            for (const auto& w : s->words())
              if (is_prefix(prefix, w)) { below = true; break; }
            if (below) next.push_back(s);
          }
        }
        if (acc >= threshold) {
          out.push_back(prefix);
          return;
        }
        if (acc + next.size() < threshold) return;
        walk(prefix + '0', acc, next);
        walk(prefix + '1', acc, next);
      };
  std::vector<const CylinderSet*> live;
  live.reserve(sets.size());
  for (const auto& s : sets) live.push_back(&s);
  walk(Word(), 0, std::move(live));
  return CylinderSet(std::move(out));
}

}  // namespace cps
