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

#include "cps/randomness.hpp"

#include <algorithm>

#include "cps/errors.hpp"

namespace cps {

// ---------------------------------------------------------------------------
// Failure verification

namespace {

VerifyResult verify_levels(const ApproxPoint& x, const std::string& id,
                           const std::function<EffectiveOpen(long)>& levels, long upto_level,
                           long stage_budget) {
  VerifyResult out;
  for (long level = 1; level <= upto_level; ++level) {
    EffectiveOpen open = levels(level);
    bool found = false;
    for (long stage = 1; stage <= stage_budget && !found; ++stage) {
      auto [decision, ball] = open_membership_witness(x, open, stage);
      if (decision == SemiDecision::yes) {
        out.certificates.push_back({id, level, stage, *ball});
        found = true;
      }
    }
    if (!found) out.uncertified.push_back(level);
  }
  return out;
}

}  // namespace

VerifyResult verify_failure(const ApproxPoint& x, const MLTest& test, long upto_level,
                            long stage_budget) {
  return verify_levels(x, test.id, test.levels, upto_level, stage_budget);
}

VerifyResult verify_failure(const ApproxPoint& x, const SchnorrTest& test, long upto_level,
                            long stage_budget) {
  return verify_levels(x, test.ml.id, test.ml.levels, upto_level, stage_budget);
}

bool replay_certificate(const ApproxPoint& x, const MLTest& test,
                        const FailureCertificate& cert) {
  return open_membership(x, test.levels(cert.level), cert.stage) == SemiDecision::yes;
}

long count_hits(const ApproxPoint& x, const StrongBCTest& test, long upto_level, long stage) {
  long hits = 0;
  for (long level = 1; level <= upto_level; ++level)
    if (open_membership(x, test.levels(level), stage) == SemiDecision::yes) ++hits;
  return hits;
}

// ---------------------------------------------------------------------------
// Hit-count conversions

namespace {

long least_c_above(const Rational& sum_upper) {
  long c = 0;
  while (pow2(c) <= sum_upper) ++c;
  return c;
}

// Witness balls (from the canonical enumeration and the input levels'
// own balls) certified inside at least `threshold` of C_1..C_t.
std::function<EffectiveOpen(long)> hit_count_levels(
    const std::function<EffectiveOpen(long)>& levels, SpaceId space, long c) {
  return [levels, space, c](long k) {
    long threshold_log = k + c;
    return EffectiveOpen{
        space, [levels, space, threshold_log](long t) {
          std::vector<IdealBall> out;
          if (threshold_log > 30) return out;
          Int threshold = Int(1) << threshold_log;
          if (threshold > t) return out;  // not enough levels yet
          std::vector<std::vector<IdealBall>> stage_lists;
          stage_lists.reserve(std::size_t(t));
          for (long i = 1; i <= t; ++i) stage_lists.push_back(levels(i).enumerate(t));
          // Candidates: every ball the levels themselves enumerate.
          std::vector<IdealBall> candidates;
          for (const auto& list : stage_lists)
            candidates.insert(candidates.end(), list.begin(), list.end());
          for (const auto& cand : candidates) {
            Int covered = 0;
            for (const auto& list : stage_lists) {
              for (const auto& outer : list) {
                if (ball_contained(cand, outer)) {
                  ++covered;
                  break;
                }
              }
            }
            if (covered >= threshold) out.push_back(cand);
          }
          return out;
        }};
  };
}

}  // namespace

SchnorrTest strong_bc_to_schnorr(const StrongBCTest& test, std::optional<long> c_opt) {
  long c = least_c_above(test.sum_upper);
  if (c_opt) {
    if (pow2(*c_opt) <= test.sum_upper)
      fail(Errc::bad_constant, "need 2^c > sum of level measures");
    c = *c_opt;
  }
  SpaceId space = test.mu.space();
  StrongBCTest in = test;

  SchnorrTest out{MLTest{test.id + "->schnorr", test.mu,
                         hit_count_levels(test.levels, space, c), nullptr, nullptr},
                  nullptr};

  // Exact transfer: for nested levels A_k is exactly C_{2^(k+c)}.
  if (test.nested_levels && test.exact_region) {
    out.ml.exact_region = [in, c](long k) -> std::optional<Region> {
      if (k + c > 30) return std::nullopt;
      return in.exact_region(long((Int(1) << (k + c)).convert_to<long>()));
    };
    out.ml.exact_measure = [in, c](long k) -> std::optional<Rational> {
      if (k + c > 30) return std::nullopt;
      return in.exact_measure(long((Int(1) << (k + c)).convert_to<long>()));
    };
    out.measure_oracle = [in, c](long k) {
      return ApproxReal{[in, c, k](long) -> Rational {
                          auto m = in.exact_measure(long((Int(1) << (k + c)).convert_to<long>()));
                          if (!m) fail(Errc::too_large, "level beyond the exact horizon");
                          return *m;
                        },
                        Rational(1)};
    };
    return out;
  }

  // General route (the epsilon-scheme): pick n0 with certified tail below
  // eps/2 from the computable sum, take the exact hit-count region over the
  // first n0 levels, and report its exact mass (within eps of mu(A_k)).
  if (!test.exact_region || !test.exact_measure)
    fail(Errc::too_large, "conversion needs exact level regions on this input");
  out.ml.exact_region = nullptr;
  out.ml.exact_measure = nullptr;
  out.measure_oracle = [in, c, space](long k) {
    return ApproxReal{
        [in, c, k, space](long p) -> Rational {
          Rational eps = pow2(-p);
          // Certified tail: sum - partial(n0) + oracle slack.
          long n0 = 1;
          Rational partial = 0;
          Rational sum = eval(in.sum_oracle, p + 3);
          while (true) {
            auto m = in.exact_measure(n0);
            if (!m) fail(Errc::too_large, "sum tail refinement beyond the exact horizon");
            partial += *m;
            Rational tail_upper = sum - partial + pow2(-(p + 3)) * 2;
            if (tail_upper < eps / 2) break;
            ++n0;
            if (n0 > 4096) fail(Errc::too_large, "tail refinement did not settle");
          }
          Int threshold = Int(1) << (k + c);
          if (threshold > n0) return eps / 4;  // region empty so far; mass < eps/2
          // Exact mass of the hit-count region over levels 1..n0.
          auto region_at = [&in](long i) {
            auto r = in.exact_region(i);
            if (!r) fail(Errc::too_large, "level region beyond the exact horizon");
            return *r;
          };
          if (space == SpaceId::unit_interval) {
            std::vector<IntervalSet> regions;
            for (long i = 1; i <= n0; ++i)
              regions.push_back(std::get<IntervalSet>(region_at(i)));
            IntervalSet a = coverage_at_least(regions,
                                              threshold.convert_to<std::size_t>());
            auto mass = in.mu.exact_mass(a);
            if (!mass) fail(Errc::too_large, "measure lacks exact region masses");
            return *mass + eps / 4;
          }
          std::vector<CylinderSet> regions;
          for (long i = 1; i <= n0; ++i)
            regions.push_back(std::get<CylinderSet>(region_at(i)));
          CylinderSet a = coverage_at_least(regions, threshold.convert_to<std::size_t>());
          auto mass = in.mu.exact_mass(a);
          if (!mass) fail(Errc::too_large, "measure lacks exact region masses");
          return *mass + eps / 4;
        },
        Rational(1)};
  };
  return out;
}

MLTest bc_to_ml(const StrongBCTest& test, std::optional<long> c_opt) {
  long c = least_c_above(test.sum_upper);
  if (c_opt) {
    if (pow2(*c_opt) <= test.sum_upper)
      fail(Errc::bad_constant, "need 2^c > sum of level measures");
    c = *c_opt;
  }
  MLTest out{test.id + "->ml", test.mu,
             hit_count_levels(test.levels, test.mu.space(), c), nullptr, nullptr};
  return out;
}

// ---------------------------------------------------------------------------
// Deviation tests along a schedule

namespace {

// Occurrence-count distribution of a cylinder event among the first n
// shifts, as exact masses indexed by the count: integer transfer DP over
// the window automaton (weights p^ones are folded by tracking the number
// of ones seen).
std::vector<Rational> count_distribution_dp(const CylinderSet& event, long n,
                                            const Rational& p) {
  std::size_t maxlen = 0;
  for (const auto& w : event.words()) maxlen = std::max(maxlen, w.size());
  if (maxlen == 0) {
    // Whole space or empty.
    std::vector<Rational> dist(std::size_t(n) + 1, 0);
    dist[event.empty() ? 0 : std::size_t(n)] = 1;
    return dist;
  }
  if (n > 4096) fail(Errc::too_large, "transfer DP capped at n = 4096");
  long L = n + long(maxlen) - 1;
  std::size_t states = std::size_t(1) << (maxlen - 1);
  Int a = num(p), b = den(p);
  Int bm = b - a;
  // dp[state][count][ones-in-window-prefix? no: ones folded into weights]:
  // weights stay integer by scaling each bit step by b: after t bits the
  // implicit denominator is b^t. dp[state][count] accumulates the weighted
  // path counts.
  std::vector<std::vector<Int>> dp(states, std::vector<Int>(std::size_t(n) + 1, 0));
  std::vector<std::vector<Int>> next(states, std::vector<Int>(std::size_t(n) + 1, 0));
  // Seed the first maxlen-1 bits (the window warm-up).
  dp[0][0] = 1;
  long warm = long(maxlen) - 1;
  for (long t = 0; t < warm; ++t) {
    for (auto& row : next)
      std::fill(row.begin(), row.end(), Int(0));
    std::size_t mask = (std::size_t(1) << t) - 1;  // bits seen so far
    for (std::size_t st = 0; st <= mask; ++st) {
      for (std::size_t s = 0; s <= std::size_t(n); ++s) {
        if (dp[st][s] == 0) continue;
        next[(st << 1)][s] += dp[st][s] * bm;
        next[(st << 1) | 1][s] += dp[st][s] * a;
      }
    }
    dp.swap(next);
  }
  // Positions 1..n: each new bit completes a window.
  for (long pos = 1; pos <= n; ++pos) {
    for (auto& row : next)
      std::fill(row.begin(), row.end(), Int(0));
    for (std::size_t st = 0; st < states; ++st) {
      for (std::size_t s = 0; s <= std::size_t(n); ++s) {
        if (dp[st][s] == 0) continue;
        for (int bit = 0; bit <= 1; ++bit) {
          std::size_t window = (st << 1) | std::size_t(bit);
          Word w;
          for (long i = long(maxlen) - 1; i >= 0; --i)
            w.push_back(((window >> i) & 1) ? '1' : '0');
          bool occurs = event.contains_prefix(w);
          std::size_t s2 = s + (occurs ? 1 : 0);
          if (s2 > std::size_t(n)) continue;
          std::size_t st2 = window & (states - 1);
          next[st2][s2] += dp[st][s] * (bit ? a : bm);
        }
      }
    }
    dp.swap(next);
  }
  Int denom = boost::multiprecision::pow(b, unsigned(L));
  std::vector<Rational> dist(std::size_t(n) + 1, 0);
  for (std::size_t st = 0; st < states; ++st)
    for (std::size_t s = 0; s <= std::size_t(n); ++s)
      if (dp[st][s] != 0) dist[s] += Rational(dp[st][s], denom);
  return dist;
}

}  // namespace

std::vector<Rational> occurrence_distribution(const CylinderSet& event, long n,
                                              const Rational& p) {
  return count_distribution_dp(event, n, p);
}

Rational deviation_level_measure(const DynSystem& sys, const ObservableFn& f,
                                 const Rational& delta, long n) {
  if (n <= 20) return deviation_measure(sys, f, delta, n, DeviationMode::exact);
  // Transfer-DP route for large n (independent of the enumeration path).
  CylinderSet ev = symbolic_event_of(sys, f);
  Rational p = sys.kind == DynKind::shift ? sys.shift_p : Rational(1, 2);
  Rational mean = ev.mass(p);
  std::vector<Rational> dist = count_distribution_dp(ev, n, p);
  Rational hi_cut = Rational(n) * (mean + delta);
  Rational lo_cut = Rational(n) * (mean - delta);
  Rational mass = 0;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    if (dist[s] == 0) continue;
    Rational sv = Rational(Int(s));
    if (sv == hi_cut || sv == lo_cut)
      fail(Errc::bad_delta, "delta hits the achievable average " + rat_to_string(sv / n));
    if (sv > hi_cut || sv < lo_cut) mass += dist[s];
  }
  return mass;
}

StrongBCTest deviation_schnorr_test(const DynSystem& sys, const ObservableFn& f,
                                    const Rational& delta, const SubsequenceSchedule& schedule) {
  if (f.form != ObservableForm::cylinder_indicator &&
      f.form != ObservableForm::dyadic_indicator)
    fail(Errc::unsupported_observable, "deviation tests need indicator observables");
  if (sys.kind != DynKind::shift && sys.kind != DynKind::doubling)
    fail(Errc::unsupported_observable, "deviation tests run on the shift or doubling map");
  // Work on the symbolic side throughout (the doubling map rides its
  // conjugacy; boundaries are measure zero).
  DynSystem sys_c = sys.kind == DynKind::shift ? sys : shift_system(Rational(1, 2));
  ObservableFn f_c = obs_cylinder_set(symbolic_event_of(sys, f), f.bound);
  Rational delta_c = delta;
  SubsequenceSchedule sched = schedule;
  SpaceId space = SpaceId::cantor;

  Rational mean = observable_mean(sys_c, f_c);
  Rational variance = mean * (Rational(1) - mean);
  // Exact partial sums to I0, then the Chebyshev tail (levels where the
  // deviation probability exceeds 1 are clamped).
  const std::size_t I0 = 8;
  Rational partial = 0;
  for (std::size_t i = 1; i < I0; ++i)
    partial += std::min<Rational>(
        deviation_level_measure(sys_c, f_c, delta_c, sched.index(i).convert_to<long>()), 1);
  // Tail: sum_{i >= I0} Var / (n_i delta^2) with n_i = i^beta.
  Rational tail =
      (variance / (delta_c * delta_c)) * tail_sum_upper(I0, unsigned(sched.beta));
  Rational sum_upper = partial + tail;

  StrongBCTest out{"deviation(delta=" + rat_to_string(delta) + ")",
                   sys_c.invariant_measure,
                   nullptr,
                   ApproxReal{},
                   0,
                   nullptr,
                   nullptr,
                   false};
  out.exact_region = [sys_c, f_c, delta_c, sched](long i) -> std::optional<Region> {
    long n = sched.index(std::size_t(i)).convert_to<long>();
    std::size_t maxlen = 1;
    for (const auto& w : f_c.cylinders.words()) maxlen = std::max(maxlen, w.size());
    if (n + long(maxlen) - 1 > 22) return std::nullopt;
    return Region(deviation_region(sys_c, f_c, delta_c, n));
  };
  out.exact_measure = [sys_c, f_c, delta_c, sched](long i) -> std::optional<Rational> {
    Int n = sched.index(std::size_t(i));
    if (n > 4096) return std::nullopt;
    return deviation_level_measure(sys_c, f_c, delta_c, n.convert_to<long>());
  };
  auto region_fn = out.exact_region;
  out.levels = [region_fn, space](long i) {
    return EffectiveOpen{space, [region_fn, i, space](long t) {
                           std::vector<IdealBall> out_balls;
                           auto region = region_fn(i);
                           if (!region) return out_balls;
                           const auto& cyl = std::get<CylinderSet>(*region);
                           std::size_t upto = std::min<std::size_t>(
                               cyl.words().size(), t < 0 ? 0 : std::size_t(t) + 1);
                           for (std::size_t w = 0; w < upto; ++w)
                             out_balls.push_back(
                                 {space, IdealPoint(cyl.words()[w]),
                                  pow2(-long(cyl.words()[w].size()))});
                           return out_balls;
                         }};
  };
  out.sum_upper = sum_upper;
  auto exact_measure = out.exact_measure;
  out.sum_oracle = {[exact_measure, variance, delta_c, sched](long p) -> Rational {
                      // Partial exact sum until the Chebyshev tail drops
                      // under 2^-(p+1).
                      Rational target = pow2(-(p + 1));
                      Rational scale = variance / (delta_c * delta_c);
                      std::size_t I = 2;
                      while (scale * tail_sum_upper(I, unsigned(sched.beta)) >= target) {
                        ++I;
                        if (I > 100000) fail(Errc::too_large, "sum oracle tail did not close");
                      }
                      Rational acc = 0;
                      for (std::size_t i = 1; i < I; ++i) {
                        auto m = exact_measure(long(i));
                        if (!m)
                          fail(Errc::too_large,
                               "sum oracle needs exact level measures beyond the horizon");
                        acc += std::min<Rational>(*m, 1);
                      }
                      return acc + scale * tail_sum_upper(I, unsigned(sched.beta)) / 2;
                    },
                    std::nullopt};
  return out;
}

// ---------------------------------------------------------------------------
// Witnessed tests and concrete non-typical points

ApproxPoint construct_failing_point(const WitnessedTest& wt, long check_levels,
                                    long stage_budget) {
  // Validate the chain: nesting, radius schedule, containment in the levels.
  std::vector<IdealBall> chain;
  for (long n = 1; n <= check_levels; ++n) {
    IdealBall b = wt.witness(n);
    if (b.radius > pow2(-n))
      fail(Errc::broken_witness_chain, "witness radius exceeds 2^-n at level " +
                                           std::to_string(n));
    if (n > 1 && !ball_contained(b, chain.back()))
      fail(Errc::broken_witness_chain, "witness nesting fails at level " + std::to_string(n));
    // B_n must sit inside some enumerated ball of A_n.
    EffectiveOpen level = wt.test.ml.levels(n);
    bool inside = false;
    for (long stage = 1; stage <= stage_budget && !inside; ++stage) {
      for (const auto& outer : level.enumerate(stage)) {
        if (ball_contained(b, outer)) {
          inside = true;
          break;
        }
      }
    }
    if (!inside)
      fail(Errc::broken_witness_chain,
           "witness ball is not certified inside level " + std::to_string(n));
    chain.push_back(b);
  }
  auto witness = wt.witness;
  SpaceId space = wt.test.ml.mu.space();
  return {space,
          [witness](long n) { return witness(n + 1).center; },
          std::nullopt, std::nullopt, std::nullopt};
}

ApproxPoint oscillating_point(int base) {
  if (base < 2) fail(Errc::bad_parameter, "block base must be at least 2");
  return point_from_bits([base](std::uint64_t i) {
    // Block j has length base^j; odd blocks are zeros, even blocks ones.
    std::uint64_t len = 1, end = 0;
    for (int j = 1; j < 64; ++j) {
      if (len > (~std::uint64_t(0)) / std::uint64_t(base)) return j % 2 == 0 ? 1 : 0;
      len *= std::uint64_t(base);
      end += len;
      if (i <= end) return j % 2 == 0 ? 1 : 0;
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------
// Built-in tests

StrongBCTest halving_intervals_test() {
  StrongBCTest t{"halving-intervals", lebesgue(), nullptr, ApproxReal{}, 0,
                 nullptr, nullptr, false};
  t.levels = [](long n) {
    return effective_open_from_balls(
        SpaceId::unit_interval,
        {{SpaceId::unit_interval, IdealPoint(pow2(-n - 1)), pow2(-n - 1)}});
  };
  t.exact_region = [](long n) -> std::optional<Region> {
    return Region(IntervalSet::open(0, pow2(-n)));
  };
  t.exact_measure = [](long n) -> std::optional<Rational> { return pow2(-n); };
  t.sum_oracle = const_real(1);
  t.sum_upper = 1;
  t.nested_levels = true;
  return t;
}

StrongBCTest ones_cylinders_test() {
  StrongBCTest t{"ones-cylinders", bernoulli(Rational(1, 2)), nullptr, ApproxReal{}, 0,
                 nullptr, nullptr, false};
  t.levels = [](long n) {
    Word w(std::size_t(n), '1');
    return effective_open_from_balls(SpaceId::cantor,
                                     {{SpaceId::cantor, IdealPoint(w), pow2(-n)}});
  };
  t.exact_region = [](long n) -> std::optional<Region> {
    return Region(CylinderSet::cylinder(Word(std::size_t(n), '1')));
  };
  t.exact_measure = [](long n) -> std::optional<Rational> { return pow2(-n); };
  t.sum_oracle = const_real(1);
  t.sum_upper = 1;
  t.nested_levels = true;
  return t;
}

StrongBCTest empty_strong_bc_test(SpaceId space) {
  StrongBCTest t{"empty", space == SpaceId::cantor ? bernoulli(Rational(1, 2)) : lebesgue(),
                 nullptr, ApproxReal{}, 0, nullptr, nullptr, false};
  t.levels = [space](long) { return effective_open_empty(space); };
  t.exact_region = [space](long) -> std::optional<Region> {
    if (space == SpaceId::cantor) return Region(CylinderSet());
    return Region(IntervalSet());
  };
  t.exact_measure = [](long) -> std::optional<Rational> { return Rational(0); };
  t.sum_oracle = const_real(0);
  t.sum_upper = 0;
  t.nested_levels = true;
  return t;
}

SchnorrTest zero_cylinder_schnorr_test() {
  SchnorrTest t{MLTest{"zero-cylinders", bernoulli(Rational(1, 2)), nullptr, nullptr, nullptr},
                nullptr};
  t.ml.levels = [](long n) {
    Word w(std::size_t(n), '0');
    return effective_open_from_balls(SpaceId::cantor,
                                     {{SpaceId::cantor, IdealPoint(w), pow2(-n)}});
  };
  t.ml.exact_region = [](long n) -> std::optional<Region> {
    return Region(CylinderSet::cylinder(Word(std::size_t(n), '0')));
  };
  t.ml.exact_measure = [](long n) -> std::optional<Rational> { return pow2(-n); };
  t.measure_oracle = [](long n) { return const_real(pow2(-n)); };
  return t;
}

SchnorrTest halving_schnorr_test() {
  StrongBCTest base = halving_intervals_test();
  SchnorrTest t{MLTest{"halving-schnorr", base.mu, nullptr, nullptr, nullptr}, nullptr};
  t.ml.levels = base.levels;
  t.ml.exact_region = base.exact_region;
  t.ml.exact_measure = base.exact_measure;
  t.measure_oracle = [](long n) { return const_real(pow2(-n)); };
  return t;
}

}  // namespace cps
