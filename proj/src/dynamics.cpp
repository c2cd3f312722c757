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

#include "cps/dynamics.hpp"

#include <algorithm>

#include "cps/errors.hpp"

namespace cps {

// ---------------------------------------------------------------------------
// Systems

DynSystem shift_system(const Rational& p) {
  return {DynKind::shift, SpaceId::cantor, bernoulli(p), p, 1, std::nullopt, std::nullopt};
}

DynSystem doubling_system() {
  return {DynKind::doubling, SpaceId::unit_interval, lebesgue(), Rational(1, 2), 1,
          std::nullopt, std::nullopt};
}

DynSystem mp_system(const Rational& s) {
  if (s <= 0 || den(s) > 4)
    fail(Errc::bad_parameter, "MP exponent must be positive with denominator <= 4");
  return {DynKind::manneville_pomeau, SpaceId::unit_interval, lebesgue(), Rational(1, 2), s,
          std::nullopt, std::nullopt};
}

DynSystem rotation_system(const ApproxReal& theta) {
  return {DynKind::rotation, SpaceId::unit_interval, lebesgue(), Rational(1, 2), 1, theta,
          std::nullopt};
}

// ---------------------------------------------------------------------------
// Observables

ObservableFn obs_cylinder(const Word& w, const Rational& M) {
  return {ObservableForm::cylinder_indicator, CylinderSet::cylinder(w), {}, {}, {}, M};
}

ObservableFn obs_cylinder_set(const CylinderSet& s, const Rational& M) {
  return {ObservableForm::cylinder_indicator, s, {}, {}, {}, M};
}

ObservableFn obs_dyadic(const Rational& lo, const Rational& hi, const Rational& M) {
  return {ObservableForm::dyadic_indicator, {}, IntervalSet::half_open(lo, hi), {}, {}, M};
}

ObservableFn obs_step(std::vector<Rational> levels, std::vector<IntervalSet> cells) {
  if (levels.size() != cells.size()) fail(Errc::bad_parameter, "levels/cells mismatch");
  Rational M = 0;
  for (const auto& r : levels) M = std::max(M, rat_abs(r));
  return {ObservableForm::step_function, {}, {}, std::move(levels), std::move(cells), M};
}

namespace {

bool is_dyadic(const Rational& q) {
  Int d = den(q);
  while (d % 2 == 0) d /= 2;
  return d == 1;
}

// Dyadic half-open interval set -> cylinder words (the binary conjugacy
// between the doubling map and the shift).
CylinderSet dyadic_region_to_cylinders(const IntervalSet& region) {
  std::vector<Word> words;
  std::function<void(const Word&, const Rational&, const Rational&)> walk =
      [&](const Word& prefix, const Rational& lo, const Rational& hi) {
        IntervalSet cell = IntervalSet::half_open(lo, hi);
        if (region.intersect(cell).length() == cell.length()) {
          words.push_back(prefix);
          return;
        }
        if (region.intersect(cell).empty()) return;
        if (prefix.size() > 40) fail(Errc::unsupported_observable, "region is not dyadic");
        Rational mid = (lo + hi) / 2;
        walk(prefix + '0', lo, mid);
        walk(prefix + '1', mid, hi);
      };
  for (const auto& s : region.segments())
    if (!is_dyadic(s.lo.x) || !is_dyadic(s.hi.x))
      fail(Errc::unsupported_observable, "interval endpoints must be dyadic");
  walk(Word(), 0, 1);
  return CylinderSet(std::move(words));
}

// The indicator observable as a cylinder set on the symbolic side; for
// doubling the conjugacy sends dyadic cells to cylinders (boundaries are
// measure zero).
CylinderSet symbolic_event(const DynSystem& sys, const ObservableFn& f) {
  if (f.form == ObservableForm::cylinder_indicator) {
    if (sys.kind != DynKind::shift)
      fail(Errc::unsupported_observable, "cylinder observables live on the shift");
    return f.cylinders;
  }
  if (f.form == ObservableForm::dyadic_indicator) {
    if (sys.kind != DynKind::doubling)
      fail(Errc::unsupported_observable, "dyadic observables live on the doubling map");
    return dyadic_region_to_cylinders(f.region);
  }
  fail(Errc::unsupported_observable, "indicator observable required here");
}

Rational bernoulli_param(const DynSystem& sys) {
  return sys.kind == DynKind::shift ? sys.shift_p : Rational(1, 2);
}

}  // namespace

CylinderSet symbolic_event_of(const DynSystem& sys, const ObservableFn& f) {
  return symbolic_event(sys, f);
}

Rational tail_sum_upper(std::size_t I, unsigned beta) {
  if (beta < 2 || I == 0) fail(Errc::bad_parameter, "tail_sum_upper needs beta >= 2, I >= 1");
  // sum_{i >= I} i^-beta <= I^-beta + I^(1-beta)/(beta-1).
  Rational ipow = Rational(1) / Rational(boost::multiprecision::pow(Int(I), beta));
  Rational ipow1 = Rational(1) / Rational(boost::multiprecision::pow(Int(I), beta - 1));
  return ipow + ipow1 / Rational(Int(beta - 1));
}

Rational observable_mean(const DynSystem& sys, const ObservableFn& f) {
  switch (f.form) {
    case ObservableForm::cylinder_indicator:
    case ObservableForm::dyadic_indicator:
      return symbolic_event(sys, f).mass(bernoulli_param(sys));
    case ObservableForm::step_function: {
      if (sys.kind != DynKind::doubling && sys.kind != DynKind::rotation &&
          sys.kind != DynKind::manneville_pomeau)
        fail(Errc::unsupported_observable, "step observables live on the interval");
      Rational acc = 0;
      for (std::size_t i = 0; i < f.step_levels.size(); ++i) {
        auto mass = sys.invariant_measure.exact_mass(f.step_cells[i]);
        if (!mass) fail(Errc::unsupported_observable, "step cells need exact masses");
        acc += f.step_levels[i] * *mass;
      }
      return acc;
    }
  }
  fail(Errc::unsupported_observable, "unknown observable form");
}

// ---------------------------------------------------------------------------
// Symbolic sliding-window counting

namespace {

struct MaskedWord {
  std::uint32_t mask = 0;
  std::uint32_t bits = 0;
  std::size_t len = 0;
};

MaskedWord compile_word(const Word& w) {
  MaskedWord m;
  m.len = w.size();
  for (char c : w) {
    m.mask = (m.mask << 1) | 1u;
    m.bits = (m.bits << 1) | (c == '1' ? 1u : 0u);
  }
  return m;
}

// Whether the point starting at offset `pos` (0-based) of the length-L
// prefix v matches any of the words.
bool match_at(std::uint32_t v, std::size_t L, std::size_t pos,
              const std::vector<MaskedWord>& words) {
  for (const auto& w : words) {
    if (pos + w.len > L) continue;  // the word would read past the prefix
    std::uint32_t seg = std::uint32_t(v >> (L - pos - w.len));
    if ((seg & w.mask) == w.bits) return true;
  }
  return false;
}

struct DeviationEnumeration {
  long L = 0;
  // histogram[s][ones] = number of length-L prefixes with S_n = s.
  std::vector<std::vector<std::uint64_t>> histogram;
};

// Enumerates all length-L prefixes and counts the sliding occurrences of
// the event among the first n shifts.
DeviationEnumeration enumerate_sums(const CylinderSet& event, long n) {
  std::size_t maxlen = 0;
  for (const auto& w : event.words()) maxlen = std::max(maxlen, w.size());
  if (maxlen == 0 && !event.empty()) maxlen = 1;  // whole space: S_n = n
  long L = n + long(maxlen) - 1;
  if (L < 1) L = 1;
  if (n < 1) fail(Errc::bad_parameter, "need n >= 1");
  if (L > 24) fail(Errc::too_large, "prefix enumeration beyond 2^24");
  std::vector<MaskedWord> words;
  for (const auto& w : event.words()) words.push_back(compile_word(w));
  DeviationEnumeration out;
  out.L = L;
  out.histogram.assign(std::size_t(n) + 1, std::vector<std::uint64_t>(std::size_t(L) + 1, 0));
  bool whole = !event.empty() && event.words().size() == 1 && event.words()[0].empty();
  for (std::uint64_t v = 0; v < (std::uint64_t(1) << L); ++v) {
    std::size_t s = 0;
    if (whole) {
      s = std::size_t(n);
    } else {
      for (long pos = 0; pos < n; ++pos)
        if (match_at(std::uint32_t(v), std::size_t(L), std::size_t(pos), words)) ++s;
    }
    std::size_t ones = std::size_t(__builtin_popcountll(v));
    ++out.histogram[s][ones];
  }
  return out;
}

Rational histogram_row_mass(const std::vector<std::uint64_t>& row, long L, const Rational& p) {
  if (p == Rational(1, 2)) {
    Int count = 0;
    for (std::uint64_t c : row) count += c;
    return Rational(count) * pow2(-L);
  }
  Rational acc = 0;
  for (std::size_t ones = 0; ones < row.size(); ++ones) {
    if (row[ones] == 0) continue;
    acc += Rational(Int(row[ones])) * pow_int(p, long(ones)) *
           pow_int(Rational(1) - p, L - long(ones));
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Correlation

Rational correlation(const DynSystem& sys, const ObservableFn& e, const ObservableFn& f, long n) {
  if (sys.kind != DynKind::shift && sys.kind != DynKind::doubling)
    fail(Errc::unsupported_observable, "exact correlations need the shift or the doubling map");
  if (n < 0) fail(Errc::bad_parameter, "negative time");
  CylinderSet ce = symbolic_event(sys, e);
  CylinderSet cf = symbolic_event(sys, f);
  Rational p = bernoulli_param(sys);
  std::size_t le = 0, lf = 0;
  for (const auto& w : ce.words()) le = std::max(le, w.size());
  for (const auto& w : cf.words()) lf = std::max(lf, w.size());
  long L = std::max<long>(n + long(le), long(lf));
  if (L < 1) L = 1;
  if (L > 24) fail(Errc::too_large, "prefix enumeration beyond 2^24");
  std::vector<MaskedWord> we, wf;
  for (const auto& w : ce.words()) we.push_back(compile_word(w));
  for (const auto& w : cf.words()) wf.push_back(compile_word(w));
  bool e_whole = !ce.empty() && ce.words().size() == 1 && ce.words()[0].empty();
  bool f_whole = !cf.empty() && cf.words().size() == 1 && cf.words()[0].empty();
  // lambda(T^-n E cap F) with weights by #ones of the prefix.
  std::vector<std::uint64_t> joint(std::size_t(L) + 1, 0);
  for (std::uint64_t v = 0; v < (std::uint64_t(1) << L); ++v) {
    bool in_e = e_whole || match_at(std::uint32_t(v), std::size_t(L), std::size_t(n), we);
    bool in_f = f_whole || match_at(std::uint32_t(v), std::size_t(L), 0, wf);
    if (in_e && in_f) ++joint[std::size_t(__builtin_popcountll(v))];
  }
  Rational joint_mass = histogram_row_mass(joint, L, p);
  return joint_mass - ce.mass(p) * cf.mass(p);
}

namespace {

// Exact length of the overlap of circle arcs [t, t+p) and [q, q+r), for
// arc lengths p, r <= 1.
Rational arc_overlap(const Rational& t, const Rational& p, const Rational& q,
                     const Rational& r) {
  Rational tt = frac_rat(t - q);  // shift so the second arc starts at 0
  // Unwrapped part [tt, min(tt+p, 1)) against [0, r).
  Rational o1 = std::min(tt + p, Rational(1));
  o1 = std::min(o1, r) - tt;
  if (o1 < 0) o1 = 0;
  // Wrapped part [0, tt+p-1) against [0, r).
  Rational o2 = 0;
  if (tt + p > 1) o2 = std::min<Rational>(tt + p - 1, r);
  return o1 + o2;
}

std::pair<Rational, Rational> interval_bounds_of(const IntervalSet& region) {
  if (region.segments().size() != 1)
    fail(Errc::unsupported_observable, "rotation correlations need single intervals");
  const auto& s = region.segments()[0];
  return {s.lo.x, s.hi.x};
}

}  // namespace

std::pair<Rational, Rational> rotation_correlation(const DynSystem& sys, const ObservableFn& e,
                                                   const ObservableFn& f, long n, long prec) {
  if (sys.kind != DynKind::rotation) fail(Errc::bad_parameter, "rotation system required");
  if (e.form != ObservableForm::dyadic_indicator || f.form != ObservableForm::dyadic_indicator)
    fail(Errc::unsupported_observable, "interval indicators required");
  auto [a1, b1] = interval_bounds_of(e.region);
  auto [a2, b2] = interval_bounds_of(f.region);
  Rational lenE = b1 - a1, lenF = b2 - a2;
  // C_n = m((E - n theta) cap F) - m(E) m(F); the left endpoint of E - n theta
  // is a1 - n theta, enclosed through the angle oracle.
  long theta_prec = prec + long(bit_length(Int(n))) + 2;
  Rational q = eval(*sys.rotation_theta, theta_prec);
  Rational err = Rational(n) * pow2(-theta_prec);
  Rational t_lo = a1 - Rational(n) * q - err;
  Rational t_hi = a1 - Rational(n) * q + err;
  // overlap(t) is 1-Lipschitz on the circle.
  Rational o_lo = arc_overlap(frac_rat(t_lo), lenE, a2, lenF);
  Rational o_hi = arc_overlap(frac_rat(t_hi), lenE, a2, lenF);
  Rational w = t_hi - t_lo;
  Rational lo = std::min(o_lo, o_hi) - w;
  Rational hi = std::max(o_lo, o_hi) + w;
  Rational base = lenE * lenF;
  return {std::max<Rational>(lo, 0) - base, std::min<Rational>(hi, std::min(lenE, lenF)) - base};
}

std::vector<MixingRow> verify_mixing(const DynSystem& sys,
                                     const std::vector<ObservableFn>& events,
                                     const CorrelationBound& bound, long n_lo, long n_hi,
                                     long prec) {
  if (bound.alpha <= 0) fail(Errc::bad_alpha, "alpha must be positive");
  std::vector<MixingRow> rows;
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t j = 0; j < events.size(); ++j) {
      for (long n = n_lo; n <= n_hi; ++n) {
        MixingRow row;
        row.i = i;
        row.j = j;
        row.n = n;
        // Upper bound of c / n^alpha via a lower bound on n^alpha.
        Rational na = pow_rat_lower(Rational(n), num(bound.alpha),
                                    unsigned(den(bound.alpha).convert_to<unsigned long>()), 40);
        row.bound_value = bound.c(i, j) / na;
        if (sys.kind == DynKind::rotation) {
          auto [lo, hi] = rotation_correlation(sys, events[i], events[j], n, prec);
          row.value_lo = lo;
          row.value_hi = hi;
          row.exact = false;
          row.expect_exact_zero = false;
          row.pass = std::max(rat_abs(lo), rat_abs(hi)) <= row.bound_value;
        } else {
          Rational c = correlation(sys, events[i], events[j], n);
          row.value_lo = row.value_hi = c;
          row.exact = true;
          std::size_t horizon = 0;
          CylinderSet cj = symbolic_event(sys, events[j]);
          for (const auto& w : cj.words()) horizon = std::max(horizon, w.size());
          row.expect_exact_zero = std::size_t(n) >= horizon;
          row.pass = rat_abs(c) <= row.bound_value;
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Deviation sets

namespace {

struct DeviationThresholds {
  // S > hi_cut or S < lo_cut lands in the deviation set.
  Rational hi_cut, lo_cut;
};

DeviationThresholds deviation_thresholds(const Rational& mean, const Rational& delta, long n) {
  return {Rational(n) * (mean + delta), Rational(n) * (mean - delta)};
}

}  // namespace

Rational deviation_measure(const DynSystem& sys, const ObservableFn& f, const Rational& delta,
                           long n, DeviationMode mode) {
  if (delta <= 0) fail(Errc::bad_delta, "delta must be positive");
  CylinderSet event = symbolic_event(sys, f);
  Rational p = bernoulli_param(sys);
  Rational mean = event.mass(p);
  if (mode == DeviationMode::exact) {
    DeviationEnumeration en = enumerate_sums(event, n);
    auto [hi_cut, lo_cut] = deviation_thresholds(mean, delta, n);
    Rational mass = 0;
    for (std::size_t s = 0; s < en.histogram.size(); ++s) {
      bool achievable = false;
      for (std::uint64_t c : en.histogram[s])
        if (c) { achievable = true; break; }
      if (!achievable) continue;
      Rational sv = Rational(Int(s));
      if (sv == hi_cut || sv == lo_cut)
        fail(Errc::bad_delta, "delta hits the achievable average " + rat_to_string(sv / n));
      if (sv > hi_cut || sv < lo_cut)
        mass += histogram_row_mass(en.histogram[s], en.L, p);
    }
    return mass;
  }
  // Chebyshev chain: (Var + 2 sum_{k<h} |C_k|) / n / delta^2, with the
  // correlation tail dropped past the exact-zero horizon for independent
  // systems, or bounded by 2 c / ((1-alpha) n^alpha) for mixing ones.
  Rational variance = mean * (Rational(1) - mean);
  std::size_t horizon = 0;
  for (const auto& w : event.words()) horizon = std::max(horizon, w.size());
  Rational corr_sum = 0;
  for (long k = 1; k < std::min<long>(n, long(horizon)); ++k)
    corr_sum += rat_abs(correlation(sys, f, f, k));
  Rational total = (variance + 2 * corr_sum) / n;
  if (sys.mixing_info) {
    const auto& mi = *sys.mixing_info;
    if (mi.alpha >= 1) fail(Errc::bad_alpha, "the chain assumes alpha < 1");
    Rational na = pow_rat_lower(Rational(n), num(mi.alpha),
                                unsigned(den(mi.alpha).convert_to<unsigned long>()), 40);
    total += 2 * mi.c(0, 0) / ((Rational(1) - mi.alpha) * na);
  }
  return total / (delta * delta);
}

CylinderSet deviation_region(const DynSystem& sys, const ObservableFn& f, const Rational& delta,
                             long n) {
  CylinderSet event = symbolic_event(sys, f);
  Rational p = bernoulli_param(sys);
  Rational mean = event.mass(p);
  std::size_t maxlen = 0;
  for (const auto& w : event.words()) maxlen = std::max(maxlen, w.size());
  if (maxlen == 0 && !event.empty()) maxlen = 1;
  long L = n + long(maxlen) - 1;
  if (L < 1) L = 1;
  if (L > 22) fail(Errc::too_large, "deviation region beyond 2^22 prefixes");
  std::vector<MaskedWord> words;
  for (const auto& w : event.words()) words.push_back(compile_word(w));
  bool whole = !event.empty() && event.words().size() == 1 && event.words()[0].empty();
  auto [hi_cut, lo_cut] = deviation_thresholds(mean, delta, n);
  std::vector<Word> out;
  for (std::uint64_t v = 0; v < (std::uint64_t(1) << L); ++v) {
    std::size_t s = 0;
    if (whole) s = std::size_t(n);
    else
      for (long pos = 0; pos < n; ++pos)
        if (match_at(std::uint32_t(v), std::size_t(L), std::size_t(pos), words)) ++s;
    Rational sv = Rational(Int(s));
    if (sv > hi_cut || sv < lo_cut) {
      Word w;
      for (long b = L - 1; b >= 0; --b) w.push_back(((v >> b) & 1) ? '1' : '0');
      out.push_back(std::move(w));
    }
  }
  return CylinderSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Schedules and the interpolation inequality

Int SubsequenceSchedule::index(std::size_t i) const {
  return boost::multiprecision::pow(Int(i), unsigned(beta));
}

Rational SubsequenceSchedule::ratio(std::size_t i) const {
  return Rational(index(i)) / Rational(index(i + 1));
}

Rational SubsequenceSchedule::tail_bound(std::size_t I) const {
  // sum_{i >= I} i^(-s) <= I^-s + I^(1-s)/(s-1) for s = alpha * beta > 1.
  Rational s = alpha * Rational(beta);
  if (s <= 1) fail(Errc::bad_alpha, "schedule tail needs alpha*beta > 1");
  unsigned q = unsigned(den(s).convert_to<unsigned long>());
  Rational i_pow_minus_s = pow_rat_upper(Rational(Int(I)), -num(s), q, 40);
  Rational i_pow_1ms = pow_rat_upper(Rational(Int(I)), den(s) - num(s), q, 40);
  return i_pow_1ms / (s - 1) + i_pow_minus_s;
}

SubsequenceSchedule make_schedule(const Rational& alpha) {
  if (alpha <= 0 || alpha >= 1) fail(Errc::bad_alpha, "need 0 < alpha < 1");
  // Least integer beta with alpha * beta > 1.
  Int b = den(alpha) / num(alpha) + 1;
  return {alpha, b.convert_to<long>()};
}

bool interpolation_gap_check(const std::vector<Rational>& values, std::size_t k, std::size_t l,
                             const Rational& beta, const Rational& M) {
  if (l == 0 || k > l || l > values.size()) fail(Errc::bad_ratio, "need k <= l <= |values|");
  Rational ratio = Rational(Int(k)) / Rational(Int(l));
  if (beta > ratio || ratio > 1 || beta <= 0) fail(Errc::bad_ratio, "need beta <= k/l <= 1");
  for (const auto& v : values)
    if (rat_abs(v) > M) fail(Errc::bad_parameter, "stream value exceeds the bound M");
  Rational sk = 0, sl = 0;
  for (std::size_t i = 0; i < l; ++i) {
    if (i < k) sk += values[i];
    sl += values[i];
  }
  Rational lhs = (k == 0 ? Rational(0) : sk / Rational(Int(k))) - sl / Rational(Int(l));
  return lhs <= 2 * (Rational(1) - beta) * M;
}

// ---------------------------------------------------------------------------
// Validated MP orbits

bool circle_contains(const CircleInterval& I, const Rational& x) {
  Rational d = frac_rat(x - I.lo);
  return d <= I.width;
}

namespace {

// Directed bounds of x^(1+s) for dyadic x >= 0 and rational s with small
// denominator: exact integer power then a directed q-th root.
Rational pow_1ps_lower(const Rational& x, const Rational& s, long bits) {
  if (x == 0) return 0;
  Int p = num(s) + den(s);
  unsigned q = unsigned(den(s).convert_to<unsigned long>());
  return pow_rat_lower(x, p, q, bits);
}

Rational pow_1ps_upper(const Rational& x, const Rational& s, long bits) {
  if (x == 0) return 0;
  Int p = num(s) + den(s);
  unsigned q = unsigned(den(s).convert_to<unsigned long>());
  return pow_rat_upper(x, p, q, bits);
}

// One validated step of T(x) = x + x^(1+s) mod 1 on an arc.
CircleInterval mp_step(const CircleInterval& I, const Rational& s, long work_bits) {
  auto lift = [&](const Rational& x, bool upper) {
    // f(x) = x + x^(1+s) evaluated with directed rounding.
    return upper ? x + pow_1ps_upper(x, s, work_bits + 4)
                 : x + pow_1ps_lower(x, s, work_bits + 4);
  };
  Rational lo = I.lo, w = I.width;
  Rational f_lo, width_out;
  if (lo + w <= 1) {
    f_lo = lift(lo, false);
    width_out = lift(lo + w, true) - f_lo;
  } else {
    // The arc wraps: [lo, 1) and [0, lo + w - 1]; T(1-) = 2 = 0 mod 1 glues
    // the two images into one arc starting at f(lo).
    f_lo = lift(lo, false);
    Rational tail = lift(lo + w - 1, true);
    width_out = (Rational(2) - f_lo) + tail;
  }
  CircleInterval out{frac_rat(dyadic_round_down(f_lo, work_bits)),
                     dyadic_round_up(width_out, work_bits) + 2 * pow2(-work_bits)};
  return out;
}

}  // namespace

MpOrbit mp_orbit_enclosure_prefix(const DynSystem& sys, const Rational& x0, long steps,
                                  long work_bits) {
  if (sys.kind != DynKind::manneville_pomeau) fail(Errc::bad_parameter, "MP system required");
  if (x0 < 0 || x0 >= 1) fail(Errc::bad_parameter, "start point must lie in [0,1)");
  MpOrbit out;
  out.enclosures.reserve(std::size_t(steps));
  CircleInterval cur{x0, 0};
  for (long i = 0; i < steps; ++i) {
    cur = mp_step(cur, sys.mp_s, work_bits);
    if (cur.width > Rational(1, 2)) {
      out.exhausted = true;
      return out;
    }
    out.enclosures.push_back(cur);
  }
  return out;
}

std::vector<CircleInterval> mp_orbit_enclosure(const DynSystem& sys, const Rational& x0,
                                               long steps, long work_bits) {
  MpOrbit orbit = mp_orbit_enclosure_prefix(sys, x0, steps, work_bits);
  if (orbit.exhausted)
    fail(Errc::precision_exhausted,
         "enclosure width passed 1/2 at step " + std::to_string(orbit.enclosures.size() + 1) +
             "; restart with higher input precision");
  return orbit.enclosures;
}

// ---------------------------------------------------------------------------
// Iteration

ApproxPoint iterate(const DynSystem& sys, const ApproxPoint& x, long n) {
  if (x.space != sys.space) fail(Errc::space_mismatch, "iterate");
  if (n < 0) fail(Errc::bad_parameter, "negative time");
  switch (sys.kind) {
    case DynKind::shift: {
      if (!x.bits) fail(Errc::bad_parameter, "shift needs a bit stream");
      auto bits = *x.bits;
      return point_from_bits([bits, n](std::uint64_t i) { return bits(i + std::uint64_t(n)); });
    }
    case DynKind::doubling: {
      if (x.exact) {
        Rational v = *x.exact;
        for (long i = 0; i < n; ++i) v = frac_rat(v * 2);
        return point_from_rational(v);
      }
      if (!x.real) fail(Errc::bad_parameter, "doubling needs an interval point");
      ApproxReal r = *x.real;
      return point_from_real(
          {[r, n](long prec) {
             // 2^n-Lipschitz, but the fractional part is only safe when the
             // enclosure of 2^n x does not straddle an integer.
             for (long extra = 1; extra <= 200; extra += 16) {
               Rational q = eval(r, prec + n + extra);
               Rational scaled = q * pow2(n);
               Rational err = pow2(-(prec + extra));  // 2^n * 2^-(prec+n+extra)
               Rational lo = scaled - err, hi = scaled + err;
               if (floor_rat(lo) == floor_rat(hi)) return frac_rat((lo + hi) / 2);
             }
             fail(Errc::precision_exhausted, "doubling orbit sits too close to a dyadic cut");
           },
           Rational(1)});
    }
    case DynKind::manneville_pomeau: {
      if (!x.exact)
        fail(Errc::bad_parameter, "MP orbits need exact rational starts (enclosure tracking)");
      Rational x0 = *x.exact;
      Rational s = sys.mp_s;
      DynSystem sys_copy = sys;
      return point_from_real(
          {[sys_copy, x0, n](long prec) {
             for (long work = prec + 16; work <= prec + 4096; work *= 2) {
               auto orbit = mp_orbit_enclosure(sys_copy, x0, n, work);
               const CircleInterval& last = orbit.back();
               if (last.width <= pow2(-prec))
                 return frac_rat(last.lo + last.width / 2);
             }
             fail(Errc::precision_exhausted, "MP orbit needs more precision headroom");
           },
           Rational(1)});
    }
    case DynKind::rotation: {
      if (!x.exact) fail(Errc::bad_parameter, "rotation starts from exact rationals here");
      Rational x0 = *x.exact;
      ApproxReal theta = *sys.rotation_theta;
      return point_from_real(
          {[x0, theta, n](long prec) {
             long tp = prec + long(bit_length(Int(n))) + 3;
             for (long extra = 0; extra <= 200; extra += 16) {
               Rational q = eval(theta, tp + extra);
               Rational err = Rational(n) * pow2(-(tp + extra));
               Rational lo = x0 + Rational(n) * q - err;
               Rational hi = x0 + Rational(n) * q + err;
               if (floor_rat(lo) == floor_rat(hi))
                 return frac_rat((lo + hi) / 2);
               // Straddling an integer: the fractional part is ambiguous.
             }
             fail(Errc::precision_exhausted, "rotation orbit sits too close to the cut");
           },
           Rational(1)});
    }
  }
  fail(Errc::bad_parameter, "unknown system");
}

// ---------------------------------------------------------------------------
// Birkhoff averages

namespace {

bool indicator_contains_rational(const ObservableFn& f, const Rational& x) {
  return f.region.contains(x);
}

}  // namespace

BirkhoffValue birkhoff_average(const DynSystem& sys, const ObservableFn& f,
                               const ApproxPoint& x, const Int& n) {
  if (n <= 0) fail(Errc::bad_parameter, "need n >= 1");
  switch (sys.kind) {
    case DynKind::shift: {
      if (!x.bits) fail(Errc::bad_parameter, "shift points need bit streams");
      if (f.form != ObservableForm::cylinder_indicator)
        fail(Errc::unsupported_observable, "shift observables are cylinder indicators");
      auto bits = *x.bits;
      std::size_t maxlen = 0;
      for (const auto& w : f.cylinders.words()) maxlen = std::max(maxlen, w.size());
      std::uint64_t N = n.convert_to<std::uint64_t>();
      Int count = 0;
      // Sliding window over the bit stream.
      Word window;
      for (std::uint64_t i = 0; i < N; ++i) {
        window.clear();
        for (std::size_t b = 0; b < maxlen; ++b)
          window.push_back(bits(i + b + 1) ? '1' : '0');
        if (f.cylinders.contains_prefix(window) ||
            (maxlen == 0 && !f.cylinders.empty()))
          ++count;
      }
      Rational avg = Rational(count) / Rational(n);
      return {avg, avg};
    }
    case DynKind::doubling: {
      if (!x.exact) fail(Errc::bad_parameter, "doubling exact mode needs a rational point");
      if (f.form != ObservableForm::dyadic_indicator && f.form != ObservableForm::step_function)
        fail(Errc::unsupported_observable, "doubling observables live on the interval");
      Rational v = *x.exact;
      Rational sum = 0;
      std::uint64_t N = n.convert_to<std::uint64_t>();
      for (std::uint64_t i = 0; i < N; ++i) {
        if (f.form == ObservableForm::dyadic_indicator) {
          if (indicator_contains_rational(f, v)) sum += 1;
        } else {
          for (std::size_t j = 0; j < f.step_levels.size(); ++j)
            if (f.step_cells[j].contains(v)) sum += f.step_levels[j];
        }
        v = frac_rat(v * 2);
      }
      Rational avg = sum / Rational(n);
      return {avg, avg};
    }
    case DynKind::manneville_pomeau: {
      if (!x.exact) fail(Errc::bad_parameter, "MP exact starts only");
      std::uint64_t N = n.convert_to<std::uint64_t>();
      auto orbit = mp_orbit_enclosure(sys, *x.exact, long(N) - 1, 320);
      // Ambiguous cells (enclosure straddling a boundary) widen the value.
      Rational lo = 0, hi = 0;
      auto add_point = [&](const CircleInterval& I) {
        if (f.form != ObservableForm::dyadic_indicator)
          fail(Errc::unsupported_observable, "MP averages take interval indicators");
        auto [a, b] = interval_bounds_of(f.region);
        bool in_lo = circle_contains(I, a) || circle_contains(I, b);
        // Fully inside iff both enclosure endpoints are in [a, b).
        Rational left = I.lo, right = frac_rat(I.lo + I.width);
        bool fully = !in_lo && f.region.contains(left) && f.region.contains(right) &&
                     I.width <= b - a;
        bool partially = in_lo || f.region.contains(left) || f.region.contains(right);
        if (fully) { lo += 1; hi += 1; }
        else if (partially) hi += 1;
      };
      add_point({*x.exact, 0});
      for (const auto& I : orbit) add_point(I);
      return {lo / Rational(n), hi / Rational(n)};
    }
    case DynKind::rotation: {
      if (!x.exact) fail(Errc::bad_parameter, "rotation exact starts only");
      if (f.form != ObservableForm::dyadic_indicator)
        fail(Errc::unsupported_observable, "rotation averages take interval indicators");
      std::uint64_t N = n.convert_to<std::uint64_t>();
      long prec = 24 + long(bit_length(n));
      Rational q = eval(*sys.rotation_theta, prec);
      Rational err = Rational(n) * pow2(-prec);
      Rational lo = 0, hi = 0;
      Rational v = *x.exact;
      auto [a, b] = interval_bounds_of(f.region);
      for (std::uint64_t i = 0; i < N; ++i) {
        Rational p_lo = frac_rat(v - err), width = 2 * err;
        CircleInterval I{p_lo, width};
        bool fully = f.region.contains(frac_rat(v)) && !circle_contains(I, a) &&
                     !circle_contains(I, b);
        bool partially = fully || f.region.contains(frac_rat(v)) || circle_contains(I, a) ||
                         circle_contains(I, b);
        if (fully) { lo += 1; hi += 1; }
        else if (partially) hi += 1;
        v = v + q;
      }
      return {lo / Rational(n), hi / Rational(n)};
    }
  }
  fail(Errc::bad_parameter, "unknown system");
}

// ---------------------------------------------------------------------------
// Step approximation

namespace {

Morphism morphism_affine(const Rational& offset, const Rational& scale) {
  if (scale <= 0) fail(Errc::bad_parameter, "affine scale must be positive");
  long lip_bits = long(bit_length(ceil_rat(std::max(scale, Rational(1) / scale))));
  return {SpaceId::unit_interval, SpaceId::unit_interval,
          "affine",
          [offset, scale](const IdealPoint& p, long) {
            Rational y = offset + scale * std::get<Rational>(p);
            if (y < 0) y = 0;
            if (y > 1) y = 1;
            return IdealPoint(y);
          },
          [offset, scale](const std::vector<IdealBall>& balls, long) {
            std::vector<IdealBall> out;
            for (const auto& b : balls) {
              Rational lo = (std::get<Rational>(b.center) - b.radius - offset) / scale;
              Rational hi = (std::get<Rational>(b.center) + b.radius - offset) / scale;
              if (auto clipped = interval_ball_clipped(lo, hi)) out.push_back(*clipped);
            }
            return out;
          },
          [lip_bits](long nn) { return nn + lip_bits + 1; }};
}

// Certifies mu({point}) = 0 by shrinking closed intervals with certified
// upper bounds below 2^-k (same trace shape as the thirds search).
ZeroMeasureTrace certify_point_mass_zero(const ComputableMeasure& mu, const Rational& point,
                                         std::size_t depth, long budget) {
  ZeroMeasureTrace trace;
  Rational w0 = Rational(1, 4);
  trace.intervals.push_back({std::max<Rational>(point - w0, 0),
                             std::min<Rational>(point + w0, 1)});
  trace.upper_bounds.push_back(upper_closed_interval(mu, trace.intervals[0].first,
                                                     trace.intervals[0].second, 3));
  if (trace.upper_bounds[0] >= 2)
    fail(Errc::precision_stall, "mass bound did not start below 2");
  for (std::size_t k = 1; k <= depth; ++k) {
    Rational w = w0 * pow_int(Rational(1, 3), long(k));
    Rational a = std::max<Rational>(point - w, 0);
    Rational b = std::min<Rational>(point + w, 1);
    bool done = false;
    for (long round = 0; round < budget; ++round) {
      Rational upper = upper_closed_interval(mu, a, b, long(k) + 2 + round);
      if (upper < pow2(1 - long(k))) {
        trace.intervals.push_back({a, b});
        trace.upper_bounds.push_back(upper);
        done = true;
        break;
      }
    }
    if (!done)
      fail(Errc::precision_stall,
           "cannot certify zero mass at " + rat_to_string(point) +
               " (level " + std::to_string(k) + ")");
  }
  return trace;
}

}  // namespace

StepApproximation step_approx(const StepTarget& f, const ComputableMeasure& mu,
                              const Rational& epsilon, long stage_budget) {
  if (epsilon <= 0) fail(Errc::bad_parameter, "epsilon must be positive");
  // Pushforward of mu under f, rescaled to [0,1] via y -> (y + M) / 2M.
  Rational M;
  ComputableMeasure nu = lebesgue();  // placeholder, reassigned below
  if (const ObservableFn* obs = std::get_if<ObservableFn>(&f)) {
    M = obs->bound;
    if (M <= 0) fail(Errc::bad_parameter, "observable bound must be positive");
    // Indicator / step pushforward is purely atomic with exact weights.
    std::vector<std::pair<Rational, Rational>> atoms;
    if (obs->form == ObservableForm::step_function) {
      Rational rest = 1;
      for (std::size_t i = 0; i < obs->step_levels.size(); ++i) {
        auto mass = mu.exact_mass(obs->step_cells[i]);
        if (!mass) fail(Errc::unsupported_observable, "step cells need exact masses");
        if (*mass > 0) atoms.push_back({(obs->step_levels[i] + M) / (2 * M), *mass});
        rest -= *mass;
      }
      if (rest > 0) atoms.push_back({(Rational(0) + M) / (2 * M), rest});
    } else {
      std::optional<Rational> mass;
      if (obs->form == ObservableForm::dyadic_indicator) mass = mu.exact_mass(obs->region);
      else mass = mu.exact_mass(obs->cylinders);
      if (!mass) fail(Errc::unsupported_observable, "indicator needs an exact event mass");
      if (*mass > 0) atoms.push_back({(Rational(1) + M) / (2 * M), *mass});
      if (*mass < 1) atoms.push_back({(Rational(0) + M) / (2 * M), 1 - *mass});
    }
    nu = atomic_mixture(std::move(atoms), std::nullopt, 1);
  } else {
    M = std::get<IdentityObservable>(f).bound;
    if (M <= 0) fail(Errc::bad_parameter, "bound must be positive");
    if (mu.space() != SpaceId::unit_interval)
      fail(Errc::unsupported_observable, "identity target needs an interval measure");
    // y = (x + M) / 2M.
    nu = pushforward(mu, morphism_affine(M / (2 * M), Rational(1) / (2 * M)));
  }

  StepApproximation out;
  out.epsilon = epsilon;
  out.bound = M;
  auto rescale_back = [&](const Rational& y) { return y * 2 * M - M; };

  // Endpoints first: r_1 = -M and r_k = M, certified zero pushforward mass.
  ZeroMeasureTrace left = certify_point_mass_zero(nu, 0, 10, stage_budget);
  out.levels.push_back(const_real(-M));
  out.level_values.push_back(-M);
  out.certificates.push_back(std::move(left));

  if (epsilon <= 2 * M) {
    std::size_t cells = std::size_t(ceil_rat(4 * M / epsilon).convert_to<unsigned long>()) + 1;
    Rational h = 2 * M / Rational(Int(cells));
    for (std::size_t j = 0; j < cells; ++j) {
      Rational lo = (Rational(Int(j)) * h) / (2 * M);        // rescaled cell bounds
      Rational hi = (Rational(Int(j + 1)) * h) / (2 * M);
      // Skip the edge cells (the endpoints already cover them within h).
      if (j == 0 || j + 1 == cells) continue;
      ZeroMeasurePoint zp = find_zero_measure_point(nu, lo, hi, stage_budget);
      zp.extend(10);
      Rational y = eval(zp.value, 30);
      out.levels.push_back(combine(CombineOp::add,
                                   {combine(CombineOp::mul,
                                            {zp.value, const_real(2 * M)}),
                                    const_real(-M)}));
      out.level_values.push_back(rescale_back(y));
      out.certificates.push_back(zp.trace());
    }
  }

  ZeroMeasureTrace right = certify_point_mass_zero(nu, 1, 10, stage_budget);
  out.levels.push_back(const_real(M));
  out.level_values.push_back(M);
  out.certificates.push_back(std::move(right));

  // Gaps must come out strictly below epsilon.
  for (std::size_t i = 0; i + 1 < out.level_values.size(); ++i) {
    if (out.level_values[i + 1] - out.level_values[i] >= epsilon &&
        epsilon <= 2 * M)
      fail(Errc::precision_stall, "level gap failed to close under epsilon");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Typicality experiments

BirkhoffReport typicality_experiment(const DynSystem& sys, const ApproxPoint& x,
                                     const ObservableFn& f, const SubsequenceSchedule& schedule,
                                     std::size_t max_i, std::size_t dense_upto) {
  BirkhoffReport report;
  report.mean = observable_mean(sys, f);
  std::vector<std::pair<Int, bool>> ns;  // (n, on_schedule)
  for (std::size_t i = 1; i <= max_i; ++i) ns.push_back({schedule.index(i), true});
  for (std::size_t n = 1; n <= dense_upto; ++n) ns.push_back({Int(n), false});
  std::sort(ns.begin(), ns.end());
  // Merge duplicates, keeping the schedule flag.
  std::vector<std::pair<Int, bool>> merged;
  for (auto& [n, flag] : ns) {
    if (!merged.empty() && merged.back().first == n) merged.back().second |= flag;
    else merged.push_back({n, flag});
  }

  if (sys.kind == DynKind::shift) {
    // One streaming pass with checkpoints (recomputation would be
    // quadratic in the largest n).
    if (!x.bits) fail(Errc::bad_parameter, "shift points need bit streams");
    auto bits = *x.bits;
    std::size_t maxlen = 0;
    for (const auto& w : f.cylinders.words()) maxlen = std::max(maxlen, w.size());
    std::uint64_t cap = merged.back().first.convert_to<std::uint64_t>();
    Int count = 0;
    std::size_t next = 0;
    Word window;
    for (std::uint64_t i = 0; i < cap && next < merged.size(); ++i) {
      window.clear();
      for (std::size_t b = 0; b < maxlen; ++b)
        window.push_back(bits(i + b + 1) ? '1' : '0');
      if (f.cylinders.contains_prefix(window) || (maxlen == 0 && !f.cylinders.empty()))
        ++count;
      while (next < merged.size() && merged[next].first == Int(i + 1)) {
        Rational avg = Rational(count) / Rational(Int(i + 1));
        report.rows.push_back({Int(i + 1), avg, avg, true, report.mean,
                               rat_abs(avg - report.mean), merged[next].second});
        ++next;
      }
    }
  } else {
    for (const auto& [n, flag] : merged) {
      BirkhoffValue v = birkhoff_average(sys, f, x, n);
      Rational dev = std::max(rat_abs(v.lo - report.mean), rat_abs(v.hi - report.mean));
      report.rows.push_back({n, v.lo, v.hi, v.exact(), report.mean, dev, flag});
    }
  }

  // Window oscillation over the schedule samples (certified via enclosures:
  // max of lows minus min of highs would under-report, so use outer bounds).
  bool any = false;
  Rational max_lo = 0, min_hi = 0;
  for (const auto& row : report.rows) {
    if (!row.on_schedule) continue;
    if (!any) {
      max_lo = row.avg_lo;
      min_hi = row.avg_hi;
      any = true;
    } else {
      max_lo = std::max(max_lo, row.avg_lo);
      min_hi = std::min(min_hi, row.avg_hi);
    }
  }
  report.window_oscillation = any ? std::max<Rational>(max_lo - min_hi, 0) : Rational(0);
  return report;
}

}  // namespace cps
