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

#include "oracles.hpp"

#include <mpfr.h>

#include <algorithm>
#include <map>

namespace cps::oracles {

std::pair<Rational, Rational> bisect_sqrt(const Rational& k, int digits) {
  Rational lo = 0, hi = std::max<Rational>(k, 1);
  Rational tol(1, boost::multiprecision::pow(Int(10), unsigned(digits)));
  while (hi - lo > tol) {
    Rational mid = (lo + hi) / 2;
    if (mid * mid <= k) lo = mid;
    else hi = mid;
  }
  return {lo, hi};
}

Word long_division_bits(const Rational& x, int k) {
  Int n = num(x), d = den(x);
  Word out;
  for (int i = 0; i < k; ++i) {
    n *= 2;
    if (n >= d) {
      out.push_back('1');
      n -= d;
    } else {
      out.push_back('0');
    }
  }
  return out;
}

Rational shift_intersection_mass(const Word& w1, long n, const Word& w2, const Rational& p) {
  // Positions n+1 .. n+|w1| must equal w1; positions 1 .. |w2| must equal w2.
  std::map<long, char> constraint;
  for (std::size_t i = 0; i < w2.size(); ++i) constraint[long(i) + 1] = w2[i];
  for (std::size_t i = 0; i < w1.size(); ++i) {
    long pos = n + long(i) + 1;
    auto it = constraint.find(pos);
    if (it != constraint.end() && it->second != w1[i]) return 0;
    constraint[pos] = w1[i];
  }
  Rational mass = 1;
  for (const auto& [pos, c] : constraint) mass *= (c == '1') ? p : Rational(1) - p;
  return mass;
}

Rational shift_correlation(const Word& w1, const Word& w2, long n, const Rational& p) {
  Rational joint = shift_intersection_mass(w1, n, w2, p);
  return joint - cylinder_mass(w1, p) * cylinder_mass(w2, p);
}

Int binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  Int r = 1;
  for (unsigned i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

Rational binomial_deviation_mass(unsigned n, const Rational& delta) {
  Rational mass = 0;
  for (unsigned s = 0; s <= n; ++s) {
    Rational avg = Rational(Int(s), Int(n));
    if (rat_abs(avg - Rational(1, 2)) > delta)
      mass += Rational(binomial(n, s), Int(1) << n);
  }
  return mass;
}

namespace {

// Direct check of "mu(A) <= nu(A^eps) + eps for every A", with the
// enlargement read as closed (d <= eps) to capture the infimum value.
bool condition_holds(const FiniteMeasure& mu, const FiniteMeasure& nu, const Rational& eps) {
  std::size_t m = mu.atoms.size();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    Rational mu_a = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) mu_a += mu.atoms[i].second;
    Rational nu_enl = 0;
    for (const auto& [q, w] : nu.atoms) {
      for (std::size_t i = 0; i < m; ++i) {
        if ((mask & (1u << i)) && ideal_distance(q, mu.atoms[i].first) <= eps) {
          nu_enl += w;
          break;
        }
      }
    }
    if (mu_a > nu_enl + eps) return false;
  }
  return true;
}

}  // namespace

Rational prokhorov_candidate_scan(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  std::vector<Rational> candidates{0};
  for (const auto& [p, wp] : mu.atoms)
    for (const auto& [q, wq] : nu.atoms) candidates.push_back(ideal_distance(p, q));
  // All subset-weight differences mu(S) - nu(T).
  std::vector<Rational> mu_sums{0}, nu_sums{0};
  for (std::uint32_t mask = 1; mask < (1u << mu.atoms.size()); ++mask) {
    Rational s = 0;
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
      if (mask & (1u << i)) s += mu.atoms[i].second;
    mu_sums.push_back(s);
  }
  for (std::uint32_t mask = 1; mask < (1u << nu.atoms.size()); ++mask) {
    Rational s = 0;
    for (std::size_t j = 0; j < nu.atoms.size(); ++j)
      if (mask & (1u << j)) s += nu.atoms[j].second;
    nu_sums.push_back(s);
  }
  for (const auto& a : mu_sums)
    for (const auto& b : nu_sums)
      if (a - b > 0) candidates.push_back(a - b);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const auto& eps : candidates)
    if (condition_holds(mu, nu, eps)) return eps;
  return 1;
}

std::vector<Rational> mp_reference_orbit(const Rational& x0, int steps, int bits) {
  mpfr_t x, t;
  mpfr_init2(x, mpfr_prec_t(bits));
  mpfr_init2(t, mpfr_prec_t(bits));
  mpfr_set_str(t, num(x0).str().c_str(), 10, MPFR_RNDN);
  mpfr_set(x, t, MPFR_RNDN);
  mpfr_set_str(t, den(x0).str().c_str(), 10, MPFR_RNDN);
  mpfr_div(x, x, t, MPFR_RNDN);
  std::vector<Rational> orbit;
  orbit.reserve(std::size_t(steps));
  for (int i = 0; i < steps; ++i) {
    mpfr_sqr(t, x, MPFR_RNDN);
    mpfr_add(x, x, t, MPFR_RNDN);
    if (mpfr_cmp_ui(x, 1) >= 0) mpfr_sub_ui(x, x, 1, MPFR_RNDN);
    // Exact readback: x = m * 2^e with integer m.
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 2, 0, x, MPFR_RNDN);
    std::string digits(s);
    mpfr_free_str(s);
    bool neg = !digits.empty() && digits[0] == '-';
    if (neg) digits = digits.substr(1);
    Int m = 0;
    for (char c : digits) m = m * 2 + (c - '0');
    long shift = long(e) - long(digits.size());
    Rational v(m);
    if (shift >= 0) v *= pow2(shift);
    else v /= pow2(-shift);
    orbit.push_back(neg ? -v : v);
  }
  mpfr_clear(x);
  mpfr_clear(t);
  return orbit;
}

std::pair<Int, Int> oscillating_block_end(int base, int block) {
  Int length = 0, ones = 0, blen = 1;
  for (int i = 1; i <= block; ++i) {
    blen *= base;
    length += blen;
    if (i % 2 == 0) ones += blen;
  }
  return {length, ones};
}

Rational tail_partial_sum_lower(std::uint64_t I, unsigned p, unsigned q, std::uint64_t terms) {
  // i^(-p/q) >= 2^m / (r+1) where r = floor((i^p 4^(m q/2))^(1/q)) ... use
  // r = iroot_floor(i^p * 2^(m q)), giving i^(p/q) <= (r+1) / 2^m.
  const long m = 24;
  Int acc = 0;  // scaled by 2^48
  for (std::uint64_t i = I; i < I + terms; ++i) {
    Int ip = boost::multiprecision::pow(Int(i), p);
    Int r = iroot_floor(ip << (unsigned(m) * q), q);
    // term >= 2^m / (r+1); accumulate floor(2^48 * 2^m / (r+1)).
    acc += (Int(1) << (48 + m)) / (r + 1);
  }
  return Rational(acc, Int(1) << 48);
}

Rational piecewise_halves_cdf(const Rational& x) {
  if (x <= Rational(1, 2)) return Rational(3, 2) * x;
  return Rational(3, 4) + (x - Rational(1, 2)) / 2;
}

Rational piecewise_halves_quantile(const Rational& y) {
  if (y <= Rational(3, 4)) return y * 2 / 3;
  return Rational(1, 2) + (y - Rational(3, 4)) * 2;
}

Rational lebesgue_mass(const Rational& a, const Rational& b) { return b - a; }

Rational half_atom_half_lebesgue_mass(const Rational& a, const Rational& b) {
  Rational m = (b - a) / 2;
  if (a <= Rational(1, 2) && Rational(1, 2) <= b) m += Rational(1, 2);
  return m;
}

bool replay_zero_trace(const ZeroMeasureTrace& trace,
                       Rational (*closed_mass)(const Rational&, const Rational&)) {
  if (trace.intervals.empty()) return false;
  for (std::size_t k = 0; k < trace.intervals.size(); ++k) {
    auto [a, b] = trace.intervals[k];
    if (a >= b) return false;
    if (trace.upper_bounds[k] >= pow2(1 - long(k))) return false;
    if (closed_mass(a, b) > trace.upper_bounds[k]) return false;
    if (k > 0) {
      auto [pa, pb] = trace.intervals[k - 1];
      if (a < pa || b > pb) return false;
      if ((b - a) * 3 != pb - pa) return false;
      // The chosen interval must be one of the two candidate thirds.
      if (a != pa && b != pb) return false;
    }
  }
  return true;
}

}  // namespace cps::oracles
