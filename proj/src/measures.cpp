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

#include "cps/measures.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <mutex>

#include "cps/errors.hpp"

namespace cps {

// ---------------------------------------------------------------------------
// FiniteMeasure

FiniteMeasure make_finite_measure(SpaceId space,
                                  std::vector<std::pair<IdealPoint, Rational>> atoms) {
  std::map<std::string, std::pair<IdealPoint, Rational>> merged;
  Rational total = 0;
  for (auto& [p, w] : atoms) {
    if (point_space(p) != space) fail(Errc::space_mismatch, "finite measure atom");
    if (w < 0) fail(Errc::bad_parameter, "negative atom weight");
    if (w == 0) continue;
    total += w;
    auto key = point_to_string(p);
    auto it = merged.find(key);
    if (it == merged.end()) merged.emplace(key, std::make_pair(p, w));
    else it->second.second += w;
  }
  if (total != 1) fail(Errc::bad_parameter, "atom weights must sum to 1 exactly");
  FiniteMeasure out{space, {}};
  out.atoms.reserve(merged.size());
  for (auto& [key, pw] : merged) out.atoms.push_back(std::move(pw));
  return out;
}

// ---------------------------------------------------------------------------
// Kernel interface

class ComputableMeasure::Kernel {
 public:
  virtual ~Kernel() = default;
  virtual SpaceId space() const = 0;
  virtual const std::string& name() const = 0;
  virtual FiniteMeasure prokhorov_approx(long n) const = 0;
  virtual Rational lower_union(const std::vector<IdealBall>& balls, long stage) const = 0;
  virtual std::optional<Rational> upper_union(const std::vector<IdealBall>&, long) const {
    return std::nullopt;
  }
  virtual AtomFlag atom_flag() const = 0;
  virtual std::vector<IdealPoint> known_atoms() const { return {}; }
  virtual std::optional<Rational> mass_interval(const IntervalSet&) const { return std::nullopt; }
  virtual std::optional<Rational> mass_cylinder(const CylinderSet&) const { return std::nullopt; }
  virtual std::optional<Rational> density_sup() const { return std::nullopt; }
  // True when prokhorov_approx(n) assigns the mass of each dyadic cell
  // [j 2^-(n+1), (j+1) 2^-(n+1)) to a representative inside the cell; the
  // binary-expansion and doubling pushforwards rely on this.
  virtual bool aligned_dyadic_approx() const { return false; }
};

ComputableMeasure::ComputableMeasure(std::shared_ptr<const Kernel> kernel)
    : kernel_(std::move(kernel)) {}

SpaceId ComputableMeasure::space() const { return kernel_->space(); }
const std::string& ComputableMeasure::name() const { return kernel_->name(); }
FiniteMeasure ComputableMeasure::prokhorov_approx(long n) const {
  return kernel_->prokhorov_approx(n);
}
Rational ComputableMeasure::lower_union(const std::vector<IdealBall>& balls, long stage) const {
  return kernel_->lower_union(balls, stage);
}
AtomFlag ComputableMeasure::atom_flag() const { return kernel_->atom_flag(); }
std::vector<IdealPoint> ComputableMeasure::known_atoms() const { return kernel_->known_atoms(); }
std::optional<Rational> ComputableMeasure::exact_mass(const IntervalSet& r) const {
  return kernel_->mass_interval(r);
}
std::optional<Rational> ComputableMeasure::exact_mass(const CylinderSet& r) const {
  return kernel_->mass_cylinder(r);
}
std::optional<Rational> ComputableMeasure::density_sup() const { return kernel_->density_sup(); }

// ---------------------------------------------------------------------------
// Ball/region conversions

namespace {

IntervalSet balls_to_interval_region(const std::vector<IdealBall>& balls) {
  IntervalSet out;
  for (const auto& b : balls) {
    const Rational& c = std::get<Rational>(b.center);
    out = out.unite(IntervalSet::open(c - b.radius, c + b.radius));
  }
  return out.intersect(IntervalSet::full());
}

// Attained min/max of d(center, y) over y in the cylinder [prefix]; the
// center is an ultimately-0 ideal word.
std::pair<Rational, Rational> cylinder_distance_range(const Word& prefix, const Word& center) {
  Rational fixed = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char cc = i < center.size() ? center[i] : '0';
    if (prefix[i] != cc) fixed += pow2(-long(i + 1));
  }
  return {fixed, fixed + pow2(-long(prefix.size()))};
}

// Cylinders of depth <= depth certified inside (inner) or outside (outer)
// the union of the balls.
void cantor_ball_cylinders(const std::vector<IdealBall>& balls, long depth, bool inner,
                           std::vector<Word>& out, const Word& prefix = Word()) {
  bool fully_in_some = false;
  bool maybe_meets_some = false;
  for (const auto& b : balls) {
    auto [dmin, dmax] = cylinder_distance_range(prefix, std::get<Word>(b.center));
    if (dmax < b.radius) fully_in_some = true;
    if (dmin < b.radius) maybe_meets_some = true;
  }
  if (inner) {
    if (fully_in_some) { out.push_back(prefix); return; }
    if (!maybe_meets_some) return;  // disjoint from every ball
  } else {
    if (!maybe_meets_some) { out.push_back(prefix); return; }
    if (fully_in_some) return;
  }
  if (long(prefix.size()) >= depth) return;
  cantor_ball_cylinders(balls, depth, inner, out, prefix + '0');
  cantor_ball_cylinders(balls, depth, inner, out, prefix + '1');
}

CylinderSet cantor_inner(const std::vector<IdealBall>& balls, long depth) {
  std::vector<Word> ws;
  cantor_ball_cylinders(balls, depth, true, ws);
  return CylinderSet(std::move(ws));
}

CylinderSet cantor_outer(const std::vector<IdealBall>& balls, long depth) {
  std::vector<Word> ws;
  cantor_ball_cylinders(balls, depth, false, ws);
  return CylinderSet(std::move(ws));
}

Rational clamp_unit(const Rational& q) {
  if (q < 0) return Rational(0);
  if (q > 1) return Rational(1);
  return q;
}

void push_open_interval_ball(const Rational& lo, const Rational& hi,
                             std::vector<IdealBall>& out) {
  if (auto b = interval_ball_clipped(lo, hi)) out.push_back(*b);
}

}  // namespace

// Balls denote B(c,r) truncated to the carrier, so the clipped pieces stay
// expressible as balls with in-carrier centers.
std::optional<IdealBall> interval_ball_clipped(const Rational& lo, const Rational& hi) {
  if (hi <= lo || hi <= 0 || lo >= 1) return std::nullopt;
  if (lo < 0 && hi > 1)
    return IdealBall{SpaceId::unit_interval, IdealPoint(Rational(1, 2)), Rational(3, 4)};
  if (lo < 0) return IdealBall{SpaceId::unit_interval, IdealPoint(Rational(0)), hi};
  if (hi > 1) return IdealBall{SpaceId::unit_interval, IdealPoint(Rational(1)), 1 - lo};
  return IdealBall{SpaceId::unit_interval, IdealPoint((lo + hi) / 2), (hi - lo) / 2};
}

// ---------------------------------------------------------------------------
// CDF kernel: piecewise density c0 + c1 x plus rational atoms on [0,1].

namespace {

class CdfKernel : public ComputableMeasure::Kernel {
 public:
  CdfKernel(std::vector<DensityPiece> pieces, std::vector<std::pair<Rational, Rational>> atoms,
            std::string name)
      : pieces_(std::move(pieces)), atoms_(std::move(atoms)), name_(std::move(name)) {
    std::sort(pieces_.begin(), pieces_.end(),
              [](const DensityPiece& a, const DensityPiece& b) { return a.lo < b.lo; });
    Rational cursor = 0;
    for (const auto& p : pieces_) {
      if (p.lo != cursor || p.hi <= p.lo) fail(Errc::bad_parameter, "pieces must tile [0,1]");
      cursor = p.hi;
    }
    if (!pieces_.empty() && cursor != 1) fail(Errc::bad_parameter, "pieces must end at 1");
    std::sort(atoms_.begin(), atoms_.end());
    Rational total = continuous_cdf(1);
    for (const auto& [p, w] : atoms_) {
      if (w <= 0 || p < 0 || p > 1) fail(Errc::bad_parameter, "bad atom");
      total += w;
    }
    if (total != 1) fail(Errc::bad_parameter, "total mass must be exactly 1");
    for (const auto& p : pieces_) {
      // Density must be non-negative across the piece (linear: check ends).
      if (p.c0 + p.c1 * p.lo < 0 || p.c0 + p.c1 * p.hi < 0)
        fail(Errc::bad_parameter, "negative density");
    }
  }

  SpaceId space() const override { return SpaceId::unit_interval; }
  const std::string& name() const override { return name_; }

  Rational continuous_cdf(const Rational& x) const {
    Rational acc = 0;
    for (const auto& p : pieces_) {
      if (x <= p.lo) break;
      Rational hi = std::min(x, p.hi);
      acc += p.c0 * (hi - p.lo) + p.c1 * (hi * hi - p.lo * p.lo) / 2;
    }
    return acc;
  }

  Rational region_mass(const IntervalSet& r) const {
    Rational acc = 0;
    for (const auto& s : r.segments())
      acc += continuous_cdf(clamp_unit(s.hi.x)) - continuous_cdf(clamp_unit(s.lo.x));
    for (const auto& [p, w] : atoms_)
      if (r.contains(p)) acc += w;
    return acc;
  }

  FiniteMeasure prokhorov_approx(long n) const override {
    if (n < 0) n = 0;
    if (n > 20) fail(Errc::too_large, "interval approximant beyond 2^21 atoms");
    // Dyadic cells of width 2^-(n+1); continuous cell mass sits on the
    // non-dyadic representative one third before the right edge, so the
    // in-cell displacement is at most (2/3) 2^-(n+1) < 2^-n.
    long cells_log = n + 1;
    Rational w = pow2(-cells_log);
    std::vector<std::pair<IdealPoint, Rational>> atoms;
    Rational left = 0;
    Rational cdf_left = 0;
    Int cell_count = Int(1) << cells_log;
    for (Int j = 0; j < cell_count; ++j) {
      Rational right = left + w;
      Rational cdf_right = continuous_cdf(right);
      Rational mass = cdf_right - cdf_left;
      if (mass > 0) atoms.push_back({IdealPoint(left + w * 2 / 3), mass});
      left = right;
      cdf_left = cdf_right;
    }
    for (const auto& [p, wt] : atoms_) atoms.push_back({IdealPoint(p), wt});
    return make_finite_measure(SpaceId::unit_interval, std::move(atoms));
  }

  Rational lower_union(const std::vector<IdealBall>& balls, long) const override {
    return region_mass(balls_to_interval_region(balls));
  }
  std::optional<Rational> upper_union(const std::vector<IdealBall>& balls, long) const override {
    return region_mass(balls_to_interval_region(balls));
  }
  AtomFlag atom_flag() const override {
    return atoms_.empty() ? AtomFlag::non_atomic : AtomFlag::atomic;
  }
  std::vector<IdealPoint> known_atoms() const override {
    std::vector<IdealPoint> out;
    for (const auto& [p, w] : atoms_) out.push_back(p);
    return out;
  }
  std::optional<Rational> mass_interval(const IntervalSet& r) const override {
    return region_mass(r);
  }
  std::optional<Rational> density_sup() const override {
    Rational sup = 0;
    for (const auto& p : pieces_) {
      sup = std::max(sup, Rational(p.c0 + p.c1 * p.lo));
      sup = std::max(sup, Rational(p.c0 + p.c1 * p.hi));
    }
    return sup;
  }
  bool aligned_dyadic_approx() const override { return true; }

 private:
  std::vector<DensityPiece> pieces_;
  std::vector<std::pair<Rational, Rational>> atoms_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Bernoulli kernel on the Cantor space.

class BernoulliKernel : public ComputableMeasure::Kernel {
 public:
  BernoulliKernel(const Rational& p, std::string name) : p_(p), name_(std::move(name)) {
    if (p < 0 || p > 1) fail(Errc::bad_parameter, "bernoulli parameter outside [0,1]");
  }

  SpaceId space() const override { return SpaceId::cantor; }
  const std::string& name() const override { return name_; }

  FiniteMeasure prokhorov_approx(long n) const override {
    if (n < 0) n = 0;
    if (n > 22) fail(Errc::too_large, "cantor approximant beyond 2^23 atoms");
    long len = n + 1;
    std::vector<std::pair<IdealPoint, Rational>> atoms;
    for (std::uint64_t v = 0; v < (std::uint64_t(1) << len); ++v) {
      Word w;
      w.reserve(std::size_t(len));
      for (long i = len - 1; i >= 0; --i) w.push_back(((v >> i) & 1) ? '1' : '0');
      Rational m = cylinder_mass(w, p_);
      if (m > 0) atoms.push_back({IdealPoint(w), m});
    }
    return make_finite_measure(SpaceId::cantor, std::move(atoms));
  }

  Rational lower_union(const std::vector<IdealBall>& balls, long stage) const override {
    long depth = std::clamp<long>(stage, 0, 26);
    return cantor_inner(balls, depth).mass(p_);
  }
  std::optional<Rational> upper_union(const std::vector<IdealBall>& balls,
                                      long stage) const override {
    long depth = std::clamp<long>(stage, 0, 26);
    return Rational(1) - cantor_outer(balls, depth).mass(p_);
  }
  AtomFlag atom_flag() const override {
    return (p_ == 0 || p_ == 1) ? AtomFlag::atomic : AtomFlag::non_atomic;
  }
  std::optional<Rational> mass_cylinder(const CylinderSet& r) const override {
    return r.mass(p_);
  }

 private:
  Rational p_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Mixture kernel: blend * discrete + (1-blend) * continuous, on [0,1].

class MixtureKernel : public ComputableMeasure::Kernel {
 public:
  MixtureKernel(std::vector<std::pair<Rational, Rational>> atoms,
                std::optional<ComputableMeasure> continuous, const Rational& blend,
                std::string name)
      : atoms_(std::move(atoms)), continuous_(std::move(continuous)), blend_(blend),
        name_(std::move(name)) {
    if (blend < 0 || blend > 1) fail(Errc::bad_parameter, "blend outside [0,1]");
    if (blend < 1 && !continuous_) fail(Errc::bad_parameter, "missing continuous part");
    if (continuous_ && continuous_->space() != SpaceId::unit_interval)
      fail(Errc::bad_parameter, "mixture supports the unit interval only");
    Rational total = 0;
    for (const auto& [p, w] : atoms_) {
      if (w <= 0 || p < 0 || p > 1) fail(Errc::bad_parameter, "bad atom");
      total += w;
    }
    if (blend > 0 && total != 1) fail(Errc::bad_parameter, "atom weights must sum to 1");
  }

  SpaceId space() const override { return SpaceId::unit_interval; }
  const std::string& name() const override { return name_; }

  FiniteMeasure prokhorov_approx(long n) const override {
    std::vector<std::pair<IdealPoint, Rational>> atoms;
    if (blend_ > 0)
      for (const auto& [p, w] : atoms_) atoms.push_back({IdealPoint(p), w * blend_});
    if (blend_ < 1) {
      for (auto& [p, w] : continuous_->prokhorov_approx(n).atoms)
        atoms.push_back({p, w * (1 - blend_)});
    }
    return make_finite_measure(SpaceId::unit_interval, std::move(atoms));
  }

  Rational atom_part_region(const IntervalSet& r) const {
    Rational acc = 0;
    for (const auto& [p, w] : atoms_)
      if (r.contains(p)) acc += w;
    return acc;
  }

  Rational lower_union(const std::vector<IdealBall>& balls, long stage) const override {
    IntervalSet region = balls_to_interval_region(balls);
    Rational acc = blend_ * atom_part_region(region);
    if (blend_ < 1) acc += (1 - blend_) * continuous_->lower_union(balls, stage);
    return acc;
  }
  std::optional<Rational> upper_union(const std::vector<IdealBall>& balls,
                                      long stage) const override {
    IntervalSet region = balls_to_interval_region(balls);
    auto cont = blend_ < 1 ? continuous_->exact_mass(region) : std::optional<Rational>(Rational(0));
    if (!cont) return std::nullopt;
    (void)stage;
    return blend_ * atom_part_region(region) + (1 - blend_) * *cont;
  }
  AtomFlag atom_flag() const override {
    return (blend_ > 0 && !atoms_.empty()) ? AtomFlag::atomic
           : (blend_ == 0 ? continuous_->atom_flag() : AtomFlag::non_atomic);
  }
  std::vector<IdealPoint> known_atoms() const override {
    std::vector<IdealPoint> out;
    if (blend_ > 0)
      for (const auto& [p, w] : atoms_) out.push_back(p);
    if (blend_ < 1)
      for (const auto& p : continuous_->known_atoms()) out.push_back(p);
    return out;
  }
  std::optional<Rational> mass_interval(const IntervalSet& r) const override {
    Rational acc = blend_ * atom_part_region(r);
    if (blend_ < 1) {
      auto cont = continuous_->exact_mass(r);
      if (!cont) return std::nullopt;
      acc += (1 - blend_) * *cont;
    }
    return acc;
  }
  std::optional<Rational> density_sup() const override {
    if (blend_ == 1) return Rational(0);
    auto d = continuous_->density_sup();
    if (!d) return std::nullopt;
    return *d * (1 - blend_);
  }

 private:
  std::vector<std::pair<Rational, Rational>> atoms_;
  std::optional<ComputableMeasure> continuous_;
  Rational blend_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Pushforward kernel.

class PushforwardKernel : public ComputableMeasure::Kernel {
 public:
  PushforwardKernel(ComputableMeasure base, Morphism f, std::string name)
      : base_(std::move(base)), f_(std::move(f)), name_(std::move(name)) {
    if (base_.space() != f_.from) fail(Errc::unsupported_morphism, "morphism domain mismatch");
    if (f_.needs_aligned_cells && !base_.kernel().aligned_dyadic_approx())
      fail(Errc::unsupported_morphism,
           f_.name + " needs a dyadically aligned base approximant");
    if (f_.needs_aligned_cells && base_.atom_flag() != AtomFlag::non_atomic)
      fail(Errc::unsupported_morphism, f_.name + " needs a non-atomic base");
  }

  SpaceId space() const override { return f_.to; }
  const std::string& name() const override { return name_; }

  FiniteMeasure prokhorov_approx(long n) const override {
    long m = f_.modulus(n + 1);
    FiniteMeasure base = base_.prokhorov_approx(m);
    std::vector<std::pair<IdealPoint, Rational>> atoms;
    for (auto& [p, w] : base.atoms) atoms.push_back({f_.map_point(p, n + 1), w});
    return make_finite_measure(f_.to, std::move(atoms));
  }

  Rational lower_union(const std::vector<IdealBall>& balls, long stage) const override {
    return base_.lower_union(f_.preimage(balls, stage), stage);
  }
  AtomFlag atom_flag() const override {
    return base_.atom_flag() == AtomFlag::non_atomic ? AtomFlag::non_atomic : AtomFlag::unknown;
  }

 private:
  ComputableMeasure base_;
  Morphism f_;
  std::string name_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Constructors

ComputableMeasure lebesgue() {
  return ComputableMeasure(std::make_shared<CdfKernel>(
      std::vector<DensityPiece>{{0, 1, 1, 0}}, std::vector<std::pair<Rational, Rational>>{},
      "lebesgue"));
}

ComputableMeasure bernoulli(const Rational& p) {
  return ComputableMeasure(
      std::make_shared<BernoulliKernel>(p, "bernoulli(" + rat_to_string(p) + ")"));
}

ComputableMeasure density_measure(std::vector<DensityPiece> pieces, std::string name) {
  return ComputableMeasure(std::make_shared<CdfKernel>(
      std::move(pieces), std::vector<std::pair<Rational, Rational>>{}, std::move(name)));
}

ComputableMeasure piecewise_halves() {
  return density_measure({{0, Rational(1, 2), Rational(3, 2), 0},
                          {Rational(1, 2), 1, Rational(1, 2), 0}},
                         "piecewise_halves");
}

ComputableMeasure quadratic_cdf() {
  return density_measure({{0, 1, 0, 2}}, "quadratic_cdf");
}

ComputableMeasure flat_middle() {
  return density_measure({{0, Rational(1, 3), Rational(3, 2), 0},
                          {Rational(1, 3), Rational(2, 3), 0, 0},
                          {Rational(2, 3), 1, Rational(3, 2), 0}},
                         "flat_middle");
}

ComputableMeasure atomic_mixture(std::vector<std::pair<Rational, Rational>> atoms,
                                 std::optional<ComputableMeasure> continuous,
                                 const Rational& blend) {
  std::string name = "mixture(blend=" + rat_to_string(blend) + ")";
  return ComputableMeasure(std::make_shared<MixtureKernel>(std::move(atoms), std::move(continuous),
                                                           blend, std::move(name)));
}

ComputableMeasure pushforward(const ComputableMeasure& mu, const Morphism& f) {
  std::string name = f.name + "_*(" + mu.name() + ")";
  return ComputableMeasure(std::make_shared<PushforwardKernel>(mu, f, std::move(name)));
}

// ---------------------------------------------------------------------------
// Morphisms

Morphism morphism_identity(SpaceId space) {
  return {space, space, "identity",
          [](const IdealPoint& p, long) { return p; },
          [](const std::vector<IdealBall>& balls, long) { return balls; },
          [](long n) { return n; }};
}

Morphism morphism_distance_to(const IdealPoint& center) {
  SpaceId from = point_space(center);
  return {from, SpaceId::unit_interval, "distance_to(" + point_to_string(center) + ")",
          [center](const IdealPoint& p, long) { return IdealPoint(ideal_distance(p, center)); },
          [center, from](const std::vector<IdealBall>& balls, long stage) {
            std::vector<IdealBall> out;
            for (const auto& b : balls) {
              const Rational& q = std::get<Rational>(b.center);
              Rational lo = q - b.radius, hi = q + b.radius;  // preimage of (lo, hi)
              if (from == SpaceId::unit_interval) {
                const Rational& s = std::get<Rational>(center);
                if (hi <= 0) continue;
                if (lo < 0) {
                  // {x : |x - s| < hi} is the ball around s itself.
                  push_open_interval_ball(s - hi, s + hi, out);
                } else {
                  // Annulus: (s - hi, s - lo) u (s + lo, s + hi).
                  push_open_interval_ball(s - hi, s - lo, out);
                  push_open_interval_ball(s + lo, s + hi, out);
                }
              } else {
                // Cylinders whose attained distance range sits inside (lo, hi).
                const Word& c = std::get<Word>(center);
                long depth = std::clamp<long>(stage, 0, 26);
                std::function<void(const Word&)> walk = [&](const Word& prefix) {
                  auto [dmin, dmax] = cylinder_distance_range(prefix, c);
                  if (dmin > lo && dmax < hi) {
                    out.push_back({from, IdealPoint(prefix), pow2(-long(prefix.size()))});
                    return;
                  }
                  if (dmax <= lo || dmin >= hi) return;
                  if (long(prefix.size()) >= depth) return;
                  walk(prefix + '0');
                  walk(prefix + '1');
                };
                walk(Word());
              }
            }
            return out;
          },
          [](long n) { return n; }};
}

Morphism morphism_binary_decode() {
  return {SpaceId::cantor, SpaceId::unit_interval, "binary_decode",
          [](const IdealPoint& p, long) {
            return IdealPoint(word_value(std::get<Word>(p)));
          },
          [](const std::vector<IdealBall>& balls, long stage) {
            std::vector<IdealBall> out;
            long depth = std::clamp<long>(stage, 0, 26);
            for (const auto& b : balls) {
              Rational lo = std::get<Rational>(b.center) - b.radius;
              Rational hi = std::get<Rational>(b.center) + b.radius;
              std::function<void(const Word&)> walk = [&](const Word& prefix) {
                Rational v = word_value(prefix);
                Rational vhi = v + pow2(-long(prefix.size()));
                if (v > lo && vhi < hi) {
                  out.push_back({SpaceId::cantor, IdealPoint(prefix), pow2(-long(prefix.size()))});
                  return;
                }
                if (vhi <= lo || v >= hi) return;
                if (long(prefix.size()) >= depth) return;
                walk(prefix + '0');
                walk(prefix + '1');
              };
              walk(Word());
            }
            return out;
          },
          [](long n) { return n; }};
}

namespace {

// First k binary digits of a rational in [0,1); the caller must keep
// dyadics away (representative grids do).
Word rational_bits(Rational x, long k) {
  Word w;
  for (long i = 0; i < k; ++i) {
    x *= 2;
    if (x >= 1) {
      w.push_back('1');
      x -= 1;
    } else {
      w.push_back('0');
    }
  }
  return w;
}

}  // namespace

Morphism morphism_binary_expand() {
  Morphism m{SpaceId::unit_interval, SpaceId::cantor, "binary_expand",
             [](const IdealPoint& p, long n) {
               return IdealPoint(rational_bits(std::get<Rational>(p), n + 1));
             },
             [](const std::vector<IdealBall>& balls, long stage) {
               std::vector<IdealBall> out;
               long depth = std::clamp<long>(stage, 0, 26);
               // Reduce each Cantor ball to certified cylinders, then take the
               // dyadic preimage interval of each cylinder.
               CylinderSet inner = cantor_inner(balls, depth);
               for (const Word& u : inner.words()) {
                 Rational v = word_value(u);
                 Rational r = pow2(-long(u.size())) / 2;
                 out.push_back({SpaceId::unit_interval, IdealPoint(v + r), r});
               }
               return out;
             },
             [](long n) { return n; }};
  m.needs_aligned_cells = true;
  return m;
}

Morphism morphism_doubling_map() {
  Morphism m{SpaceId::unit_interval, SpaceId::unit_interval, "doubling",
             [](const IdealPoint& p, long) {
               return IdealPoint(frac_rat(std::get<Rational>(p) * 2));
             },
             [](const std::vector<IdealBall>& balls, long) {
               std::vector<IdealBall> out;
               for (const auto& b : balls) {
                 Rational lo = clamp_unit(std::get<Rational>(b.center) - b.radius);
                 Rational hi = clamp_unit(std::get<Rational>(b.center) + b.radius);
                 // T^-1 (lo, hi) = (lo/2, hi/2) u ((lo+1)/2, (hi+1)/2)
                 push_open_interval_ball(lo / 2, hi / 2, out);
                 push_open_interval_ball((lo + 1) / 2, (hi + 1) / 2, out);
               }
               return out;
             },
             [](long n) { return n + 1; }};
  m.needs_aligned_cells = true;
  return m;
}

Morphism morphism_shift_map() {
  return {SpaceId::cantor, SpaceId::cantor, "shift",
          [](const IdealPoint& p, long) {
            const Word& w = std::get<Word>(p);
            return IdealPoint(w.empty() ? w : w.substr(1));
          },
          [](const std::vector<IdealBall>& balls, long stage) {
            std::vector<IdealBall> out;
            long depth = std::clamp<long>(stage, 0, 26);
            CylinderSet inner = cantor_inner(balls, depth);
            for (const Word& u : inner.words()) {
              out.push_back({SpaceId::cantor, IdealPoint('0' + u), pow2(-long(u.size()) - 1)});
              out.push_back({SpaceId::cantor, IdealPoint('1' + u), pow2(-long(u.size()) - 1)});
            }
            return out;
          },
          [](long n) { return n + 1; }};
}

// ---------------------------------------------------------------------------
// Prokhorov distance

namespace {

std::vector<std::vector<Rational>> distance_matrix(const FiniteMeasure& mu,
                                                   const FiniteMeasure& nu) {
  std::vector<std::vector<Rational>> d(mu.atoms.size(),
                                       std::vector<Rational>(nu.atoms.size()));
  for (std::size_t i = 0; i < mu.atoms.size(); ++i)
    for (std::size_t j = 0; j < nu.atoms.size(); ++j)
      d[i][j] = ideal_distance(mu.atoms[i].first, nu.atoms[j].first);
  return d;
}

// Max flow over integer capacities (weights scaled by their common
// denominator; integer arithmetic keeps the augmenting loop cheap).
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t n) : head_(n, -1) {}

  void add_edge(std::size_t a, std::size_t b, Int cap) {
    edges_.push_back({int(b), head_[a], std::move(cap)});
    head_[a] = int(edges_.size()) - 1;
    edges_.push_back({int(a), head_[b], Int(0)});
    head_[b] = int(edges_.size()) - 1;
  }

  // Runs until exhaustion or until the flow reaches `enough` (the
  // feasibility checks only care whether the scaled flow hits a target).
  Int run(std::size_t s, std::size_t t, const Int& enough) {
    Int total = 0;
    while (total < enough) {
      std::vector<int> via(head_.size(), -1);
      std::deque<std::size_t> queue{s};
      via[s] = -2;
      while (!queue.empty() && via[t] == -1) {
        std::size_t u = queue.front();
        queue.pop_front();
        for (int e = head_[u]; e != -1; e = edges_[e].next) {
          if (edges_[e].cap > 0 && via[edges_[e].to] == -1) {
            via[edges_[e].to] = e;
            queue.push_back(std::size_t(edges_[e].to));
          }
        }
      }
      if (via[t] == -1) return total;
      Int push = -1;
      for (int v = int(t); via[v] != -2;) {
        const Edge& e = edges_[via[v]];
        if (push < 0 || e.cap < push) push = e.cap;
        v = edges_[via[v] ^ 1].to;
      }
      for (int v = int(t); via[v] != -2;) {
        edges_[via[v]].cap -= push;
        edges_[via[v] ^ 1].cap += push;
        v = edges_[via[v] ^ 1].to;
      }
      total += push;
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    int next;
    Int cap;
  };
  std::vector<Edge> edges_;
  std::vector<int> head_;
};

// Whether sup_A [mu(A) - nu(A^eps)] <= eps, with A^eps read as {d < eps}
// (strict) or {d <= eps} (closed) on the finite supports.
bool prokhorov_feasible(const FiniteMeasure& mu, const FiniteMeasure& nu,
                        const std::vector<std::vector<Rational>>& d, const Rational& eps,
                        bool closed_edges) {
  std::size_t m = mu.atoms.size(), k = nu.atoms.size();
  Int scale = 1;
  for (const auto& [p, w] : mu.atoms) scale = boost::multiprecision::lcm(scale, den(w));
  for (const auto& [q, w] : nu.atoms) scale = boost::multiprecision::lcm(scale, den(w));
  MaxFlow flow(m + k + 2);
  std::size_t s = m + k, t = m + k + 1;
  for (std::size_t i = 0; i < m; ++i)
    flow.add_edge(s, i, num(mu.atoms[i].second) * (scale / den(mu.atoms[i].second)));
  for (std::size_t j = 0; j < k; ++j)
    flow.add_edge(m + j, t, num(nu.atoms[j].second) * (scale / den(nu.atoms[j].second)));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (closed_edges ? d[i][j] <= eps : d[i][j] < eps) flow.add_edge(i, m + j, scale);
  // Min cut = min_A [mu(A^c) + nu(N(A))], so max_A [mu(A) - nu(N(A))] = 1 - F.
  // Feasible iff flow >= scale * (1 - eps).
  Int target = ceil_rat(Rational(scale) * (1 - eps));
  return flow.run(s, t, target) >= target;
}

}  // namespace

Rational prokhorov_exact(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  if (mu.space != nu.space) fail(Errc::space_mismatch, "prokhorov");
  if (mu.atoms.size() > 15 || nu.atoms.size() > 15)
    fail(Errc::support_too_large, "exact prokhorov walks all subsets; support capped at 15");
  auto d = distance_matrix(mu, nu);
  std::size_t m = mu.atoms.size();
  Rational best = 0;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    Rational mu_s = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) mu_s += mu.atoms[i].second;
    // Distances from each nu atom to S and the cumulative nu mass at each
    // distance jump.
    std::vector<std::pair<Rational, Rational>> jumps;  // (distance, weight)
    for (std::size_t j = 0; j < nu.atoms.size(); ++j) {
      Rational dj = -1;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (1u << i))
          if (dj < 0 || d[i][j] < dj) dj = d[i][j];
      jumps.push_back({dj, nu.atoms[j].second});
    }
    std::sort(jumps.begin(), jumps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // Walk the intervals (d_t, d_{t+1}]; on each, nu(S^eps) is the mass at
    // distance <= d_t.
    std::vector<Rational> ds{0};
    std::vector<Rational> cum{0};
    Rational acc = 0;
    for (const auto& [dist, w] : jumps) {
      acc += w;
      if (dist == ds.back()) cum.back() = acc;
      else {
        ds.push_back(dist);
        cum.push_back(acc);
      }
    }
    Rational eps_s = -1;
    for (std::size_t t = 0; t < ds.size(); ++t) {
      Rational g = mu_s - cum[t];
      Rational cand;
      if (g <= ds[t]) cand = ds[t];
      else if (t + 1 < ds.size() && g > ds[t + 1]) continue;
      else cand = g;
      if (eps_s < 0 || cand < eps_s) eps_s = cand;
    }
    if (eps_s > best) best = eps_s;
  }
  return best;
}

FiniteMeasure coarsen_measure(const FiniteMeasure& mu, long r) {
  std::vector<std::pair<IdealPoint, Rational>> atoms;
  for (const auto& [p, w] : mu.atoms) {
    if (mu.space == SpaceId::unit_interval) {
      const Rational& x = std::get<Rational>(p);
      Int cell = floor_rat(x * pow2(r));
      Rational snapped = std::min<Rational>((Rational(cell) + Rational(1, 2)) * pow2(-r), 1);
      atoms.push_back({IdealPoint(snapped), w});
    } else {
      Word wd = std::get<Word>(p);
      if (long(wd.size()) > r) wd.resize(std::size_t(r));
      atoms.push_back({IdealPoint(wd), w});
    }
  }
  return make_finite_measure(mu.space, std::move(atoms));
}

std::pair<Rational, Rational> prokhorov_bracket(const FiniteMeasure& mu,
                                                const FiniteMeasure& nu, long n) {
  if (mu.space != nu.space) fail(Errc::space_mismatch, "prokhorov");
  auto d = distance_matrix(mu, nu);
  Rational lo = 0, hi = 1;
  if (prokhorov_feasible(mu, nu, d, 0, true)) return {0, 0};
  while (hi - lo > pow2(-n)) {
    Rational mid = (lo + hi) / 2;
    if (prokhorov_feasible(mu, nu, d, mid, false)) hi = mid;
    else lo = mid;
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Bounds

std::pair<Rational, Rational> derive_bounds(const ComputableMeasure& mu,
                                            const std::vector<IdealBall>& balls, long n) {
  for (const auto& b : balls)
    if (b.space != mu.space()) fail(Errc::space_mismatch, "derive_bounds");
  Rational lower = balls.empty() ? Rational(0) : mu.lower_union(balls, n);
  std::optional<Rational> upper = balls.empty() ? std::optional<Rational>(Rational(0))
                                                : mu.kernel().upper_union(balls, n);
  Rational slack = pow2(-n);
  if (!upper) {
    // mu(U) <= mu_n(U^(2^-n)) + 2^-n: count approximant mass within the
    // enlarged balls.
    FiniteMeasure approx = mu.prokhorov_approx(n);
    Rational mass = 0;
    for (const auto& [p, w] : approx.atoms) {
      for (const auto& b : balls) {
        if (ideal_distance(p, b.center) < b.radius + slack) {
          mass += w;
          break;
        }
      }
    }
    upper = std::min<Rational>(mass + slack, 1);
  }
  if (balls.empty()) upper = std::min<Rational>(*upper + slack, 1);  // (0, slack) per contract
  if (lower > *upper) fail(Errc::bad_parameter, "inconsistent measure oracles");
  return {lower, *upper};
}

Rational upper_closed_interval(const ComputableMeasure& mu, const Rational& a,
                               const Rational& b, long n) {
  if (mu.space() != SpaceId::unit_interval)
    fail(Errc::space_mismatch, "upper_closed_interval is an interval-space helper");
  if (auto exact = mu.exact_mass(IntervalSet::closed(a, b))) return *exact;
  // mu([a,b]) = 1 - mu([0,a) u (b,1]); both pieces are balls.
  std::vector<IdealBall> complement;
  if (a > 0) complement.push_back({SpaceId::unit_interval, IdealPoint(Rational(0)), a});
  if (b < 1) complement.push_back({SpaceId::unit_interval, IdealPoint(Rational(1)), 1 - b});
  if (complement.empty()) return 1;
  return Rational(1) - mu.lower_union(complement, n);
}

// ---------------------------------------------------------------------------
// Zero-measure points

namespace {

struct ZeroPointState {
  ComputableMeasure mu;
  long budget;
  std::vector<std::pair<Rational, Rational>> intervals;
  std::vector<Rational> bounds;
  std::mutex mutex;

  ZeroPointState(ComputableMeasure m, long b) : mu(std::move(m)), budget(b) {}

  // Extends the nested sequence to at least k+1 entries (J_0 .. J_k).
  void extend(std::size_t k) {
    std::lock_guard<std::mutex> lock(mutex);
    while (intervals.size() <= k) {
      std::size_t level = intervals.size();  // constructing J_level
      auto [a, b] = intervals.back();
      Rational third = (b - a) / 3;
      Rational target = pow2(-long(level) + 1);  // mu(J_level) must be < 2^(1-level)
      bool placed = false;
      for (long round = 0; round < budget && !placed; ++round) {
        long prec = long(level) + 2 + round;
        Rational left_upper = upper_closed_interval(mu, a, a + third, prec);
        if (left_upper < target) {
          intervals.push_back({a, a + third});
          bounds.push_back(left_upper);
          placed = true;
          break;
        }
        Rational right_upper = upper_closed_interval(mu, b - third, b, prec);
        if (right_upper < target) {
          intervals.push_back({b - third, b});
          bounds.push_back(right_upper);
          placed = true;
          break;
        }
      }
      if (!placed)
        fail(Errc::precision_stall,
             "no third of [" + rat_to_string(a) + "," + rat_to_string(b) +
                 "] certified below " + rat_to_string(target) +
                 " within the stage budget (suspect measure oracle)");
    }
  }
};

}  // namespace

ZeroMeasurePoint find_zero_measure_point(const ComputableMeasure& mu, const Rational& a,
                                         const Rational& b, long stage_budget) {
  if (mu.space() != SpaceId::unit_interval)
    fail(Errc::space_mismatch, "zero-measure search runs on the unit interval");
  if (a >= b) fail(Errc::bad_parameter, "degenerate interval");
  auto state = std::make_shared<ZeroPointState>(mu, stage_budget);
  state->intervals.push_back({a, b});
  state->bounds.push_back(upper_closed_interval(mu, a, b, 3));
  ZeroMeasurePoint out;
  out.value = {[state](long n) {
                 Rational tol = 2 * pow2(-n);
                 std::size_t k = 0;
                 while (true) {
                   state->extend(k);
                   std::lock_guard<std::mutex> lock(state->mutex);
                   auto [lo, hi] = state->intervals[k];
                   if (hi - lo <= tol) return (lo + hi) / 2;
                   ++k;
                 }
               },
               Rational(1)};
  out.trace = [state]() {
    std::lock_guard<std::mutex> lock(state->mutex);
    return ZeroMeasureTrace{state->intervals, state->bounds};
  };
  out.extend = [state](std::size_t k) { state->extend(k); };
  return out;
}

std::vector<AlmostDecidableBall> almost_decidable_radii(const ComputableMeasure& mu,
                                                        const IdealPoint& center,
                                                        std::size_t count,
                                                        const Rational& r_lo,
                                                        const Rational& r_hi,
                                                        long stage_budget) {
  if (point_space(center) != mu.space()) fail(Errc::space_mismatch, "almost_decidable_radii");
  if (count == 0 || r_lo <= 0 || r_hi <= r_lo)
    fail(Errc::bad_parameter, "need a positive radius range and count");
  ComputableMeasure dist = pushforward(mu, morphism_distance_to(center));
  std::vector<AlmostDecidableBall> out;
  Rational w = (r_hi - r_lo) / Rational(Int(count));
  for (std::size_t j = 0; j < count; ++j) {
    Rational lo = r_lo + w * Rational(Int(j));
    ZeroMeasurePoint zp = find_zero_measure_point(dist, lo, lo + w, stage_budget);
    zp.extend(10);
    out.push_back({center, zp.value, zp.trace()});
  }
  return out;
}

}  // namespace cps
