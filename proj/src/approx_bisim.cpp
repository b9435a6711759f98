#include "ptss/approx_bisim.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <type_traits>
#include <unordered_set>

#include "ptss/error.hpp"

namespace ptss {

// --- Relation --------------------------------------------------------------

Relation::Relation(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

Relation Relation::full(std::size_t n) {
  Relation r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) r.insert(i, j);
  return r;
}

bool Relation::contains(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw Error(ErrorCode::InvalidInput, "state index outside the relation");
  if (i == j) return true;
  return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
}

void Relation::insert(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw Error(ErrorCode::InvalidInput, "state index outside the relation");
  if (i == j) return;
  bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
  bits_[j * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
}

void Relation::erase(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw Error(ErrorCode::InvalidInput, "state index outside the relation");
  if (i == j) return;
  bits_[i * words_ + j / 64] &= ~(std::uint64_t{1} << (j % 64));
  bits_[j * words_ + i / 64] &= ~(std::uint64_t{1} << (i % 64));
}

std::vector<std::pair<std::size_t, std::size_t>> Relation::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (contains(i, j)) out.emplace_back(i, j);
  return out;
}

std::size_t Relation::size() const {
  std::size_t total = 0;
  for (auto w : bits_) total += static_cast<std::size_t>(std::popcount(w));
  return total / 2;
}

bool Relation::subset_of(const Relation& other) const {
  if (n_ != other.n_) return false;
  for (std::size_t k = 0; k < bits_.size(); ++k)
    if (bits_[k] & ~other.bits_[k]) return false;
  return true;
}

// --- Integer-scaled fragments ----------------------------------------------

namespace {

template <class T>
T from_integer(const Integer& v) {
  if constexpr (std::is_same_v<T, Integer>) {
    return v;
  } else {
    return v.convert_to<T>();
  }
}

void require_complete(const Pts& pts) {
  for (const auto& s : pts.states())
    if (!s.complete)
      throw Error(ErrorCode::IncompleteFragment,
                  "state " + s.term.str() + " was not fully explored; raise the budget");
}

Integer lcm_of_denominators(const std::vector<const Distribution*>& dists) {
  Integer l = 1;
  for (const Distribution* d : dists)
    for (const auto& [t, p] : d->masses()) l = boost::multiprecision::lcm(l, denominator_of(p));
  return l;
}

// Masses scaled by a common denominator so that lifting checks run on
// integers. T is std::int64_t when the scale allows, Integer otherwise.
template <class T>
class Scaled {
 public:
  struct Dist {
    std::vector<std::size_t> support;  // state indices
    std::vector<T> mass;
    std::vector<T> sums;  // by subset bitmask, filled lazily
  };

  Scaled(const Pts& pts, const std::vector<const Distribution*>& dists, const Integer& scale)
      : pts_(pts), scale_(to_t(scale)) {
    for (const Distribution* d : dists) intern(*d, scale);
  }

  std::size_t intern(const Distribution& d, const Integer& scale) {
    if (auto it = ids_.find(d); it != ids_.end()) return it->second;
    Dist out;
    for (const auto& [t, p] : d.masses()) {
      out.support.push_back(pts_.index_of(t));
      out.mass.push_back(to_t(numerator_of(p) * (scale / denominator_of(p))));
    }
    if (out.support.size() > kMaxLiftSupport)
      throw Error(ErrorCode::SupportTooLarge, "distribution " + d.str() + " has " +
                                                  std::to_string(out.support.size()) + " support points; at most " +
                                                  std::to_string(kMaxLiftSupport) + " are supported");
    dists_.push_back(std::move(out));
    ids_.emplace(d, dists_.size() - 1);
    return dists_.size() - 1;
  }

  std::size_t id(const Distribution& d) const { return ids_.at(d); }
  const T& scale() const { return scale_; }

  T threshold(const Rational& eps) const {
    const Rational scaled = eps * Rational(scale_as_integer());
    return to_t(numerator_of(scaled) / denominator_of(scaled));
  }

  bool lift(std::size_t a, std::size_t b, const Relation& rel, const T& e) {
    if (e >= scale_) return true;
    Dist& pa = dists_[a];
    Dist& pb = dists_[b];
    fill_sums(pa);
    fill_sums(pb);
    const std::size_t k = pa.support.size();
    std::vector<std::uint32_t> rows(k, 0);
    for (std::size_t u = 0; u < k; ++u)
      for (std::size_t v = 0; v < pb.support.size(); ++v)
        if (rel.contains(pa.support[u], pb.support[v])) rows[u] |= std::uint32_t{1} << v;
    image_.assign(std::size_t{1} << k, 0);
    for (std::size_t mask = 1; mask < image_.size(); ++mask) {
      const auto low = static_cast<std::size_t>(std::countr_zero(mask));
      image_[mask] = image_[mask & (mask - 1)] | rows[low];
      if (pa.sums[mask] - pb.sums[image_[mask]] > e) return false;
    }
    return true;
  }

 private:
  static T to_t(const Integer& v) { return from_integer<T>(v); }
  Integer scale_as_integer() const {
    if constexpr (std::is_same_v<T, Integer>) {
      return scale_;
    } else {
      return Integer(scale_);
    }
  }

  static void fill_sums(Dist& d) {
    if (!d.sums.empty()) return;
    const std::size_t k = d.support.size();
    d.sums.assign(std::size_t{1} << k, T(0));
    for (std::size_t mask = 1; mask < d.sums.size(); ++mask)
      d.sums[mask] = d.sums[mask & (mask - 1)] + d.mass[static_cast<std::size_t>(std::countr_zero(mask))];
  }

  const Pts& pts_;
  T scale_;
  std::vector<Dist> dists_;
  std::map<Distribution, std::size_t> ids_;
  std::vector<std::uint32_t> image_;
};

template <class T>
class Refiner {
 public:
  Refiner(const Pts& pts, const std::vector<const Distribution*>& dists, const Integer& scale)
      : pts_(pts), scaled_(pts, dists, scale) {
    std::map<std::string, std::size_t> action_ids;
    for (const auto& s : pts.states()) {
      std::vector<std::pair<std::size_t, std::size_t>> m;
      for (const auto& tr : s.transitions) {
        auto [it, inserted] = action_ids.emplace(tr.action, action_ids.size());
        m.emplace_back(it->second, scaled_.id(tr.target));
      }
      std::vector<std::size_t> en;
      for (const auto& [a, d] : m) en.push_back(a);
      std::sort(en.begin(), en.end());
      en.erase(std::unique(en.begin(), en.end()), en.end());
      moves_.push_back(std::move(m));
      enabled_.push_back(std::move(en));
    }
  }

  const T& scale() const { return scaled_.scale(); }
  T threshold(const Rational& eps) const { return scaled_.threshold(eps); }

  Relation greatest(const T& e) {
    const std::size_t n = pts_.size();
    Relation rel(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (enabled_[i] == enabled_[j]) rel.insert(i, j);
    failed_.clear();
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [i, j] : rel.pairs()) {
        if (!transfer(i, j, rel, e) || !transfer(j, i, rel, e)) {
          rel.erase(i, j);
          changed = true;
        }
      }
    }
    return rel;
  }

 private:
  bool transfer(std::size_t i, std::size_t j, const Relation& rel, const T& e) {
    for (const auto& [a, da] : moves_[i]) {
      bool matched = false;
      for (const auto& [b, db] : moves_[j]) {
        if (a != b) continue;
        if (da == db) {
          matched = true;
          break;
        }
        const std::uint64_t key = static_cast<std::uint64_t>(da) << 32 | db;
        if (failed_.contains(key)) continue;
        // The relation only shrinks, so a failed lifting stays failed.
        if (scaled_.lift(da, db, rel, e)) {
          matched = true;
          break;
        }
        failed_.insert(key);
      }
      if (!matched) return false;
    }
    return true;
  }

  const Pts& pts_;
  Scaled<T> scaled_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> moves_;
  std::vector<std::vector<std::size_t>> enabled_;
  std::unordered_set<std::uint64_t> failed_;
};

std::vector<const Distribution*> all_targets(const Pts& pts) {
  std::vector<const Distribution*> out;
  for (const auto& s : pts.states())
    for (const auto& tr : s.transitions) out.push_back(&tr.target);
  return out;
}

// Scales below this bound keep every subset sum and difference in range.
bool fits_int64(const Integer& scale) { return scale < (Integer(1) << 61); }

template <class T>
DistanceResult measure(const Pts& sub, std::size_t it, std::size_t it2, const DistanceOptions& opts,
                       const Integer& scale) {
  Refiner<T> refiner(sub, all_targets(sub), scale);
  DistanceResult result;
  result.mode = opts.mode;
  result.states = sub.size();
  Relation witness;
  auto related = [&](const T& e) {
    Relation rel = refiner.greatest(e);
    const bool yes = rel.contains(it, it2);
    if (yes) witness = std::move(rel);
    return yes;
  };

  if (opts.mode == DistanceOptions::Mode::Exact) {
    // Smallest k with the two states related at eps = k / scale.
    Integer lo = 0;
    Integer hi = scale;
    if (!related(refiner.scale())) {
      result.related = false;
      result.value = Rational(1);
    } else {
      while (lo < hi) {
        const Integer mid = (lo + hi) / 2;
        if (related(from_integer<T>(mid))) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      related(from_integer<T>(hi));
      result.value = Rational(hi, scale);
    }
    result.lo = result.hi = *result.value;
  } else {
    Rational lo = 0;
    Rational hi = 1;
    if (!related(refiner.scale())) {
      result.related = false;
      lo = 1;
    } else if (related(T(0))) {
      hi = 0;
    } else {
      while (hi - lo > opts.tolerance) {
        const Rational mid = (lo + hi) / 2;
        if (related(refiner.threshold(mid))) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      related(refiner.threshold(hi));
    }
    result.lo = lo;
    result.hi = hi;
  }

  if (opts.want_witness && witness.universe() == sub.size())
    for (const auto& [i, j] : witness.pairs()) result.witness.emplace_back(sub.state(i).term, sub.state(j).term);
  return result;
}

}  // namespace

bool lift_check(const Pts& pts, const Relation& rel, const Distribution& pi, const Distribution& pi2,
                const Rational& eps) {
  if (eps < 0 || eps > 1) throw Error(ErrorCode::EpsOutOfRange, "epsilon " + to_string(eps) + " outside [0,1]");
  if (rel.universe() != pts.size()) throw Error(ErrorCode::InvalidInput, "relation does not match the fragment");
  const std::vector<const Distribution*> both{&pi, &pi2};
  const Integer scale = lcm_of_denominators(both);
  if (fits_int64(scale)) {
    Scaled<std::int64_t> s(pts, both, scale);
    return s.lift(s.id(pi), s.id(pi2), rel, s.threshold(eps));
  }
  Scaled<Integer> s(pts, both, scale);
  return s.lift(s.id(pi), s.id(pi2), rel, s.threshold(eps));
}

Relation greatest_epsilon_bisim(const Pts& pts, const Rational& eps) {
  if (eps < 0 || eps > 1) throw Error(ErrorCode::EpsOutOfRange, "epsilon " + to_string(eps) + " outside [0,1]");
  require_complete(pts);
  const auto targets = all_targets(pts);
  const Integer scale = lcm_of_denominators(targets);
  if (fits_int64(scale)) {
    Refiner<std::int64_t> r(pts, targets, scale);
    return r.greatest(r.threshold(eps));
  }
  Refiner<Integer> r(pts, targets, scale);
  return r.greatest(r.threshold(eps));
}

Relation strict_bisim(const Pts& pts) {
  require_complete(pts);
  const std::size_t n = pts.size();
  std::vector<std::size_t> block(n, 0);
  std::size_t blocks = n ? 1 : 0;
  using Move = std::pair<std::string, std::vector<std::pair<std::size_t, Rational>>>;
  while (true) {
    std::map<std::pair<std::size_t, std::vector<Move>>, std::size_t> ids;
    std::vector<std::size_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Move> sig;
      for (const auto& tr : pts.state(i).transitions) {
        std::map<std::size_t, Rational> per_block;
        for (const auto& [u, p] : tr.target.masses()) per_block[block[pts.index_of(u)]] += p;
        sig.emplace_back(tr.action, std::vector<std::pair<std::size_t, Rational>>(per_block.begin(), per_block.end()));
      }
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      auto [it, inserted] = ids.emplace(std::make_pair(block[i], std::move(sig)), ids.size());
      next[i] = it->second;
    }
    const bool stable = ids.size() == blocks;
    block = std::move(next);
    blocks = ids.size();
    if (stable) break;
  }
  Relation rel(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (block[i] == block[j]) rel.insert(i, j);
  return rel;
}

DistanceResult distance(const Pts& pts, const StateTerm& t, const StateTerm& t2, const DistanceOptions& opts) {
  if (opts.mode == DistanceOptions::Mode::Bracket && opts.tolerance <= 0)
    throw Error(ErrorCode::InvalidInput, "bracket tolerance must be positive");
  const std::vector<StateTerm> seeds{t, t2};
  const Pts sub = pts.restrict_to(seeds);
  require_complete(sub);
  const std::size_t it = sub.index_of(t);
  const std::size_t it2 = sub.index_of(t2);
  if (it == it2) {
    DistanceResult same;
    same.mode = opts.mode;
    same.value = Rational(0);
    same.lo = same.hi = 0;
    same.states = sub.size();
    return same;
  }
  const Integer scale = lcm_of_denominators(all_targets(sub));
  if (fits_int64(scale)) return measure<std::int64_t>(sub, it, it2, opts, scale);
  return measure<Integer>(sub, it, it2, opts, scale);
}

DistanceResult distance(Engine& engine, const StateTerm& t, const StateTerm& t2, const DistanceOptions& opts) {
  const std::vector<StateTerm> seeds{t, t2};
  const Pts pts = reachable_fragment(engine, seeds);
  return distance(pts, t, t2, opts);
}

VerifyReport verify_expansivity_bound(const Ptss& spec, std::string_view op,
                                      std::span<const std::pair<StateTerm, StateTerm>> pairs, Budget budget) {
  const ExpansivityTable table = lfp_expansivity(spec);
  const std::size_t arity = table.signature.arity_of(op);
  if (pairs.size() != arity)
    throw Error(ErrorCode::InvalidInput, "operator '" + std::string(op) + "' takes " + std::to_string(arity) +
                                             " arguments, got " + std::to_string(pairs.size()) + " pairs");
  Engine engine(spec, budget);
  VerifyReport report;
  report.op = std::string(op);
  report.pairs.assign(pairs.begin(), pairs.end());
  std::vector<StateTerm> left;
  std::vector<StateTerm> right;
  for (std::size_t i = 0; i < arity; ++i) {
    const DistanceResult d = distance(engine, pairs[i].first, pairs[i].second);
    report.eps.push_back(*d.value);
    report.vacuous |= !d.related;
    report.omega.push_back(table.at(op, i));
    left.push_back(pairs[i].first);
    right.push_back(pairs[i].second);
  }
  report.bound = expansivity_bound(table, op, report.eps);
  report.measured = *distance(engine, StateTerm::app(std::string(op), left), StateTerm::app(std::string(op), right)).value;
  report.holds = report.vacuous || report.measured <= report.bound;
  report.gap = report.bound - report.measured;
  return report;
}

}  // namespace ptss
