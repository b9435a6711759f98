#pragma once

// Approximate bisimulation on finite fragments: the lifting check, the
// greatest epsilon-bisimulation, exact distances, strict bisimilarity and
// an empirical check of the expansivity bound.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptss/expansivity.hpp"
#include "ptss/rational.hpp"
#include "ptss/semantics.hpp"

namespace ptss {

/// Symmetric relation over the state indices of a fragment. The diagonal is
/// always included and never stored.
class Relation {
 public:
  Relation() = default;
  /// Identity relation on n states.
  explicit Relation(std::size_t n);
  static Relation full(std::size_t n);

  std::size_t universe() const noexcept { return n_; }
  bool contains(std::size_t i, std::size_t j) const;
  void insert(std::size_t i, std::size_t j);
  void erase(std::size_t i, std::size_t j);

  /// Off-diagonal pairs (i < j) in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
  std::size_t size() const;
  bool subset_of(const Relation& other) const;

  /// Bit j of row i, for j in [64*w, 64*w + 64).
  std::uint64_t word(std::size_t i, std::size_t w) const { return bits_[i * words_ + w]; }

  bool operator==(const Relation&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Largest support accepted on either side of a lifting check.
inline constexpr std::size_t kMaxLiftSupport = 20;

/// pi(X) <= pi'(R(X)) + eps for every X within the support of pi. Support
/// points must be states of `pts`. Throws Error(SupportTooLarge).
bool lift_check(const Pts& pts, const Relation& rel, const Distribution& pi, const Distribution& pi2,
                const Rational& eps);

/// Greatest eps-bisimulation on a fragment whose states are all complete
/// (Error(IncompleteFragment) otherwise).
Relation greatest_epsilon_bisim(const Pts& pts, const Rational& eps);

/// Strict probabilistic bisimilarity by partition refinement.
Relation strict_bisim(const Pts& pts);

struct DistanceOptions {
  enum class Mode { Exact, Bracket };
  Mode mode = Mode::Exact;
  /// Width at which bracket mode stops.
  Rational tolerance = Rational(1, 1000000);
  bool want_witness = false;
};

struct DistanceResult {
  DistanceOptions::Mode mode = DistanceOptions::Mode::Exact;
  /// Exact distance; empty in bracket mode.
  std::optional<Rational> value;
  Rational lo = 0;
  Rational hi = 1;
  /// False when no eps in [0,1] relates the two terms, e.g. when they enable
  /// different actions. The distance is then reported as 1.
  bool related = true;
  /// Term pairs of the greatest bisimulation at the reported distance.
  std::vector<std::pair<StateTerm, StateTerm>> witness;
  std::size_t states = 0;
};

/// Distance between two states over the part of `pts` reachable from them.
/// Exact mode searches the grid of multiples of 1/L, where L is the least
/// common denominator of all masses involved: every threshold at which the
/// greatest eps-bisimulation changes lies on that grid.
DistanceResult distance(const Pts& pts, const StateTerm& t, const StateTerm& t2, const DistanceOptions& opts = {});

/// Explores both terms with the engine and measures their distance.
DistanceResult distance(Engine& engine, const StateTerm& t, const StateTerm& t2, const DistanceOptions& opts = {});

struct VerifyReport {
  std::string op;
  std::vector<std::pair<StateTerm, StateTerm>> pairs;
  std::vector<Rational> eps;
  std::vector<NInfty> omega;
  Rational bound = 0;
  Rational measured = 0;
  bool holds = false;
  /// Some argument pair is not related at any eps, so the bound promises
  /// nothing and `holds` is true trivially.
  bool vacuous = false;
  Rational gap = 0;
};

/// Measures each argument pair, evaluates the expansivity bound of `op` at
/// those distances and compares it with the measured distance of the two
/// composed terms.
VerifyReport verify_expansivity_bound(const Ptss& spec, std::string_view op,
                                      std::span<const std::pair<StateTerm, StateTerm>> pairs, Budget budget = {});

}  // namespace ptss
