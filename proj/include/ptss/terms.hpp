#pragma once

// Two-level term algebra: state terms over operators and state variables,
// distribution terms over state terms and distribution variables, and the
// finitely supported distributions that closed distribution terms denote.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptss/rational.hpp"

namespace ptss {

class Signature {
 public:
  struct Operator {
    std::string name;
    std::size_t arity = 0;
    bool operator==(const Operator&) const = default;
  };

  /// Throws Error(InvalidInput) when the name is already declared.
  void declare(std::string name, std::size_t arity);

  bool contains(std::string_view name) const;
  std::optional<std::size_t> arity(std::string_view name) const;
  /// Throws Error(UnknownOperator).
  std::size_t arity_of(std::string_view name) const;

  /// Declaration order.
  const std::vector<Operator>& operators() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }

  bool operator==(const Signature& other) const { return ops_ == other.ops_; }

 private:
  std::vector<Operator> ops_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

enum class VarSort : std::uint8_t { State, Dist };

struct Variable {
  VarSort sort = VarSort::State;
  std::string name;

  static Variable state(std::string n) { return {VarSort::State, std::move(n)}; }
  static Variable dist(std::string n) { return {VarSort::Dist, std::move(n)}; }

  auto operator<=>(const Variable&) const = default;
};

/// Immutable, structurally compared state term. Copies share the node.
class StateTerm {
 public:
  enum class Kind : std::uint8_t { Var, App };

  static StateTerm var(std::string name);
  static StateTerm app(std::string op, std::vector<StateTerm> args = {});

  Kind kind() const noexcept;
  bool is_var() const noexcept { return kind() == Kind::Var; }
  /// Variable name for Var, operator name for App.
  const std::string& name() const noexcept;
  std::span<const StateTerm> args() const noexcept;
  bool closed() const noexcept;
  std::size_t depth() const noexcept;
  std::size_t hash() const noexcept;

  std::string str() const;

  friend bool operator==(const StateTerm& a, const StateTerm& b) noexcept;
  /// Canonical total order: variables before applications, then name,
  /// then arguments lexicographically.
  friend std::strong_ordering operator<=>(const StateTerm& a, const StateTerm& b) noexcept;

 private:
  struct Node;
  explicit StateTerm(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct StateTerm::Node {
  Kind kind;
  std::string name;
  std::vector<StateTerm> args;
  std::size_t hash;
  std::size_t depth;
  bool closed;
};

inline StateTerm::Kind StateTerm::kind() const noexcept { return node_->kind; }
inline const std::string& StateTerm::name() const noexcept { return node_->name; }
inline std::span<const StateTerm> StateTerm::args() const noexcept { return node_->args; }
inline bool StateTerm::closed() const noexcept { return node_->closed; }
inline std::size_t StateTerm::depth() const noexcept { return node_->depth; }
inline std::size_t StateTerm::hash() const noexcept { return node_->hash; }

struct WeightedDist;

class DistTerm {
 public:
  enum class Kind : std::uint8_t { Var, Dirac, Convex, Lift };

  static DistTerm var(std::string name);
  static DistTerm dirac(StateTerm t);
  /// Weights must lie in (0,1] and sum to exactly 1; throws Error(InvalidTerm).
  static DistTerm convex(std::vector<WeightedDist> parts);
  static DistTerm lift(std::string op, std::vector<DistTerm> args = {});

  Kind kind() const noexcept;
  /// Variable name for Var, operator name for Lift, empty otherwise.
  const std::string& name() const noexcept;
  /// Body of a Dirac term.
  const StateTerm& state() const;
  std::span<const WeightedDist> parts() const noexcept;
  std::span<const DistTerm> args() const noexcept;
  bool closed() const noexcept;

  std::string str() const;

  friend bool operator==(const DistTerm& a, const DistTerm& b) noexcept;

 private:
  struct Node;
  explicit DistTerm(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct WeightedDist {
  Rational weight;
  DistTerm body;
  bool operator==(const WeightedDist&) const = default;
};

struct DistTerm::Node {
  Kind kind;
  std::string name;
  std::optional<StateTerm> state;
  std::vector<WeightedDist> parts;
  std::vector<DistTerm> args;
  bool closed;
};

inline DistTerm::Kind DistTerm::kind() const noexcept { return node_->kind; }
inline const std::string& DistTerm::name() const noexcept { return node_->name; }
inline std::span<const WeightedDist> DistTerm::parts() const noexcept { return node_->parts; }
inline std::span<const DistTerm> DistTerm::args() const noexcept { return node_->args; }
inline bool DistTerm::closed() const noexcept { return node_->closed; }

/// Unmapped variables are left in place.
struct Substitution {
  std::map<std::string, StateTerm> state;
  std::map<std::string, DistTerm> dist;
};

StateTerm substitute(const StateTerm& t, const Substitution& sigma);
DistTerm substitute(const DistTerm& theta, const Substitution& sigma);

/// Occurrences of state variable `x` in `t`.
std::size_t mvar(const StateTerm& t, std::string_view x);
/// Occurrence count on distribution terms: convex combinations take the
/// maximum over their parts, lifted operators sum over their arguments.
std::size_t mvar(const DistTerm& theta, const Variable& zeta);

/// Collects every state variable of `t` into `out`.
void collect_vars(const StateTerm& t, std::set<std::string>& out);
/// Collects state and distribution variables of `theta`.
void collect_vars(const DistTerm& theta, std::set<Variable>& out);

/// Finitely supported probability distribution over closed state terms with
/// exact rational masses summing to one. Support is kept in canonical order.
class Distribution {
 public:
  using MassMap = std::map<StateTerm, Rational>;

  static Distribution dirac(StateTerm t);
  /// Drops zero entries; throws Error(InvalidTerm) unless the masses are
  /// positive, sum to 1 and sit on closed terms.
  static Distribution from_masses(MassMap masses);

  const MassMap& masses() const noexcept { return mass_; }
  std::size_t support_size() const noexcept { return mass_.size(); }
  Rational at(const StateTerm& t) const;
  Rational mass(const std::set<StateTerm>& subset) const;

  std::string str() const;

  friend bool operator==(const Distribution& a, const Distribution& b) { return a.mass_ == b.mass_; }
  friend bool operator<(const Distribution& a, const Distribution& b);

 private:
  explicit Distribution(MassMap m) : mass_(std::move(m)) {}
  MassMap mass_;
};

inline Rational dist_mass(const Distribution& pi, const std::set<StateTerm>& subset) {
  return pi.mass(subset);
}

/// Values for distribution variables during evaluation.
using DistEnv = std::map<std::string, Distribution, std::less<>>;

/// Denotation of a closed distribution term; throws Error(OpenTerm).
Distribution evaluate(const DistTerm& theta);
/// Evaluates under a state substitution and distribution environment; any
/// variable left unbound raises Error(OpenTerm).
Distribution evaluate(const DistTerm& theta, const Substitution& sigma, const DistEnv& env);

}  // namespace ptss

template <>
struct std::hash<ptss::StateTerm> {
  std::size_t operator()(const ptss::StateTerm& t) const noexcept { return t.hash(); }
};
