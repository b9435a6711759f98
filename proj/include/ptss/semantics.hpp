#pragma once

// Execution of a specification: rule matching, demand-driven derivation of
// the transitions of closed terms, and bounded exploration of the reachable
// part of the induced transition system.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptss/syntax.hpp"

namespace ptss {

struct Budget {
  std::size_t max_states = 4096;
  std::size_t max_depth = 64;
  /// Rounds allowed for a group of terms whose transitions depend on each
  /// other through positive premises.
  std::size_t max_closure_iters = 64;

  bool operator==(const Budget&) const = default;
};

struct Transition {
  std::string action;
  Distribution target;

  friend bool operator==(const Transition&, const Transition&) = default;
  friend bool operator<(const Transition& a, const Transition& b) {
    if (a.action != b.action) return a.action < b.action;
    return a.target < b.target;
  }
};

/// Binds the source variables of an f-rule to the arguments of `t`; empty
/// when the head operator differs.
std::optional<Substitution> match_rule(const Rule& rule, const StateTerm& t);

/// Derives transitions on demand and memoises them. The specification is
/// expanded to f-rules first; it must be free of classify_evaluable warnings
/// (Error(NotEvaluable) otherwise).
class Engine {
 public:
  explicit Engine(const Ptss& spec, Budget budget = {});

  /// Sorted, duplicate-free outgoing transitions of a closed term. Throws
  /// Error(OpenTerm), Error(UnknownOperator), Error(NotEvaluable) for an
  /// unstratifiable negative premise, Error(BudgetExceeded).
  const std::vector<Transition>& derive(const StateTerm& t);

  const Ptss& spec() const noexcept { return spec_; }
  const Budget& budget() const noexcept { return budget_; }
  std::size_t memo_size() const noexcept { return memo_.size(); }

 private:
  struct Frame;
  struct Outcome {
    const std::vector<Transition>* transitions;
    bool final;
    std::size_t low;  // lowest stack position this result depends on
  };

  Outcome derive_impl(const StateTerm& t);
  std::vector<Transition> step(const StateTerm& t, std::size_t& low);

  Ptss spec_;
  Budget budget_;
  std::map<std::string, std::vector<const Rule*>, std::less<>> rules_by_op_;
  std::map<StateTerm, std::vector<Transition>> memo_;
  std::map<StateTerm, std::size_t> on_stack_;
  std::map<StateTerm, std::vector<Transition>> approx_;
  std::vector<Transition> tentative_;
  std::size_t depth_ = 0;
};

/// Convenience wrapper around a throwaway Engine.
std::vector<Transition> derive_transitions(const Ptss& spec, const StateTerm& t, Budget budget = {});

/// Finite fragment of the induced transition system. Every support point of
/// every stored distribution is itself a state. A state is incomplete when
/// its transitions were not explored (depth or state budget).
class Pts {
 public:
  struct State {
    StateTerm term;
    std::vector<Transition> transitions;
    bool complete = true;
  };

  /// Index of `t`, adding it with no transitions if new.
  std::size_t add(const StateTerm& t);
  std::optional<std::size_t> find(const StateTerm& t) const;
  /// Throws Error(InvalidInput) for an unknown term.
  std::size_t index_of(const StateTerm& t) const;

  State& state(std::size_t i) { return states_.at(i); }
  const State& state(std::size_t i) const { return states_.at(i); }
  const std::vector<State>& states() const noexcept { return states_; }
  std::size_t size() const noexcept { return states_.size(); }
  bool all_complete() const;

  /// Adds any support point that is not yet a state, marked incomplete.
  void close_supports();
  /// States reachable from `seeds`, in breadth-first order.
  Pts restrict_to(std::span<const StateTerm> seeds) const;

  Budget budget;

 private:
  std::vector<State> states_;
  std::map<StateTerm, std::size_t> index_;
};

/// Breadth-first exploration from the seeds (taken in canonical order).
/// States at distance max_depth are kept but not expanded; a state whose
/// successors would push the size past max_states is kept unexpanded too.
Pts reachable_fragment(Engine& engine, std::span<const StateTerm> seeds);
Pts reachable_fragment(const Ptss& spec, std::span<const StateTerm> seeds, Budget budget = {});

}  // namespace ptss
