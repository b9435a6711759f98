#include "ptss/semantics.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "ptss/error.hpp"

namespace ptss {

namespace {

constexpr std::size_t kNoDependency = std::numeric_limits<std::size_t>::max();
// Nesting of premise evaluations; protects the native stack.
constexpr std::size_t kMaxNesting = 2048;

}  // namespace

std::optional<Substitution> match_rule(const Rule& rule, const StateTerm& t) {
  const FSource* f = rule.fsource();
  if (!f) throw Error(ErrorCode::InvalidInput, "rule " + rule.name + " has a variable source");
  if (t.is_var() || t.name() != f->op || t.args().size() != f->vars.size()) return std::nullopt;
  Substitution sigma;
  for (std::size_t i = 0; i < f->vars.size(); ++i) sigma.state.insert_or_assign(f->vars[i], t.args()[i]);
  return sigma;
}

// --- Engine ----------------------------------------------------------------

Engine::Engine(const Ptss& spec, Budget budget) : spec_(expand_ntmuxt(spec)), budget_(budget) {
  const Diagnostics warnings = classify_evaluable(spec_);
  if (!warnings.empty()) throw Error(ErrorCode::NotEvaluable, warnings.items().front().message);
  for (const auto& op : spec_.signature.operators()) rules_by_op_[op.name];
  for (const auto& r : spec_.rules) rules_by_op_[r.fsource()->op].push_back(&r);
}

const std::vector<Transition>& Engine::derive(const StateTerm& t) {
  if (!t.closed()) throw Error(ErrorCode::OpenTerm, "cannot derive transitions of open term " + t.str());
  if (auto it = memo_.find(t); it != memo_.end()) return it->second;
  derive_impl(t);
  return memo_.at(t);
}

struct Engine::Frame {
  Engine& e;
  StateTerm t;
  Frame(Engine& engine, const StateTerm& term, std::size_t pos) : e(engine), t(term) {
    e.on_stack_.emplace(t, pos);
    e.approx_.emplace(t, std::vector<Transition>{});
    ++e.depth_;
  }
  ~Frame() {
    e.on_stack_.erase(t);
    e.approx_.erase(t);
    --e.depth_;
  }
  Frame(const Frame&) = delete;
  Frame& operator=(const Frame&) = delete;
};

Engine::Outcome Engine::derive_impl(const StateTerm& t) {
  if (auto it = memo_.find(t); it != memo_.end()) return {&it->second, true, kNoDependency};
  if (auto it = on_stack_.find(t); it != on_stack_.end()) return {&approx_.at(t), false, it->second};
  if (depth_ >= kMaxNesting)
    throw Error(ErrorCode::BudgetExceeded, "premise evaluation nested deeper than " + std::to_string(kMaxNesting));

  const std::size_t pos = depth_;
  Frame frame(*this, t, pos);
  for (std::size_t iter = 0;; ++iter) {
    if (iter >= budget_.max_closure_iters)
      throw Error(ErrorCode::BudgetExceeded, "transitions of " + t.str() + " did not stabilise within " +
                                                 std::to_string(budget_.max_closure_iters) + " rounds");
    std::size_t low = kNoDependency;
    std::vector<Transition> next = step(t, low);
    std::vector<Transition>& current = approx_.at(t);
    const bool stable = next == current || low == kNoDependency;
    current = std::move(next);
    if (!stable) continue;
    if (low < pos) {
      // Depends on a term further up the stack: the caller iterates.
      tentative_ = current;
      return {&tentative_, false, low};
    }
    auto [it, inserted] = memo_.emplace(t, current);
    return {&it->second, true, kNoDependency};
  }
}

std::vector<Transition> Engine::step(const StateTerm& t, std::size_t& low) {
  auto rules = rules_by_op_.find(t.name());
  if (rules == rules_by_op_.end()) throw Error(ErrorCode::UnknownOperator, "unknown operator '" + t.name() + "'");
  if (spec_.signature.arity_of(t.name()) != t.args().size())
    throw Error(ErrorCode::InvalidTerm, "wrong number of arguments in " + t.str());

  std::set<Transition> out;
  for (const Rule* rule : rules->second) {
    const auto sigma = match_rule(*rule, t);
    if (!sigma) continue;

    bool blocked = false;
    for (const auto& n : rule->negative) {
      const Outcome o = derive_impl(substitute(n.lhs, *sigma));
      if (!o.final)
        throw Error(ErrorCode::NotEvaluable,
                    "rule " + rule->name + ": negative premise on " + t.str() + " depends on itself");
      if (std::any_of(o.transitions->begin(), o.transitions->end(),
                      [&](const Transition& tr) { return tr.action == n.action; }))
        blocked = true;
    }
    if (blocked) continue;

    std::vector<std::vector<Distribution>> choices;
    for (const auto& p : rule->positive) {
      const Outcome o = derive_impl(substitute(p.lhs, *sigma));
      low = std::min(low, o.low);
      std::vector<Distribution> matching;
      for (const auto& tr : *o.transitions)
        if (tr.action == p.action) matching.push_back(tr.target);
      if (matching.empty()) {
        blocked = true;
        break;
      }
      choices.push_back(std::move(matching));
    }
    if (blocked) continue;

    std::vector<std::size_t> pick(choices.size(), 0);
    DistEnv env;
    while (true) {
      for (std::size_t k = 0; k < choices.size(); ++k)
        env.insert_or_assign(rule->positive[k].derivative, choices[k][pick[k]]);
      out.insert({rule->action, evaluate(rule->target, *sigma, env)});
      std::size_t k = 0;
      while (k < pick.size() && ++pick[k] == choices[k].size()) pick[k++] = 0;
      if (k == pick.size()) break;
    }
  }
  return {out.begin(), out.end()};
}

std::vector<Transition> derive_transitions(const Ptss& spec, const StateTerm& t, Budget budget) {
  Engine engine(spec, budget);
  return engine.derive(t);
}

// --- Pts -------------------------------------------------------------------

std::size_t Pts::add(const StateTerm& t) {
  if (auto it = index_.find(t); it != index_.end()) return it->second;
  const std::size_t i = states_.size();
  states_.push_back({t, {}, true});
  index_.emplace(t, i);
  return i;
}

std::optional<std::size_t> Pts::find(const StateTerm& t) const {
  if (auto it = index_.find(t); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Pts::index_of(const StateTerm& t) const {
  if (auto i = find(t)) return *i;
  throw Error(ErrorCode::InvalidInput, "term " + t.str() + " is not a state of the fragment");
}

bool Pts::all_complete() const {
  return std::all_of(states_.begin(), states_.end(), [](const State& s) { return s.complete; });
}

void Pts::close_supports() {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    std::vector<StateTerm> missing;
    for (const auto& tr : states_[i].transitions)
      for (const auto& [u, p] : tr.target.masses())
        if (!index_.contains(u)) missing.push_back(u);
    for (const auto& u : missing)
      if (!index_.contains(u)) states_[add(u)].complete = false;
  }
}

Pts Pts::restrict_to(std::span<const StateTerm> seeds) const {
  Pts out;
  out.budget = budget;
  std::deque<std::size_t> queue;
  for (const auto& s : seeds) {
    const std::size_t i = index_of(s);
    if (!out.find(s)) {
      out.add(s);
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const State& src = states_[queue.front()];
    queue.pop_front();
    State& dst = out.states_[out.index_of(src.term)];
    dst.transitions = src.transitions;
    dst.complete = src.complete;
    for (const auto& tr : src.transitions)
      for (const auto& [u, p] : tr.target.masses())
        if (!out.find(u)) {
          out.add(u);
          queue.push_back(index_of(u));
        }
  }
  return out;
}

Pts reachable_fragment(Engine& engine, std::span<const StateTerm> seeds) {
  std::vector<StateTerm> ordered(seeds.begin(), seeds.end());
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  const Budget& budget = engine.budget();
  Pts pts;
  pts.budget = budget;
  std::vector<std::size_t> depth;
  for (const auto& s : ordered) {
    if (!s.closed()) throw Error(ErrorCode::OpenTerm, "seed " + s.str() + " is not closed");
    pts.add(s);
    depth.push_back(0);
  }

  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (depth[i] >= budget.max_depth) {
      pts.state(i).complete = false;
      continue;
    }
    const std::vector<Transition>& transitions = engine.derive(pts.state(i).term);
    std::vector<StateTerm> fresh;
    std::set<StateTerm> seen;
    for (const auto& tr : transitions)
      for (const auto& [u, p] : tr.target.masses())
        if (!pts.find(u) && seen.insert(u).second) fresh.push_back(u);
    if (pts.size() + fresh.size() > budget.max_states) {
      pts.state(i).complete = false;
      continue;
    }
    for (const auto& u : fresh) {
      pts.add(u);
      depth.push_back(depth[i] + 1);
    }
    pts.state(i).transitions = transitions;
    pts.state(i).complete = true;
  }
  return pts;
}

Pts reachable_fragment(const Ptss& spec, std::span<const StateTerm> seeds, Budget budget) {
  Engine engine(spec, budget);
  return reachable_fragment(engine, seeds);
}

}  // namespace ptss
