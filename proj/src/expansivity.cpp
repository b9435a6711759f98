#include "ptss/expansivity.hpp"

#include <limits>

#include "ptss/error.hpp"
#include "ptss/requirements.hpp"

namespace ptss {

NInfty operator+(NInfty a, NInfty b) noexcept {
  if (a.inf_ || b.inf_) return NInfty::infinity();
  if (a.n_ > std::numeric_limits<std::uint64_t>::max() - b.n_) return NInfty::infinity();
  return NInfty(a.n_ + b.n_);
}

NInfty operator*(NInfty a, NInfty b) noexcept {
  const bool a_zero = !a.inf_ && a.n_ == 0;
  const bool b_zero = !b.inf_ && b.n_ == 0;
  if (a_zero || b_zero) return NInfty(0);
  if (a.inf_ || b.inf_) return NInfty::infinity();
  if (a.n_ > std::numeric_limits<std::uint64_t>::max() / b.n_) return NInfty::infinity();
  return NInfty(a.n_ * b.n_);
}

// --- AnalyzerState ---------------------------------------------------------

AnalyzerState AnalyzerState::bottom(const Signature& sig) {
  AnalyzerState s;
  for (const auto& op : sig.operators()) s.entries_.emplace(op.name, std::vector<NInfty>(op.arity));
  return s;
}

AnalyzerState AnalyzerState::top(const Signature& sig) {
  AnalyzerState s;
  for (const auto& op : sig.operators())
    s.entries_.emplace(op.name, std::vector<NInfty>(op.arity, NInfty::infinity()));
  return s;
}

NInfty AnalyzerState::at(std::string_view op, std::size_t arg) const {
  auto it = entries_.find(op);
  if (it == entries_.end() || arg >= it->second.size())
    throw Error(ErrorCode::UnknownOperator, "no expansivity entry for '" + std::string(op) + "'");
  return it->second[arg];
}

void AnalyzerState::set(std::string_view op, std::size_t arg, NInfty value) {
  auto it = entries_.find(op);
  if (it == entries_.end() || arg >= it->second.size())
    throw Error(ErrorCode::UnknownOperator, "no expansivity entry for '" + std::string(op) + "'");
  it->second[arg] = value;
}

std::size_t AnalyzerState::unknowns() const {
  std::size_t n = 0;
  for (const auto& [op, row] : entries_) n += row.size();
  return n;
}

bool AnalyzerState::leq(const AnalyzerState& other) const {
  for (const auto& [op, row] : entries_)
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i] > other.at(op, i)) return false;
  return true;
}

AnalyzerState AnalyzerState::join(const AnalyzerState& other) const {
  AnalyzerState out = *this;
  for (auto& [op, row] : out.entries_)
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = max(row[i], other.at(op, i));
  return out;
}

AnalyzerState AnalyzerState::meet(const AnalyzerState& other) const {
  AnalyzerState out = *this;
  for (auto& [op, row] : out.entries_)
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::min(row[i], other.at(op, i));
  return out;
}

// --- Weighted multiplicity -------------------------------------------------

NInfty weighted_multiplicity(const AnalyzerState& m, const StateTerm& t, const Variable& zeta) {
  if (t.is_var()) return NInfty(zeta.sort == VarSort::State && t.name() == zeta.name ? 1 : 0);
  NInfty sum(0);
  const auto args = t.args();
  for (std::size_t i = 0; i < args.size(); ++i)
    sum = sum + m.at(t.name(), i) * weighted_multiplicity(m, args[i], zeta);
  return sum;
}

NInfty weighted_multiplicity(const AnalyzerState& m, const ChiTable& chi, const DistTerm& theta,
                             const Variable& zeta) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var:
      return NInfty(zeta.sort == VarSort::Dist && theta.name() == zeta.name ? 1 : 0);
    case DistTerm::Kind::Dirac:
      return weighted_multiplicity(m, theta.state(), zeta);
    case DistTerm::Kind::Convex: {
      NInfty best(0);
      for (const auto& p : theta.parts()) best = max(best, weighted_multiplicity(m, chi, p.body, zeta));
      return best;
    }
    case DistTerm::Kind::Lift: {
      NInfty sum(0);
      const auto args = theta.args();
      for (std::size_t i = 0; i < args.size(); ++i) {
        const NInfty weight = max(m.at(theta.name(), i), NInfty(chi.at(theta.name(), i) ? 1 : 0));
        sum = sum + weight * weighted_multiplicity(m, chi, args[i], zeta);
      }
      return sum;
    }
  }
  return NInfty(0);
}

NInfty rule_expansivity(const Rule& rule, std::size_t arg, const AnalyzerState& m, const ChiTable& chi) {
  const auto* f = rule.fsource();
  if (!f) throw Error(ErrorCode::InvalidInput, "rule " + rule.name + " has a variable source; expand it first");
  const Variable x = Variable::state(f->vars.at(arg));
  NInfty value = weighted_multiplicity(m, chi, rule.target, x);
  for (const auto& p : rule.positive) {
    const NInfty in_premise = weighted_multiplicity(m, p.lhs, x);
    if (in_premise == NInfty(0)) continue;
    value = value + in_premise * weighted_multiplicity(m, chi, rule.target, Variable::dist(p.derivative));
  }
  return value;
}

namespace {

NInfty entry_value(const Ptss& spec, std::string_view op, std::size_t arg, const AnalyzerState& m,
                   const ChiTable& chi) {
  NInfty sup(0);  // sup of the empty set is bottom
  for (const Rule* r : spec.rules_for(op)) sup = max(sup, rule_expansivity(*r, arg, m, chi));
  return sup;
}

}  // namespace

AnalyzerState apply_m(const Ptss& spec, const ChiTable& chi, const AnalyzerState& state) {
  if (spec.has_xsource_rules())
    throw Error(ErrorCode::InvalidInput, "apply_m requires f-source rules only; expand x-source rules first");
  AnalyzerState next = state;
  for (const auto& op : spec.signature.operators())
    for (std::size_t i = 0; i < op.arity; ++i) next.set(op.name, i, entry_value(spec, op.name, i, state, chi));
  return next;
}

ExpansivityTable lfp_expansivity(const Ptss& input) {
  const Ptss spec = input.has_xsource_rules() ? expand_ntmuxt(input) : input;
  ExpansivityTable table;
  table.signature = spec.signature;
  table.chi = discriminating_power(spec);
  table.omega = AnalyzerState::bottom(spec.signature);
  const std::size_t n = table.omega.unknowns();
  // Each entry can be widened at most once after sweep n, so 2n + 2 sweeps
  // always suffice; exceeding this bound means the iteration is broken.
  const std::size_t sweep_cap = 2 * n + 2;

  for (std::size_t sweep = 1;; ++sweep) {
    if (sweep > sweep_cap) throw Error(ErrorCode::NotAFixpoint, "expansivity iteration did not stabilise");
    bool changed = false;
    for (const auto& op : spec.signature.operators()) {
      for (std::size_t i = 0; i < op.arity; ++i) {
        const NInfty old = table.omega.at(op.name, i);
        NInfty v = entry_value(spec, op.name, i, table.omega, table.chi);
        if (v == old) continue;
        if (v < old) {
          // A widened entry may be recomputed as finite until the entries it
          // depends on are widened too; it keeps its infinity.
          if (old.is_inf()) continue;
          throw Error(ErrorCode::NotAFixpoint, "expansivity entry decreased for '" + op.name + "'");
        }
        if (sweep > n && !v.is_inf()) {
          v = NInfty::infinity();
          table.widened.emplace_back(op.name, i);
        }
        table.omega.set(op.name, i, v);
        changed = true;
      }
    }
    table.sweeps = sweep;
    if (!changed) break;
  }

  if (apply_m(spec, table.chi, table.omega) != table.omega)
    throw Error(ErrorCode::NotAFixpoint, "expansivity result is not a fixed point");
  table.converged = true;
  return table;
}

Rational expansivity_bound(const ExpansivityTable& table, std::string_view op, std::span<const Rational> eps) {
  const std::size_t arity = table.signature.arity_of(op);
  if (eps.size() != arity)
    throw Error(ErrorCode::InvalidInput, "expected " + std::to_string(arity) + " distances for '" +
                                             std::string(op) + "', got " + std::to_string(eps.size()));
  Rational agree = 1;
  for (std::size_t i = 0; i < arity; ++i) {
    const Rational& e = eps[i];
    if (e < 0 || e > 1) throw Error(ErrorCode::EpsOutOfRange, "distance " + to_string(e) + " outside [0,1]");
    const NInfty w = table.at(op, i);
    if (e == 0 || w == NInfty(0)) continue;
    if (w.is_inf()) return 1;
    if (e == 1) return 1;
    if (w.value() > (1U << 16))
      throw Error(ErrorCode::InvalidInput, "expansivity power " + w.str() + " too large for an exact bound");
    agree *= pow(Rational(1) - e, w.value());
  }
  return Rational(1) - agree;
}

// --- Requirements ----------------------------------------------------------

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Pass ? "pass" : "not-guaranteed"; }

std::string_view to_string(Requirement::Kind k) noexcept {
  switch (k) {
    case Requirement::Kind::NonExpansive: return "non-expansive";
    case Requirement::Kind::ArgIndependent: return "arg-independent";
    case Requirement::Kind::PNorm: return "p-norm";
  }
  return "unknown";
}

std::vector<RequirementVerdict> check_requirement(const ExpansivityTable& table, const Requirement& req) {
  std::vector<RequirementVerdict> out;
  auto verdict = [](bool ok) { return ok ? Verdict::Pass : Verdict::NotGuaranteed; };
  switch (req.kind) {
    case Requirement::Kind::NonExpansive:
      for (const auto& op : table.signature.operators()) {
        bool ok = true;
        for (std::size_t i = 0; i < op.arity; ++i) ok = ok && table.at(op.name, i) <= NInfty(1);
        out.push_back({req.kind, op.name, verdict(ok)});
      }
      break;
    case Requirement::Kind::ArgIndependent: {
      const std::size_t arity = table.signature.arity_of(req.op);
      if (req.arg >= arity)
        throw Error(ErrorCode::InvalidInput, "operator '" + req.op + "' has no argument " + std::to_string(req.arg + 1));
      out.push_back({req.kind, req.op, verdict(table.at(req.op, req.arg) == NInfty(0))});
      break;
    }
    case Requirement::Kind::PNorm:
      if (req.p <= 1) throw Error(ErrorCode::InvalidInput, "p-norm requirement needs p > 1");
      for (const auto& op : table.signature.operators()) {
        std::size_t ones = 0;
        bool ok = true;
        for (std::size_t i = 0; i < op.arity; ++i) {
          const NInfty w = table.at(op.name, i);
          if (w == NInfty(1)) {
            ++ones;
          } else if (w != NInfty(0)) {
            ok = false;
          }
        }
        out.push_back({req.kind, op.name, verdict(ok && ones <= 1)});
      }
      break;
  }
  return out;
}

}  // namespace ptss
