#include "ptss/format_check.hpp"

#include "ptss/error.hpp"

namespace ptss {

ChiTable::ChiTable(const Signature& sig) {
  for (const auto& op : sig.operators()) rows_.emplace(op.name, std::vector<bool>(op.arity, false));
}

const std::vector<bool>& ChiTable::row(std::string_view op) const {
  auto it = rows_.find(op);
  if (it == rows_.end()) throw Error(ErrorCode::UnknownOperator, "unknown operator '" + std::string(op) + "'");
  return it->second;
}

bool ChiTable::at(std::string_view op, std::size_t arg) const {
  const auto& r = row(op);
  if (arg >= r.size())
    throw Error(ErrorCode::InvalidInput, "argument index out of range for '" + std::string(op) + "'");
  return r[arg];
}

void ChiTable::set(std::string_view op, std::size_t arg, bool value) {
  auto it = rows_.find(op);
  if (it == rows_.end() || arg >= it->second.size())
    throw Error(ErrorCode::UnknownOperator, "unknown operator argument '" + std::string(op) + "'");
  it->second[arg] = value;
}

ChiTable discriminating_power(const Ptss& spec) {
  ChiTable chi(spec.signature);
  for (const auto& r : spec.rules) {
    const auto* f = r.fsource();
    if (!f) continue;
    std::set<std::string> tested;
    for (const auto& p : r.positive) collect_vars(p.lhs, tested);
    for (const auto& n : r.negative) collect_vars(n.lhs, tested);
    for (std::size_t i = 0; i < f->vars.size(); ++i)
      if (tested.contains(f->vars[i])) chi.set(f->op, i, true);
  }
  return chi;
}

RuleFormat check_entmuft_rule(const Rule& rule) {
  RuleFormat out{rule.name, true, {}};
  for (const auto& x : rule.source_vars()) {
    std::size_t sum = mvar(rule.target, Variable::state(x));
    for (const auto& p : rule.positive)
      sum += mvar(p.lhs, x) * mvar(rule.target, Variable::dist(p.derivative));
    if (sum > 1) {
      out.pass = false;
      out.violations.push_back({x, sum, 1});
    }
  }
  return out;
}

FormatReport check_entmuft_spec(const Ptss& spec) {
  FormatReport report;
  for (const auto& r : spec.rules) {
    report.rules.push_back(check_entmuft_rule(r));
    report.overall = report.overall && report.rules.back().pass;
  }
  return report;
}

}  // namespace ptss
