#include "ptss/report.hpp"

#include <sstream>

#include "ptss/error.hpp"

namespace ptss {

namespace {

std::string bracketed(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out + "]";
}

const char* mode_name(DistanceOptions::Mode m) { return m == DistanceOptions::Mode::Exact ? "exact" : "bracket"; }

Json requirements_json(const std::vector<RequirementVerdict>& verdicts) {
  Json reqs = Json::array();
  for (const auto& v : verdicts)
    reqs.push_back({{"kind", to_string(v.kind)}, {"operator", v.op}, {"verdict", to_string(v.verdict)}});
  return reqs;
}

std::string requirements_text(const std::vector<RequirementVerdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts)
    out += std::string(to_string(v.kind)) + " " + v.op + ": " + std::string(to_string(v.verdict)) + "\n";
  return out;
}

}  // namespace

Json to_json(const Diagnostics& diags) {
  Json out = Json::array();
  for (const auto& d : diags.items())
    out.push_back({{"severity", d.severity == Severity::Error ? "error" : "warning"},
                   {"code", d.code},
                   {"line", d.loc.line},
                   {"col", d.loc.col},
                   {"message", d.message}});
  return out;
}

Json to_json(const Budget& budget) {
  return {{"max_states", budget.max_states},
          {"max_depth", budget.max_depth},
          {"max_closure_iters", budget.max_closure_iters}};
}

Json to_json(NInfty v) {
  if (v.is_inf()) return "inf";
  return v.value();
}

Json to_json(const Pts& pts) {
  Json states = Json::array();
  Json transitions = Json::array();
  Json complete = Json::object();
  for (const auto& s : pts.states()) {
    states.push_back(s.term.str());
    complete[s.term.str()] = s.complete;
    for (const auto& tr : s.transitions) {
      Json dist = Json::array();
      for (const auto& [u, p] : tr.target.masses()) dist.push_back({{"to", u.str()}, {"p", to_string(p)}});
      transitions.push_back({{"from", s.term.str()}, {"action", tr.action}, {"dist", std::move(dist)}});
    }
  }
  return {{"states", std::move(states)},
          {"transitions", std::move(transitions)},
          {"complete", std::move(complete)},
          {"budget", to_json(pts.budget)}};
}

Json relation_json(const std::vector<std::pair<StateTerm, StateTerm>>& pairs, const Rational& eps) {
  Json out = Json::array();
  for (const auto& [a, b] : pairs) out.push_back({a.str(), b.str()});
  return {{"pairs", std::move(out)}, {"epsilon", to_string(eps)}};
}

Json to_json(const VerifyReport& r) {
  Json pairs = Json::array();
  Json eps = Json::array();
  Json omega = Json::array();
  for (const auto& [a, b] : r.pairs) pairs.push_back({a.str(), b.str()});
  for (const auto& e : r.eps) eps.push_back(to_string(e));
  for (const auto& w : r.omega) omega.push_back(to_json(w));
  return {{"op", r.op},   {"pairs", std::move(pairs)},      {"eps", std::move(eps)},
          {"omega", std::move(omega)}, {"bound", to_string(r.bound)}, {"measured", to_string(r.measured)},
          {"holds", r.holds}, {"vacuous", r.vacuous}, {"gap", to_string(r.gap)}};
}

Json check_json(const Ptss& spec, const FormatReport& format, const ChiTable& chi,
                const std::vector<RequirementVerdict>& verdicts, const Diagnostics& diags) {
  Json rules = Json::array();
  for (const auto& r : format.rules) {
    Json violations = Json::array();
    for (const auto& v : r.violations) violations.push_back({{"var", v.var}, {"sum", v.sum}, {"limit", v.limit}});
    rules.push_back({{"name", r.rule}, {"entmuft", r.pass}, {"violations", std::move(violations)}});
  }
  Json ops = Json::array();
  for (const auto& op : spec.signature.operators()) {
    Json row = Json::array();
    for (bool b : chi.row(op.name)) row.push_back(b ? 1 : 0);
    ops.push_back({{"name", op.name}, {"arity", op.arity}, {"chi", std::move(row)}});
  }
  return {{"rules", std::move(rules)},
          {"entmuft", format.overall},
          {"operators", std::move(ops)},
          {"requirements", requirements_json(verdicts)},
          {"diagnostics", to_json(diags)}};
}

Json analyze_json(const ExpansivityTable& table, const std::vector<RequirementVerdict>& verdicts) {
  Json ops = Json::array();
  for (const auto& op : table.signature.operators()) {
    Json omega = Json::array();
    Json chi = Json::array();
    for (std::size_t i = 0; i < op.arity; ++i) {
      omega.push_back(to_json(table.at(op.name, i)));
      chi.push_back(table.chi.at(op.name, i) ? 1 : 0);
    }
    ops.push_back({{"name", op.name}, {"arity", op.arity}, {"omega", std::move(omega)}, {"chi", std::move(chi)}});
  }
  Json widened = Json::array();
  for (const auto& [op, i] : table.widened) widened.push_back({{"op", op}, {"arg", i + 1}});
  return {{"operators", std::move(ops)},
          {"converged", table.converged},
          {"sweeps", table.sweeps},
          {"widened", std::move(widened)},
          {"requirements", requirements_json(verdicts)}};
}

Json distance_json(const StateTerm& t, const StateTerm& t2, const DistanceResult& result, const Budget& budget) {
  Json out = {{"t", t.str()}, {"t'", t2.str()}, {"mode", mode_name(result.mode)}};
  if (result.value) {
    out["distance"] = to_string(*result.value);
  } else {
    out["distance"] = {{"lo", to_string(result.lo)}, {"hi", to_string(result.hi)}};
  }
  out["related"] = result.related;
  out["states"] = result.states;
  if (!result.witness.empty()) out["witness"] = relation_json(result.witness, result.hi);
  out["budget"] = to_json(budget);
  return out;
}

std::string diagnostics_text(const Diagnostics& diags) {
  std::string out;
  for (const auto& d : diags.items())
    out += std::to_string(d.loc.line) + ":" + std::to_string(d.loc.col) + ": " +
           (d.severity == Severity::Error ? "error" : "warning") + " [" + d.code + "] " + d.message + "\n";
  return out;
}

std::string check_text(const Ptss& spec, const FormatReport& format, const ChiTable& chi,
                       const std::vector<RequirementVerdict>& verdicts, const Diagnostics& diags) {
  std::string out = diagnostics_text(diags);
  for (const auto& r : format.rules) {
    out += "rule " + r.rule + ": " + (r.pass ? "entmuft" : "not entmuft");
    for (const auto& v : r.violations)
      out += " " + v.var + "=" + std::to_string(v.sum) + ">" + std::to_string(v.limit);
    out += "\n";
  }
  for (const auto& op : spec.signature.operators()) {
    std::vector<std::string> row;
    for (bool b : chi.row(op.name)) row.push_back(b ? "1" : "0");
    out += op.name + "/" + std::to_string(op.arity) + " chi(" + op.name + ")=" + bracketed(row) + "\n";
  }
  out += std::string("format: ") + (format.overall ? "pass" : "fail") + "\n";
  return out + requirements_text(verdicts);
}

std::string analyze_text(const ExpansivityTable& table, const std::vector<RequirementVerdict>& verdicts) {
  std::string out;
  for (const auto& op : table.signature.operators()) {
    std::vector<std::string> omega;
    std::vector<std::string> chi;
    for (std::size_t i = 0; i < op.arity; ++i) {
      omega.push_back(table.at(op.name, i).str());
      chi.push_back(table.chi.at(op.name, i) ? "1" : "0");
    }
    out += op.name + "/" + std::to_string(op.arity) + " omega(" + op.name + ")=" + bracketed(omega) + " chi(" +
           op.name + ")=" + bracketed(chi) + "\n";
  }
  out += "sweeps: " + std::to_string(table.sweeps) + "\n";
  for (const auto& [op, i] : table.widened) out += "widened: " + op + " argument " + std::to_string(i + 1) + "\n";
  return out + requirements_text(verdicts);
}

std::string pts_text(const Pts& pts) {
  std::string out;
  for (const auto& s : pts.states()) {
    out += s.term.str() + (s.complete ? "" : " (unexplored)") + "\n";
    for (const auto& tr : s.transitions) out += "  -" + tr.action + "-> " + tr.target.str() + "\n";
  }
  out += std::to_string(pts.size()) + " states, " + (pts.all_complete() ? "complete" : "incomplete") + "\n";
  return out;
}

std::string distance_text(const StateTerm& t, const StateTerm& t2, const DistanceResult& result) {
  std::string out = "d(" + t.str() + ", " + t2.str() + ") ";
  if (result.value) {
    out += "= " + to_string(*result.value);
  } else {
    out += "in [" + to_string(result.lo) + ", " + to_string(result.hi) + "]";
  }
  out += " (" + std::string(mode_name(result.mode)) + ", " + std::to_string(result.states) + " states";
  if (!result.related) out += ", not related at any eps";
  out += ")\n";
  for (const auto& [a, b] : result.witness) out += "  " + a.str() + " ~ " + b.str() + "\n";
  return out;
}

std::string verify_text(const VerifyReport& r) {
  std::vector<std::string> eps;
  std::vector<std::string> omega;
  for (const auto& e : r.eps) eps.push_back(to_string(e));
  for (const auto& w : r.omega) omega.push_back(w.str());
  return "verify " + r.op + ": eps=" + bracketed(eps) + " omega=" + bracketed(omega) + " bound=" +
         to_string(r.bound) + " measured=" + to_string(r.measured) + " holds=" + (r.holds ? "true" : "false") +
         " gap=" + to_string(r.gap) + (r.vacuous ? " vacuous=true" : "") + "\n";
}

Pts pts_from_json(const Json& j) {
  try {
    Pts pts;
    if (j.contains("budget")) {
      const Json& b = j.at("budget");
      pts.budget = {b.at("max_states").get<std::size_t>(), b.at("max_depth").get<std::size_t>(),
                    b.at("max_closure_iters").get<std::size_t>()};
    }
    for (const auto& s : j.at("states")) pts.add(parse_closed_term(s.get<std::string>()));
    for (const auto& t : j.at("transitions")) {
      const std::size_t from = pts.index_of(parse_closed_term(t.at("from").get<std::string>()));
      Distribution::MassMap masses;
      for (const auto& e : t.at("dist")) {
        const auto p = parse_rational(e.at("p").get<std::string>());
        if (!p) throw Error(ErrorCode::InvalidInput, "bad probability '" + e.at("p").get<std::string>() + "'");
        const StateTerm to = parse_closed_term(e.at("to").get<std::string>());
        pts.index_of(to);
        masses[to] += *p;
      }
      pts.state(from).transitions.push_back({t.at("action").get<std::string>(), Distribution::from_masses(masses)});
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto& tr = pts.state(i).transitions;
      std::sort(tr.begin(), tr.end());
      tr.erase(std::unique(tr.begin(), tr.end()), tr.end());
    }
    if (j.contains("complete"))
      for (const auto& [term, flag] : j.at("complete").items())
        pts.state(pts.index_of(parse_closed_term(term))).complete = flag.get<bool>();
    return pts;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed transition system: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidTerm) throw Error(ErrorCode::InvalidInput, e.what());
    throw;
  }
}

}  // namespace ptss
