#include "oracles.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ptss/error.hpp"

#ifndef PTSS_SOURCE_DIR
#error "PTSS_SOURCE_DIR must point at the repository root"
#endif

namespace ptss::testing {

std::filesystem::path source_dir() { return PTSS_SOURCE_DIR; }

std::filesystem::path corpus_path(std::string_view file) { return source_dir() / "corpus" / file; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Ptss parse_or_throw(std::string_view text) {
  auto result = parse_spec(text);
  if (!result) {
    std::string msg = "parse failed:";
    for (const auto& d : result.diagnostics.items()) msg += " [" + d.code + "] " + d.message;
    throw std::runtime_error(msg + "\n" + std::string(text));
  }
  return *result.spec;
}

Ptss load_corpus(std::string_view file) { return parse_or_throw(read_file(corpus_path(file))); }

std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(source_dir() / "corpus"))
    if (e.path().extension() == ".ptss") out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == '(' || ch == ')' || ch == ',' || ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return std::min(kOracleCap, a + b); }

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a >= kOracleCap / b) return kOracleCap;
  return a * b;
}

using Table = std::map<std::string, std::vector<std::uint64_t>>;

std::uint64_t cell(const Table& m, const std::string& op, std::size_t i) { return m.at(op).at(i); }

std::uint64_t wm_state(const Table& m, const StateTerm& t, const std::string& x) {
  if (t.is_var()) return t.name() == x ? 1 : 0;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < t.args().size(); ++i)
    sum = sat_add(sum, sat_mul(cell(m, t.name(), i), wm_state(m, t.args()[i], x)));
  return sum;
}

// `dist` selects whether x names a distribution variable.
std::uint64_t wm_dist(const Table& m, const Table& chi, const DistTerm& theta, const std::string& x, bool dist) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var:
      return dist && theta.name() == x ? 1 : 0;
    case DistTerm::Kind::Dirac:
      return dist ? 0 : wm_state(m, theta.state(), x);
    case DistTerm::Kind::Convex: {
      std::uint64_t best = 0;
      for (const auto& p : theta.parts()) best = std::max(best, wm_dist(m, chi, p.body, x, dist));
      return best;
    }
    case DistTerm::Kind::Lift: {
      std::uint64_t sum = 0;
      for (std::size_t i = 0; i < theta.args().size(); ++i) {
        const std::uint64_t w = std::max(cell(m, theta.name(), i), cell(chi, theta.name(), i));
        sum = sat_add(sum, sat_mul(w, wm_dist(m, chi, theta.args()[i], x, dist)));
      }
      return sum;
    }
  }
  return 0;
}

StateTerm subst_state(const StateTerm& t, const std::map<std::string, StateTerm>& xs) {
  if (t.is_var()) {
    auto it = xs.find(t.name());
    if (it == xs.end()) throw std::runtime_error("unbound variable " + t.name());
    return it->second;
  }
  std::vector<StateTerm> args;
  for (const auto& a : t.args()) args.push_back(subst_state(a, xs));
  return StateTerm::app(t.name(), std::move(args));
}

using Masses = std::map<StateTerm, Rational>;

Masses eval_masses(const DistTerm& theta, const std::map<std::string, StateTerm>& xs,
                   const std::map<std::string, Distribution>& mus) {
  switch (theta.kind()) {
    case DistTerm::Kind::Var:
      return mus.at(theta.name()).masses();
    case DistTerm::Kind::Dirac:
      return {{subst_state(theta.state(), xs), Rational(1)}};
    case DistTerm::Kind::Convex: {
      Masses out;
      for (const auto& p : theta.parts())
        for (const auto& [u, q] : eval_masses(p.body, xs, mus)) out[u] += p.weight * q;
      return out;
    }
    case DistTerm::Kind::Lift: {
      // Cartesian product of the argument supports, one tuple at a time.
      std::vector<std::vector<std::pair<StateTerm, Rational>>> supports;
      for (const auto& a : theta.args()) {
        const Masses ms = eval_masses(a, xs, mus);
        supports.emplace_back(ms.begin(), ms.end());
      }
      Masses out;
      std::vector<std::size_t> idx(supports.size(), 0);
      while (true) {
        std::vector<StateTerm> args;
        Rational p = 1;
        for (std::size_t i = 0; i < supports.size(); ++i) {
          args.push_back(supports[i][idx[i]].first);
          p *= supports[i][idx[i]].second;
        }
        out[StateTerm::app(theta.name(), std::move(args))] += p;
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == supports[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
      return out;
    }
  }
  return {};
}

}  // namespace

std::size_t naive_mvar(const StateTerm& t, std::string_view x) {
  const auto toks = tokens(t.str());
  return static_cast<std::size_t>(std::count(toks.begin(), toks.end(), std::string(x)));
}

JacobiResult jacobi_oracle(const Ptss& spec, std::size_t max_sweeps) {
  Table m;
  Table chi;
  for (const auto& op : spec.signature.operators()) {
    m[op.name].assign(op.arity, 0);
    chi[op.name].assign(op.arity, 0);
  }
  for (const auto& r : spec.rules) {
    const auto* f = r.fsource();
    if (!f) throw std::runtime_error("jacobi_oracle needs f-source rules");
    std::vector<std::string> tested;
    for (const auto& p : r.positive)
      for (auto& tok : tokens(p.lhs.str())) tested.push_back(tok);
    for (const auto& n : r.negative)
      for (auto& tok : tokens(n.lhs.str())) tested.push_back(tok);
    for (std::size_t i = 0; i < f->vars.size(); ++i)
      if (std::find(tested.begin(), tested.end(), f->vars[i]) != tested.end()) chi[f->op][i] = 1;
  }

  JacobiResult out;
  for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
    Table next = m;
    for (auto& [op, row] : next) std::fill(row.begin(), row.end(), 0);
    for (const auto& r : spec.rules) {
      const auto* f = r.fsource();
      for (std::size_t i = 0; i < f->vars.size(); ++i) {
        const std::string& x = f->vars[i];
        std::uint64_t v = wm_dist(m, chi, r.target, x, false);
        for (const auto& p : r.positive)
          v = sat_add(v, sat_mul(wm_state(m, p.lhs, x), wm_dist(m, chi, r.target, p.derivative, true)));
        next[f->op][i] = std::max(next[f->op][i], v);
      }
    }
    const bool same = next == m;
    m = std::move(next);
    if (same) {
      out.stable = true;
      break;
    }
  }
  out.omega = std::move(m);
  return out;
}

bool lift_oracle(const Pts& pts, const Relation& rel, const Distribution& pi, const Distribution& pi2,
                 const Rational& eps) {
  std::set<std::size_t> uni;
  for (const auto& [u, p] : pi.masses()) uni.insert(pts.index_of(u));
  for (const auto& [u, p] : pi2.masses()) uni.insert(pts.index_of(u));
  const std::vector<std::size_t> pool(uni.begin(), uni.end());
  if (pool.size() > 24) throw std::runtime_error("lift_oracle: union too large");
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pool.size()); ++mask) {
    Rational left = 0;
    std::set<StateTerm> image;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (!(mask >> k & 1)) continue;
      left += pi.at(pts.state(pool[k]).term);
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (j == pool[k] || rel.contains(pool[k], j)) image.insert(pts.state(j).term);
    }
    if (left > pi2.mass(image) + eps) return false;
  }
  return true;
}

bool is_epsilon_bisim(const Pts& pts, const Relation& rel, const Rational& eps) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j || !rel.contains(i, j)) continue;
      for (const auto& tr : pts.state(i).transitions) {
        bool answered = false;
        for (const auto& tr2 : pts.state(j).transitions)
          if (tr2.action == tr.action && lift_oracle(pts, rel, tr.target, tr2.target, eps)) answered = true;
        if (!answered) return false;
      }
    }
  }
  return true;
}

Distribution oracle_evaluate(const DistTerm& theta, const std::map<std::string, StateTerm>& xs,
                             const std::map<std::string, Distribution>& mus) {
  return Distribution::from_masses(eval_masses(theta, xs, mus));
}

std::vector<Transition> brute_transitions(const Ptss& spec, const StateTerm& t) {
  std::vector<Transition> out;
  for (const auto& r : spec.rules) {
    const auto* f = r.fsource();
    if (!f || f->op != t.name()) continue;
    std::map<std::string, StateTerm> xs;
    for (std::size_t i = 0; i < f->vars.size(); ++i) xs.emplace(f->vars[i], t.args()[i]);

    bool blocked = false;
    for (const auto& n : r.negative)
      for (const auto& tr : brute_transitions(spec, subst_state(n.lhs, xs)))
        if (tr.action == n.action) blocked = true;
    if (blocked) continue;

    std::vector<std::vector<Distribution>> choices;
    for (const auto& p : r.positive) {
      std::vector<Distribution> options;
      for (const auto& tr : brute_transitions(spec, subst_state(p.lhs, xs)))
        if (tr.action == p.action) options.push_back(tr.target);
      choices.push_back(std::move(options));
    }
    std::map<std::string, Distribution> mus;
    std::function<void(std::size_t)> pick = [&](std::size_t k) {
      if (k == choices.size()) {
        out.push_back({r.action, oracle_evaluate(r.target, xs, mus)});
        return;
      }
      for (const auto& d : choices[k]) {
        mus.insert_or_assign(r.positive[k].derivative, d);
        pick(k + 1);
      }
    };
    pick(0);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// --- Generators ------------------------------------------------------------

namespace {

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

const std::vector<std::string> kActions = {"a", "b"};

struct Gen {
  Rng& rng;
  const SpecShape& shape;
  std::vector<std::string> bases;  // constants with their own rules
  std::vector<std::string> constants;
  std::vector<std::pair<std::string, std::size_t>> ops;

  std::string constant_target() {
    static const std::vector<std::pair<std::string, std::string>> weights = {
        {"1/2", "1/2"}, {"1/3", "2/3"}, {"1/4", "3/4"}, {"3/4", "1/4"}};
    if (coin(rng, 0.5)) return "delta(" + pick(rng, bases) + ")";
    const auto& [w1, w2] = pick(rng, weights);
    std::string k1 = pick(rng, bases);
    std::string k2 = pick(rng, bases);
    if (k1 == k2) return "delta(" + k1 + ")";
    return "(" + w1 + " * delta(" + k1 + ") (+) " + w2 + " * delta(" + k2 + "))";
  }

  std::string nested_state(const std::vector<std::string>& vars) {
    const auto& [op, arity] = pick(rng, ops);
    std::string s = op + "(";
    for (std::size_t i = 0; i < arity; ++i) s += (i ? ", " : "") + (coin(rng, 0.8) ? pick(rng, vars) : pick(rng, bases));
    return s + ")";
  }

  std::string atom(const std::vector<std::string>& vars, const std::vector<std::string>& derivs) {
    const std::size_t k = uniform(rng, 0, shape.evaluable ? 2 : 3);
    if (k == 0 && !derivs.empty()) return "%" + pick(rng, derivs);
    if (k == 1) return "delta(" + pick(rng, vars) + ")";
    if (k == 3) return "delta(" + nested_state(vars) + ")";
    return "delta(" + pick(rng, bases) + ")";
  }

  std::string lift(const std::vector<std::string>& vars, const std::vector<std::string>& derivs, bool nest) {
    const auto& [op, arity] = pick(rng, ops);
    std::string s = op + "(";
    for (std::size_t i = 0; i < arity; ++i)
      s += (i ? ", " : "") + (nest && coin(rng, 0.3) ? lift(vars, derivs, false) : atom(vars, derivs));
    return s + ")";
  }

  std::string target(const std::vector<std::string>& vars, const std::vector<std::string>& derivs) {
    const bool nest = !shape.evaluable;
    const std::size_t form = uniform(rng, 0, 9);
    if (form < 3) return atom(vars, derivs);
    if (form < 7) return lift(vars, derivs, nest);
    const std::string left = coin(rng, 0.5) ? atom(vars, derivs) : lift(vars, derivs, nest);
    const std::string right = coin(rng, 0.5) ? atom(vars, derivs) : lift(vars, derivs, nest);
    return "(1/2 * " + left + " (+) 1/2 * " + right + ")";
  }

  std::string operator_rule(const std::string& name, const std::string& op, std::size_t arity) {
    std::vector<std::string> vars;
    for (std::size_t i = 1; i <= arity; ++i) vars.push_back("x" + std::to_string(i));
    std::vector<std::string> premises;
    std::vector<std::string> derivs;
    for (std::size_t i = 0; i < arity; ++i) {
      const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
      if (roll < 0.5) {
        derivs.push_back("m" + std::to_string(i + 1));
        premises.push_back(vars[i] + " -" + pick(rng, kActions) + "-> %" + derivs.back());
      } else if (roll < 0.65 && shape.negatives) {
        premises.push_back(vars[i] + " -" + pick(rng, kActions) + "-/>");
      }
    }
    if (!shape.evaluable && coin(rng, 0.3)) {
      derivs.push_back("n1");
      premises.push_back(nested_state(vars) + " -" + pick(rng, kActions) + "-> %n1");
    }
    std::string src = op + "(";
    for (std::size_t i = 0; i < arity; ++i) src += (i ? ", " : "") + vars[i];
    src += ")";
    std::string text = "rule " + name + " : ";
    for (std::size_t i = 0; i < premises.size(); ++i) text += (i ? ", " : "") + premises[i];
    text += (premises.empty() ? "|- " : " |- ") + src + " -" + pick(rng, kActions) + "-> " + target(vars, derivs) + ";\n";
    return text;
  }
};

}  // namespace

RandomSpec random_spec(Rng& rng, const SpecShape& shape) {
  Gen g{rng, shape, {"c", "d"}, {"c", "d"}, {}};
  if (shape.twins) g.constants.push_back("c2");
  const std::size_t nops = uniform(rng, 1, std::max<std::size_t>(1, shape.max_operators));
  for (std::size_t i = 1; i <= nops; ++i) g.ops.emplace_back("o" + std::to_string(i), uniform(rng, 1, 2));

  std::string text;
  for (const auto& k : g.constants) text += "op " + k + "/0;\n";
  for (const auto& [op, arity] : g.ops) text += "op " + op + "/" + std::to_string(arity) + ";\n";

  std::size_t counter = 0;
  auto fresh = [&] { return "r" + std::to_string(++counter); };
  std::vector<std::pair<std::string, std::string>> c_rules;  // (action, target)
  for (const auto& k : g.bases) {
    for (const auto& act : kActions) {
      if (!coin(rng, k == "c" ? 0.8 : 0.5)) continue;
      const std::string tgt = g.constant_target();
      text += "rule " + fresh() + " : |- " + k + " -" + act + "-> " + tgt + ";\n";
      if (k == "c") c_rules.emplace_back(act, tgt);
    }
  }
  if (shape.twins)
    for (const auto& [act, tgt] : c_rules) text += "rule " + fresh() + " : |- c2 -" + act + "-> " + tgt + ";\n";
  for (const auto& [op, arity] : g.ops) {
    const std::size_t n = uniform(rng, 1, 3);
    for (std::size_t i = 0; i < n; ++i) text += g.operator_rule(fresh(), op, arity);
  }

  RandomSpec out{text, parse_or_throw(text), g.constants, {}};
  for (const auto& [op, arity] : g.ops) out.operators.push_back(op);
  return out;
}

StateTerm random_term(Rng& rng, const RandomSpec& spec, std::size_t depth) {
  if (depth <= 1 || coin(rng, 0.35)) return StateTerm::app(pick(rng, spec.constants));
  const std::string& op = pick(rng, spec.operators);
  const std::size_t arity = spec.spec.signature.arity_of(op);
  std::vector<StateTerm> args;
  for (std::size_t i = 0; i < arity; ++i) args.push_back(random_term(rng, spec, depth - 1));
  return StateTerm::app(op, std::move(args));
}

namespace {

void count_occurrences(const StateTerm& t, const std::string& name, std::size_t& n) {
  if (!t.is_var() && t.args().empty() && t.name() == name) ++n;
  for (const auto& a : t.args()) count_occurrences(a, name, n);
}

StateTerm swap_marked(const StateTerm& t, const std::string& from, const std::string& to,
                      const std::vector<bool>& mark, std::size_t& pos) {
  if (!t.is_var() && t.args().empty() && t.name() == from) return mark[pos++] ? StateTerm::app(to) : t;
  std::vector<StateTerm> args;
  for (const auto& a : t.args()) args.push_back(swap_marked(a, from, to, mark, pos));
  return t.is_var() ? t : StateTerm::app(t.name(), std::move(args));
}

}  // namespace

StateTerm twin_swap(Rng& rng, const StateTerm& t, const std::string& from, const std::string& to) {
  std::size_t n = 0;
  count_occurrences(t, from, n);
  if (n == 0) return t;
  std::vector<bool> mark(n);
  for (std::size_t i = 0; i < n; ++i) mark[i] = coin(rng, 0.5);
  mark[uniform(rng, 0, n - 1)] = true;
  std::size_t pos = 0;
  return swap_marked(t, from, to, mark, pos);
}

Distribution random_distribution(Rng& rng, const Pts& pts, std::size_t max_support) {
  static const std::vector<std::size_t> denominators = {2, 3, 4, 6, 8, 12};
  const std::size_t k = uniform(rng, 1, std::min(max_support, pts.size()));
  std::size_t denom = pick(rng, denominators);
  while (denom < k) denom *= 2;
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> cuts(denom - 1);
  for (std::size_t i = 0; i < cuts.size(); ++i) cuts[i] = i + 1;
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(k - 1);
  cuts.push_back(0);
  cuts.push_back(denom);
  std::sort(cuts.begin(), cuts.end());
  Distribution::MassMap masses;
  for (std::size_t i = 0; i < k; ++i)
    masses[pts.state(idx[i]).term] = Rational(static_cast<long long>(cuts[i + 1] - cuts[i]), static_cast<long long>(denom));
  return Distribution::from_masses(std::move(masses));
}

Pts random_pts(Rng& rng, std::size_t n) {
  Pts pts;
  for (std::size_t i = 0; i < n; ++i) pts.add(StateTerm::app("q" + std::to_string(i)));
  for (std::size_t i = 0; i < n; ++i) {
    auto& trs = pts.state(i).transitions;
    const std::size_t count = uniform(rng, 0, 2);
    for (std::size_t k = 0; k < count; ++k) trs.push_back({pick(rng, kActions), random_distribution(rng, pts, 3)});
    std::sort(trs.begin(), trs.end());
    trs.erase(std::unique(trs.begin(), trs.end()), trs.end());
  }
  return pts;
}

Relation random_relation(Rng& rng, std::size_t n, double density) {
  Relation rel(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng, density)) rel.insert(i, j);
  return rel;
}

Rational random_eps(Rng& rng) {
  static const std::vector<long long> denominators = {1, 2, 3, 4, 6, 8, 12, 16};
  const long long d = pick(rng, denominators);
  return Rational(static_cast<long long>(uniform(rng, 0, static_cast<std::size_t>(d))), d);
}

}  // namespace ptss::testing
