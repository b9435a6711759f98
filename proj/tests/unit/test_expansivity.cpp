#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "ptss/error.hpp"
#include "ptss/expansivity.hpp"
#include "ptss/requirements.hpp"

using namespace ptss;
using testing::load_corpus;

namespace {

const NInfty kInf = NInfty::infinity();

std::vector<NInfty> row(const ExpansivityTable& t, const std::string& op) {
  std::vector<NInfty> out;
  for (std::size_t i = 0; i < t.signature.arity_of(op); ++i) out.push_back(t.at(op, i));
  return out;
}

std::vector<NInfty> nat(std::initializer_list<std::uint64_t> xs) {
  std::vector<NInfty> out;
  for (auto x : xs) out.emplace_back(x);
  return out;
}

}  // namespace

TEST_CASE("extended naturals saturate") {
  CHECK(NInfty(2) + NInfty(3) == NInfty(5));
  CHECK(NInfty(2) * NInfty(3) == NInfty(6));
  CHECK((NInfty(1) + kInf).is_inf());
  CHECK(NInfty(0) * kInf == NInfty(0));
  CHECK(kInf * NInfty(0) == NInfty(0));
  CHECK((NInfty(2) * kInf).is_inf());
  CHECK((NInfty(UINT64_MAX) + NInfty(1)).is_inf());
  CHECK((NInfty(UINT64_MAX / 2 + 1) * NInfty(2)).is_inf());
  CHECK(NInfty(100) < kInf);
  CHECK(max(NInfty(3), NInfty(7)) == NInfty(7));
}

TEST_CASE("weighted multiplicity in state terms") {
  const Signature sig = load_corpus("table1.ptss").signature;
  AnalyzerState m = AnalyzerState::bottom(sig);
  m.set("f1", 0, NInfty(9));
  const Variable x = Variable::state("x");
  CHECK(weighted_multiplicity(m, StateTerm::var("x"), x) == NInfty(1));

  m.set("par", 0, NInfty(1));
  m.set("par", 1, NInfty(1));
  const StateTerm xx = StateTerm::app("par", {StateTerm::var("x"), StateTerm::var("x")});
  CHECK(weighted_multiplicity(m, xx, x) == NInfty(2));

  AnalyzerState zero = AnalyzerState::bottom(sig);
  CHECK(weighted_multiplicity(zero, xx, x) == NInfty(0));
}

TEST_CASE("weighted multiplicity in distribution terms") {
  const Ptss r6 = load_corpus("r6.ptss");
  const ChiTable chi = discriminating_power(r6);
  const AnalyzerState m = AnalyzerState::bottom(r6.signature);
  const Variable mu = Variable::dist("m");
  CHECK(weighted_multiplicity(m, chi, DistTerm::var("m"), mu) == NInfty(1));
  // omega(g) = 0 but chi(g) = 1 floors each argument at weight one.
  CHECK(weighted_multiplicity(m, chi, r6.rules[2].target, mu) == NInfty(2));

  const Ptss t1 = load_corpus("table1.ptss");
  AnalyzerState mt = AnalyzerState::bottom(t1.signature);
  mt.set("par", 0, NInfty(1));
  mt.set("par", 1, NInfty(1));
  const Rule& case7 = t1.rules.back();
  REQUIRE(case7.name == "case7");
  CHECK(weighted_multiplicity(mt, discriminating_power(t1), case7.target, mu) == NInfty(2));
}

TEST_CASE("one application of the monotone map") {
  const Ptss r2 = load_corpus("r2.ptss");
  const ChiTable chi = discriminating_power(r2);
  AnalyzerState s = AnalyzerState::bottom(r2.signature);
  for (int i = 0; i < 5; ++i) s = apply_m(r2, chi, s);
  CHECK(s.at("g", 0) == NInfty(1));
  CHECK(s.at("g", 1) == NInfty(1));
  CHECK(s.at("f", 0) == NInfty(2));
  CHECK(apply_m(r2, chi, s) == s);

  const Ptss r5 = load_corpus("r5.ptss");
  AnalyzerState top = AnalyzerState::top(r5.signature);
  const AnalyzerState once = apply_m(r5, discriminating_power(r5), top);
  CHECK(once.at("g2", 0) == NInfty(0));
  CHECK(once.at("g2", 1) == NInfty(0));

  const Ptss xs = testing::parse_or_throw("op c/0; rule : |- x -a-> delta(x);");
  CHECK_THROWS_AS(apply_m(xs, ChiTable(xs.signature), AnalyzerState::bottom(xs.signature)), Error);
}

TEST_CASE("lattice operations") {
  const Signature sig = load_corpus("r2.ptss").signature;
  AnalyzerState a = AnalyzerState::bottom(sig);
  AnalyzerState b = AnalyzerState::bottom(sig);
  a.set("g", 0, NInfty(3));
  b.set("g", 1, kInf);
  CHECK(a.unknowns() == 3);
  CHECK(AnalyzerState::bottom(sig).leq(a));
  CHECK(a.leq(AnalyzerState::top(sig)));
  CHECK_FALSE(a.leq(b));
  const AnalyzerState j = a.join(b);
  CHECK(j.at("g", 0) == NInfty(3));
  CHECK(j.at("g", 1).is_inf());
  CHECK(a.meet(b) == AnalyzerState::bottom(sig));
}

TEST_CASE("least fixed points on the example specifications") {
  const auto r2 = lfp_expansivity(load_corpus("r2.ptss"));
  CHECK(r2.converged);
  CHECK(row(r2, "f") == nat({2}));
  CHECK(row(r2, "g") == nat({1, 1}));
  CHECK(r2.widened.empty());

  const auto r3 = lfp_expansivity(load_corpus("r3.ptss"));
  CHECK(row(r3, "h") == nat({1, 1, 1, 1}));
  CHECK(row(r3, "g") == nat({2, 2}));
  CHECK(row(r3, "f") == nat({4}));

  const auto r4 = lfp_expansivity(load_corpus("r4.ptss"));
  CHECK(r4.at("f", 0).is_inf());
  REQUIRE(r4.widened.size() == 1);
  CHECK(r4.widened[0].first == "f");

  const auto r5 = lfp_expansivity(load_corpus("r5.ptss"));
  for (const auto& op : r5.signature.operators())
    for (std::size_t i = 0; i < op.arity; ++i) CHECK(r5.at(op.name, i) == NInfty(0));

  const auto r6 = lfp_expansivity(load_corpus("r6.ptss"));
  CHECK(row(r6, "f") == nat({2}));
  CHECK(row(r6, "g") == nat({0, 0}));
  CHECK(r6.chi.at("g", 0));

  const auto repl = lfp_expansivity(load_corpus("replication.ptss"));
  CHECK(repl.at("repl", 0).is_inf());
  CHECK(repl.at("prepl", 0).is_inf());
  CHECK(repl.at("par", 0) == NInfty(1));

  const auto t1 = lfp_expansivity(load_corpus("table1.ptss"));
  for (int k = 1; k <= 7; ++k) CHECK(t1.at("f" + std::to_string(k), 0) == NInfty(2));
}

TEST_CASE("analysis expands variable sources") {
  // Alone, fa gives omega(f) = 1. The expanded variable-source rule adds
  // omega(f) for delta(f(x1)) and omega(f) through the premise on f(x1), so
  // omega(f) >= 2 * omega(f) and the entry diverges.
  const Ptss spec = testing::parse_or_throw(
      "op c/0; op f/1;"
      "rule fa : y -a-> %n |- f(y) -a-> %n;"
      "rule : x -a-> %m |- x -b-> (1/2 * %m (+) 1/2 * delta(x));");
  const auto table = lfp_expansivity(spec);
  CHECK(table.at("f", 0).is_inf());
  const auto oracle = testing::jacobi_oracle(expand_ntmuxt(spec), 200);
  CHECK(oracle.omega.at("f")[0] == testing::kOracleCap);

  // Without the variable-source rule the entry stays at one.
  const auto base = lfp_expansivity(testing::parse_or_throw("op c/0; op f/1; rule fa : y -a-> %n |- f(y) -a-> %n;"));
  CHECK(base.at("f", 0) == NInfty(1));
}

TEST_CASE("an entry widened before its cause keeps infinity") {
  // With every chi equal to 1: omega(o1) = 1 + max(omega(o2,2), 1),
  // omega(o2,2) = max(omega(o3), 1) and omega(o3) = max(omega(o1), 1), so the
  // cycle gains one per round and diverges. o2 argument 2 is widened first
  // and is recomputed as finite until o1 and o3 catch up.
  const Ptss spec = testing::parse_or_throw(
      "op c/0; op d/0; op o1/1; op o2/2; op o3/1; op o4/1;"
      "rule : |- c -a-> delta(d);"
      "rule : x1 -b-> %m1 |- o1(x1) -a-> (1/2 * delta(c) (+) 1/2 * o2(%m1, %m1));"
      "rule : x1 -a-> %m1, x2 -a-> %m2 |- o2(x1, x2) -b-> (1/2 * delta(x1) (+) 1/2 * o3(%m2));"
      "rule : |- o3(x1) -a-> o2(delta(c), delta(c));"
      "rule : x1 -b-> %m1 |- o3(x1) -a-> delta(x1);"
      "rule : |- o3(x1) -a-> (1/2 * delta(d) (+) 1/2 * o1(delta(x1)));"
      "rule : x1 -a-> %m1 |- o4(x1) -b-> (1/2 * o4(delta(x1)) (+) 1/2 * delta(c));");
  const auto table = lfp_expansivity(spec);
  CHECK(table.at("o1", 0).is_inf());
  CHECK(table.at("o2", 0) == NInfty(1));
  CHECK(table.at("o2", 1).is_inf());
  CHECK(table.at("o3", 0).is_inf());
  CHECK(table.at("o4", 0) == NInfty(1));
  CHECK(apply_m(spec, table.chi, table.omega) == table.omega);

  // Linear growth: the oracle is still climbing after its sweep limit.
  const auto oracle = testing::jacobi_oracle(spec, 1000);
  CHECK_FALSE(oracle.stable);
  CHECK(oracle.omega.at("o1")[0] > 300);  // one step per three sweeps
}

TEST_CASE("expansivity bound") {
  const auto r2 = lfp_expansivity(load_corpus("r2.ptss"));
  const std::vector<Rational> quarter = {Rational(1, 4)};
  CHECK(expansivity_bound(r2, "f", quarter) == Rational(7, 16));
  const std::vector<Rational> none = {Rational(0)};
  CHECK(expansivity_bound(r2, "f", none) == 0);
  const std::vector<Rational> zeros = {Rational(0), Rational(0)};
  CHECK(expansivity_bound(r2, "g", zeros) == 0);
  const std::vector<Rational> mixed = {Rational(1, 4), Rational(1, 2)};
  CHECK(expansivity_bound(r2, "g", mixed) == Rational(5, 8));

  const auto r4 = lfp_expansivity(load_corpus("r4.ptss"));
  CHECK(expansivity_bound(r4, "f", quarter) == 1);
  CHECK(expansivity_bound(r4, "f", none) == 0);

  CHECK_THROWS_AS(expansivity_bound(r2, "f", zeros), Error);
  const std::vector<Rational> big = {Rational(3, 2)};
  CHECK_THROWS_AS(expansivity_bound(r2, "f", big), Error);
}

TEST_CASE("requirements") {
  const auto std_ops = lfp_expansivity(load_corpus("std_ops.ptss"));
  CHECK(row(std_ops, "seq") == nat({1, 1}));
  for (const auto& v : check_requirement(std_ops, Requirement::non_expansive())) {
    INFO(v.op);
    CHECK(v.verdict == Verdict::Pass);
  }
  bool seq_seen = false;
  for (const auto& v : check_requirement(std_ops, Requirement::p_norm(2))) {
    if (v.op != "seq") continue;
    seq_seen = true;
    CHECK(v.verdict == Verdict::NotGuaranteed);
  }
  CHECK(seq_seen);

  const auto r5 = lfp_expansivity(load_corpus("r5.ptss"));
  const auto ind = check_requirement(r5, Requirement::arg_independent("g2", 0));
  REQUIRE(ind.size() == 1);
  CHECK(ind[0].verdict == Verdict::Pass);

  const auto r2 = lfp_expansivity(load_corpus("r2.ptss"));
  bool f_flagged = false;
  for (const auto& v : check_requirement(r2, Requirement::non_expansive()))
    if (v.op == "f") f_flagged = v.verdict == Verdict::NotGuaranteed;
  CHECK(f_flagged);
  CHECK(check_requirement(r2, Requirement::arg_independent("f", 0))[0].verdict == Verdict::NotGuaranteed);

  CHECK_THROWS_AS(check_requirement(r2, Requirement::arg_independent("f", 3)), Error);
  CHECK_THROWS_AS(check_requirement(r2, Requirement::arg_independent("nope", 0)), Error);
  CHECK_THROWS_AS(check_requirement(r2, Requirement::p_norm(1)), Error);
}
