#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "ptss/error.hpp"
#include "ptss/format_check.hpp"

using namespace ptss;
using testing::load_corpus;

namespace {

const RuleFormat& rule_named(const FormatReport& report, const std::string& name) {
  for (const auto& r : report.rules)
    if (r.rule == name) return r;
  FAIL("no rule " << name);
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("discriminating power") {
  const ChiTable r6 = discriminating_power(load_corpus("r6.ptss"));
  CHECK(r6.at("g", 0));
  CHECK(r6.at("g", 1));

  const ChiTable r5 = discriminating_power(load_corpus("r5.ptss"));
  // g3 has only an axiom, g2 has no rules at all.
  CHECK_FALSE(r5.at("g3", 0));
  CHECK_FALSE(r5.at("g3", 1));
  CHECK_FALSE(r5.at("g2", 0));
  CHECK_FALSE(r5.at("g2", 1));
  CHECK(r5.at("f", 0));

  // A negative premise tests its argument too.
  CHECK(discriminating_power(load_corpus("footnote.ptss")).at("g", 0));
  CHECK_THROWS_AS(r5.at("nope", 0), Error);
}

TEST_CASE("per-rule format sums") {
  const FormatReport t1 = check_entmuft_spec(load_corpus("table1.ptss"));

  const auto& par = rule_named(t1, "par");
  CHECK(par.pass);

  const auto& case2 = rule_named(t1, "case2");
  CHECK_FALSE(case2.pass);
  REQUIRE(case2.violations.size() == 1);
  CHECK(case2.violations[0].var == "x");
  CHECK(case2.violations[0].sum == 2);

  // delta(x) counts once and the derivative once more.
  const auto& case6 = rule_named(t1, "case6");
  CHECK_FALSE(case6.pass);
  CHECK(case6.violations[0].sum == 2);

  for (int k = 1; k <= 7; ++k) {
    const auto& r = rule_named(t1, "case" + std::to_string(k));
    INFO(r.rule);
    CHECK_FALSE(r.pass);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].var == "x");
    CHECK(r.violations[0].sum == 2);
    CHECK(r.violations[0].limit == 1);
  }
  CHECK_FALSE(t1.overall);
}

TEST_CASE("standard operators are non-expansive in format") {
  const FormatReport report = check_entmuft_spec(load_corpus("std_ops.ptss"));
  CHECK(report.overall);
  for (const auto& r : report.rules) CHECK(r.violations.empty());
}

TEST_CASE("replication fails the format") {
  const FormatReport report = check_entmuft_spec(load_corpus("replication.ptss"));
  CHECK_FALSE(rule_named(report, "repl").pass);
  CHECK_FALSE(rule_named(report, "prepl").pass);
  CHECK(rule_named(report, "par").pass);
}

TEST_CASE("empty rule set passes") {
  const FormatReport report = check_entmuft_spec(testing::parse_or_throw("op c/0;"));
  CHECK(report.overall);
  CHECK(report.rules.empty());
}
