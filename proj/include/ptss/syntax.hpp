#pragma once

// The `.ptss` rule language: data model for simple rules and specifications,
// the parser, rule validation, x-source expansion and the evaluability
// classification used by the semantics engine.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ptss/terms.hpp"

namespace ptss {

struct SourceLocation {
  std::size_t line = 0;
  std::size_t col = 0;
  auto operator<=>(const SourceLocation&) const = default;
};

/// `lhs -action-> %derivative`
struct PositivePremise {
  StateTerm lhs;
  std::string action;
  std::string derivative;
  bool operator==(const PositivePremise&) const = default;
};

/// `lhs -action-/>`
struct NegativePremise {
  StateTerm lhs;
  std::string action;
  bool operator==(const NegativePremise&) const = default;
};

/// Conclusion source `f(x1,...,xn)`.
struct FSource {
  std::string op;
  std::vector<std::string> vars;
  bool operator==(const FSource&) const = default;
};

/// Conclusion source that is a bare variable.
struct XSource {
  std::string var;
  bool operator==(const XSource&) const = default;
};

using Source = std::variant<FSource, XSource>;

struct Rule {
  std::string name;
  std::vector<PositivePremise> positive;
  std::vector<NegativePremise> negative;
  Source source;
  std::string action;
  DistTerm target;
  SourceLocation loc{};

  const FSource* fsource() const noexcept { return std::get_if<FSource>(&source); }
  bool has_fsource() const noexcept { return fsource() != nullptr; }
  /// Source variables in argument order (a single variable for x-sources).
  std::vector<std::string> source_vars() const;
  /// Derivatives of the positive premises.
  std::vector<std::string> derivatives() const;

  /// Structural equality; the location is ignored.
  friend bool operator==(const Rule& a, const Rule& b);
};

struct Ptss {
  Signature signature;
  std::vector<Rule> rules;

  /// Union of all actions mentioned by the rules.
  std::set<std::string> actions() const;
  /// Rules whose source operator is `op` (x-source rules are never included).
  std::vector<const Rule*> rules_for(std::string_view op) const;
  bool has_xsource_rules() const;

  friend bool operator==(const Ptss& a, const Ptss& b) {
    return a.signature == b.signature && a.rules == b.rules;
  }
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  SourceLocation loc;
  std::string message;
};

class Diagnostics {
 public:
  void add(Severity severity, std::string code, SourceLocation loc, std::string message);
  void append(const Diagnostics& other);
  /// Orders by location, then code.
  void sort();

  bool has_errors() const;
  bool empty() const noexcept { return items_.empty(); }
  std::size_t size() const noexcept { return items_.size(); }
  const std::vector<Diagnostic>& items() const noexcept { return items_; }
  bool contains_code(std::string_view code) const;

 private:
  std::vector<Diagnostic> items_;
};

struct ParseOptions {
  /// Overrides for `param` declarations.
  std::map<std::string, Rational, std::less<>> params;
};

struct ParseResult {
  std::optional<Ptss> spec;
  Diagnostics diagnostics;
  explicit operator bool() const noexcept { return spec.has_value(); }
};

ParseResult parse_spec(std::string_view text, const ParseOptions& options = {});

/// Simple-format constraints on one rule. Codes: DUP_DERIVATIVE,
/// DUP_SOURCE_VAR, ARITY, LOOKAHEAD, UNKNOWN_OP.
Diagnostics validate_simple(const Rule& rule, const Signature& sig);

/// Replaces every x-source rule by one f-source rule per declared operator.
Ptss expand_ntmuxt(const Ptss& spec);

/// Warnings for rules the semantics engine cannot execute: NEG_NONVAR and
/// FREE_VAR. Such specifications remain valid for static analysis.
Diagnostics classify_evaluable(const Ptss& spec);

std::string render(const Rule& rule);
/// Canonical source text; parsing it yields an equal Ptss.
std::string render(const Ptss& spec);

/// Parses a closed state term whose operators must be declared in `sig`.
/// Throws Error(InvalidInput).
StateTerm parse_term(std::string_view text, const Signature& sig);
/// Parses a closed state term without a signature: every identifier is an
/// operator. Throws Error(InvalidInput).
StateTerm parse_closed_term(std::string_view text);

}  // namespace ptss
