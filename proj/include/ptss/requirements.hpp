#pragma once

// Compositionality requirements decided from the expansivity table. All
// verdicts are sufficient conditions: NotGuaranteed is not a proof of
// expansiveness.

#include <string>
#include <string_view>
#include <vector>

#include "ptss/expansivity.hpp"

namespace ptss {

struct Requirement {
  enum class Kind { NonExpansive, ArgIndependent, PNorm };

  Kind kind = Kind::NonExpansive;
  std::string op;       // ArgIndependent only
  std::size_t arg = 0;  // ArgIndependent only, zero-based
  Rational p = 1;       // PNorm only, must exceed 1

  static Requirement non_expansive() { return {}; }
  static Requirement arg_independent(std::string op, std::size_t arg) {
    return {Kind::ArgIndependent, std::move(op), arg, 1};
  }
  static Requirement p_norm(Rational p) { return {Kind::PNorm, {}, 0, std::move(p)}; }
};

enum class Verdict { Pass, NotGuaranteed };

struct RequirementVerdict {
  Requirement::Kind kind;
  std::string op;
  Verdict verdict;
};

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(Requirement::Kind k) noexcept;

/// One verdict per operator (or one for ArgIndependent). Throws
/// Error(UnknownOperator) or Error(InvalidInput).
std::vector<RequirementVerdict> check_requirement(const ExpansivityTable& table, const Requirement& req);

}  // namespace ptss
