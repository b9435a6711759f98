#pragma once

// Local syntactic checks: discriminating power of operator arguments and the
// per-rule non-expansivity format (source variables and their derivatives
// may be used at most once, counted with multiplicity through premises).

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ptss/syntax.hpp"

namespace ptss {

/// chi(f, i) = 1 iff argument i of f is tested by a premise of some f-rule.
class ChiTable {
 public:
  ChiTable() = default;
  explicit ChiTable(const Signature& sig);

  /// Zero-based argument index. Throws Error(UnknownOperator).
  bool at(std::string_view op, std::size_t arg) const;
  void set(std::string_view op, std::size_t arg, bool value);
  const std::vector<bool>& row(std::string_view op) const;

  bool operator==(const ChiTable&) const = default;

 private:
  std::map<std::string, std::vector<bool>, std::less<>> rows_;
};

ChiTable discriminating_power(const Ptss& spec);

struct FormatViolation {
  std::string var;
  std::size_t sum = 0;
  std::size_t limit = 1;
};

struct RuleFormat {
  std::string rule;
  bool pass = true;
  std::vector<FormatViolation> violations;
};

struct FormatReport {
  std::vector<RuleFormat> rules;
  bool overall = true;
};

/// For each source variable x: mvar(target, x) + sum over positive premises
/// of mvar(lhs, x) * mvar(target, derivative) must not exceed 1.
RuleFormat check_entmuft_rule(const Rule& rule);
FormatReport check_entmuft_spec(const Ptss& spec);

}  // namespace ptss
