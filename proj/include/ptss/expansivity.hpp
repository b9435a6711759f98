#pragma once

// Expansivity analysis: how much each operator argument can multiply the
// approximate-bisimulation distance, computed as the least fixed point of a
// monotone system over the naturals extended with infinity.

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptss/format_check.hpp"
#include "ptss/rational.hpp"
#include "ptss/syntax.hpp"

namespace ptss {

/// Element of N ∪ {inf}. Sums and products saturate to inf on overflow;
/// 0 * inf = 0.
class NInfty {
 public:
  constexpr NInfty() = default;
  constexpr explicit NInfty(std::uint64_t n) : n_(n) {}
  static constexpr NInfty infinity() {
    NInfty v;
    v.inf_ = true;
    return v;
  }

  constexpr bool is_inf() const noexcept { return inf_; }
  /// Finite value; meaningless for inf.
  constexpr std::uint64_t value() const noexcept { return n_; }
  std::string str() const { return inf_ ? "inf" : std::to_string(n_); }

  friend NInfty operator+(NInfty a, NInfty b) noexcept;
  friend NInfty operator*(NInfty a, NInfty b) noexcept;
  friend NInfty max(NInfty a, NInfty b) noexcept { return a < b ? b : a; }

  // inf_ is compared first, so every finite value is below inf.
  friend constexpr auto operator<=>(const NInfty&, const NInfty&) = default;

 private:
  bool inf_ = false;
  std::uint64_t n_ = 0;
};

/// The operator-argument component of the analysis lattice. The term
/// component is never materialised; it is recomputed structurally from this
/// map by weighted_multiplicity.
class AnalyzerState {
 public:
  using Entries = std::map<std::string, std::vector<NInfty>, std::less<>>;

  AnalyzerState() = default;
  static AnalyzerState bottom(const Signature& sig);
  static AnalyzerState top(const Signature& sig);

  NInfty at(std::string_view op, std::size_t arg) const;
  void set(std::string_view op, std::size_t arg, NInfty value);
  const Entries& entries() const noexcept { return entries_; }
  std::size_t unknowns() const;

  /// Pointwise order.
  bool leq(const AnalyzerState& other) const;
  AnalyzerState join(const AnalyzerState& other) const;
  AnalyzerState meet(const AnalyzerState& other) const;

  bool operator==(const AnalyzerState&) const = default;

 private:
  Entries entries_;
};

/// Occurrences of `zeta` in a state term, weighted by the expansivity of the
/// operators above each occurrence.
NInfty weighted_multiplicity(const AnalyzerState& m, const StateTerm& t, const Variable& zeta);

/// Distribution-term variant: convex parts take the maximum, lifted
/// operators weigh each argument by max(expansivity, discriminating power).
NInfty weighted_multiplicity(const AnalyzerState& m, const ChiTable& chi, const DistTerm& theta,
                             const Variable& zeta);

/// Contribution of one f-rule to the expansivity of its source argument `arg`.
NInfty rule_expansivity(const Rule& rule, std::size_t arg, const AnalyzerState& m, const ChiTable& chi);

/// One Jacobi application of the monotone map. Requires f-source rules only.
AnalyzerState apply_m(const Ptss& spec, const ChiTable& chi, const AnalyzerState& state);

struct ExpansivityTable {
  Signature signature;
  AnalyzerState omega;
  ChiTable chi;
  bool converged = false;
  std::size_t sweeps = 0;
  /// (operator, zero-based argument) entries forced to inf by widening.
  std::vector<std::pair<std::string, std::size_t>> widened;

  NInfty at(std::string_view op, std::size_t arg) const { return omega.at(op, arg); }
};

/// Gauss-Seidel Kleene iteration from bottom. With n unknowns, an entry that
/// still grows in sweep n+1 or later is widened to inf. The result is checked
/// to be a fixed point; failure throws Error(NotAFixpoint). X-source rules are
/// expanded first.
ExpansivityTable lfp_expansivity(const Ptss& spec);

/// 1 - prod_i (1 - eps_i)^omega(op, i), with (1-eps)^inf = 0 for eps > 0 and
/// 1 for eps = 0.
Rational expansivity_bound(const ExpansivityTable& table, std::string_view op, std::span<const Rational> eps);

}  // namespace ptss
