#include "ptss/rational.hpp"
#include "ptss/error.hpp"

#include <cctype>

namespace ptss {

std::string to_string(const Rational& q) {
  const Integer den = denominator_of(q);
  if (den == 1) return numerator_of(q).str();
  return numerator_of(q).str() + "/" + den.str();
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// Boost reads a leading zero as an octal prefix, so digits go in without one.
Integer decimal_integer(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? Integer(0) : Integer(std::string(digits.substr(first)));
}

std::optional<Rational> parse_decimal(std::string_view s) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos) {
    if (!all_digits(s)) return std::nullopt;
    return Rational(decimal_integer(s));
  }
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = s.substr(dot + 1);
  if (!all_digits(whole) || !all_digits(frac)) return std::nullopt;
  Integer scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  const Integer digits = decimal_integer(std::string(whole) + std::string(frac));
  return Rational(digits, scale);
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  std::optional<Rational> value;
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    value = parse_decimal(text);
  } else {
    auto num = parse_decimal(text.substr(0, slash));
    auto den = parse_decimal(text.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    value = *num / *den;
  }
  if (value && negative) *value = -*value;
  return value;
}

Rational pow(const Rational& base, std::uint64_t exponent) {
  Rational result = 1;
  Rational square = base;
  while (exponent > 0) {
    if (exponent & 1U) result *= square;
    exponent >>= 1U;
    if (exponent > 0) square *= square;
  }
  return result;
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidTerm: return "InvalidTerm";
    case ErrorCode::OpenTerm: return "OpenTerm";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorCode::NotAFixpoint: return "NotAFixpoint";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotEvaluable: return "NotEvaluable";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::IncompleteFragment: return "IncompleteFragment";
  }
  return "Unknown";
}

}  // namespace ptss
