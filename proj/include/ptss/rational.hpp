#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace ptss {

// Expression templates are disabled so that arithmetic always yields values.
using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

/// Renders `n/d`, or plain `n` when the denominator is one.
std::string to_string(const Rational& q);

/// Accepts `n`, `n/d` and finite decimals such as `0.25` (converted exactly).
std::optional<Rational> parse_rational(std::string_view text);

Rational pow(const Rational& base, std::uint64_t exponent);

inline Integer numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

}  // namespace ptss
