#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace dae {

using Rational = boost::rational<std::int64_t>;

/// Parses "12", "2.5", "-0.125" or "7/3" exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Shortest exact rendering: "3", "5/2".
std::string to_string(const Rational& r);

/// Decimal rendering with the given number of fractional digits.
std::string to_decimal(const Rational& r, int digits = 6);

}  // namespace dae
