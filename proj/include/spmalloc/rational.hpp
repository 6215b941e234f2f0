#pragma once

/// @file rational.hpp
/// Exact quantities. Table values (pJ, mW, ns, mm²) are decimal literals, so
/// every physical quantity in the library is an exact rational; decimal text
/// is produced only at the reporting boundary.

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include <boost/multiprecision/cpp_int.hpp>

#include "spmalloc/error.hpp"

namespace spmalloc {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "12", "-0.083", "8.4809e7" or "p/q" exactly.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] {
    return ConfigError("invalid number '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw fail();
    return num / den;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  BigInt digits = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      seen_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw fail();

  long exponent = 0;
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') throw fail();
    ++pos;
    std::string_view rest = text.substr(pos);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), exponent);
    if (ec != std::errc{} || end != rest.data() + rest.size()) throw fail();
  }
  exponent -= frac_digits;
  if (exponent > 4000 || exponent < -4000) throw fail();

  Rational value(digits);
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) {
    value /= Rational(scale);
  } else {
    value *= Rational(scale);
  }
  return negative ? Rational(-value) : value;
}

/// Converts a double to the rational denoted by its shortest round-trip
/// decimal form, so that a JSON `2.258` becomes exactly 2258/1000.
inline Rational rational_from_double(double value) {
  std::array<char, 64> buffer{};
  auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{}) throw ConfigError("cannot convert number");
  return parse_rational(std::string_view(buffer.data(), static_cast<std::size_t>(end - buffer.data())));
}

/// Fixed-point rendering with `digits` fractional digits, rounding half away
/// from zero.
inline std::string to_fixed(const Rational& value, int digits = 3) {
  const bool negative = value < 0;
  const Rational magnitude = negative ? Rational(-value) : value;
  const BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(digits));
  const Rational scaled = magnitude * Rational(scale);
  const BigInt num = boost::multiprecision::numerator(scaled);
  const BigInt den = boost::multiprecision::denominator(scaled);
  BigInt q = num / den;
  const BigInt r = num % den;
  if (2 * r >= den) q += 1;

  std::string int_part = BigInt(q / scale).str();
  std::string frac_part = BigInt(q % scale).str();
  if (static_cast<int>(frac_part.size()) < digits) {
    frac_part.insert(0, static_cast<std::size_t>(digits) - frac_part.size(), '0');
  }
  std::string out = (negative && q != 0) ? "-" : "";
  out += int_part;
  if (digits > 0) out += "." + frac_part;
  return out;
}

/// Lossless text: a terminating decimal when one exists, else "p/q".
inline std::string to_exact_string(const Rational& value) {
  BigInt den = boost::multiprecision::denominator(value);
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0) { den /= 2; ++twos; }
  while (den % 5 == 0) { den /= 5; ++fives; }
  if (den != 1) {
    return boost::multiprecision::numerator(value).str() + "/" +
           boost::multiprecision::denominator(value).str();
  }
  int digits = twos > fives ? twos : fives;
  std::string text = to_fixed(value, digits);
  if (digits > 0) {
    while (text.back() == '0') text.pop_back();
    if (text.back() == '.') text.pop_back();
  }
  return text;
}

inline double to_double(const Rational& value) { return value.convert_to<double>(); }

}  // namespace spmalloc
