#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "sofic/errors.hpp"

namespace sofic {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Integer numerator(const Rational& q) {
  return boost::multiprecision::numerator(q);
}

inline Integer denominator(const Rational& q) {
  return boost::multiprecision::denominator(q);
}

/// Always "p/q" in lowest terms, including "0/1" and "1/1".
inline std::string to_string(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

namespace detail {

inline Integer parse_integer_text(std::string_view text, std::string_view what) {
  std::string_view digits = text;
  bool negative = false;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
    negative = digits.front() == '-';
    digits.remove_prefix(1);
  }
  if (digits.empty()) {
    throw ParseError("empty " + std::string(what) + " in '" + std::string(text) + "'");
  }
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
  }
  Integer value{std::string(digits)};
  return negative ? Integer(-value) : value;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses an arbitrary-precision integer literal such as "-42".
inline Integer parse_integer(std::string_view text) {
  return detail::parse_integer_text(detail::trim(text), "integer");
}

/// Parses "p/q" or "p". Decimal notation is rejected: every epsilon is exact.
inline Rational parse_rational(std::string_view text) {
  text = detail::trim(text);
  if (text.find('.') != std::string_view::npos || text.find('e') != std::string_view::npos ||
      text.find('E') != std::string_view::npos) {
    throw ParseError("decimal rationals are not accepted, write p/q: '" + std::string(text) + "'");
  }
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return Rational(detail::parse_integer_text(text, "rational"));
  }
  Integer p = detail::parse_integer_text(detail::trim(text.substr(0, slash)), "numerator");
  Integer q = detail::parse_integer_text(detail::trim(text.substr(slash + 1)), "denominator");
  if (q == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return Rational(p, q);
}

inline Rational pow(const Rational& base, std::size_t exponent) {
  Rational result(1);
  Rational b = base;
  while (exponent > 0) {
    if (exponent & 1U) result *= b;
    b *= b;
    exponent >>= 1U;
  }
  return result;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Largest dyadic k/2^halvings in [lo, hi] satisfying a predicate that is
/// true at lo, false at hi and monotone (true on a prefix).
template <typename Predicate>
Rational bisect_dyadic(Rational lo, Rational hi, int halvings, Predicate&& holds) {
  for (int step = 0; step < halvings; ++step) {
    Rational mid = (lo + hi) / 2;
    if (holds(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace sofic
