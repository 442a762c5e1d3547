#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gexp {

/// Exact rational scalar used for every measure, length and expansion
/// constant. Canonical form is maintained by GMP.
using Rational = mpq_class;

/// Accepts "p/q", integers, and finite decimals such as "0.99" or "1e-3";
/// decimals are converted exactly (0.99 == 99/100).
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" when q == 1).
std::string to_string(const Rational& q);

double to_double(const Rational& q);

/// Exact conversion of a finite double.
Rational from_double(double x);

/// sqrt(q) when q is the square of a rational, otherwise false.
bool exact_sqrt(const Rational& q, Rational& out);

/// A rational r with r >= sqrt(q) and r - sqrt(q) < 2^-bits * max(1, sqrt(q)).
Rational sqrt_upper(const Rational& q, unsigned bits = 96);
/// A rational r with r <= sqrt(q), same precision as sqrt_upper.
Rational sqrt_lower(const Rational& q, unsigned bits = 96);

/// Smallest integer m >= 0 with base^m >= target, for base > 1, target > 0.
std::uint64_t min_power_at_least(const Rational& base, const Rational& target);

Rational rmin(const Rational& a, const Rational& b);
Rational rmax(const Rational& a, const Rational& b);

}  // namespace gexp
