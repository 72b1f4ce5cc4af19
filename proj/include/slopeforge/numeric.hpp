#pragma once

// Exact rationals for breakpoints and map values, high-precision reals for
// eigenvector data and the semiconjugacy.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <string_view>

namespace slopeforge {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

inline constexpr unsigned kDefaultPrecisionBits = 128;

/// Sets the mantissa width used for every Real created afterwards.
void set_precision_bits(unsigned bits);
unsigned precision_bits();

/// Reads SLOPEFORGE_PRECISION (mantissa bits) if set, else applies the default.
/// Returns the precision in effect.
unsigned init_precision_from_env();

/// Parses `p/q`, an integer literal, or a plain decimal literal (`-0.375`).
/// Throws ParseError on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Lowest-terms `p/q`, or `p` when the denominator is 1.
std::string to_string(const Rational& r);

/// Decimal rendering with `digits` significant digits.
std::string format_decimal(const Real& x, int digits = 15);
std::string format_decimal(const Rational& r, int digits = 15);

Real to_real(const Rational& r);

/// Exact rational value of a finite Real (a dyadic fraction).
Rational to_rational(const Real& x);

double to_double(const Rational& r);

/// Least common multiple of two positive integers.
Integer lcm(const Integer& a, const Integer& b);

inline Integer numerator(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer denominator(const Rational& r) { return boost::multiprecision::denominator(r); }

}  // namespace slopeforge
