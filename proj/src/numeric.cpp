#include "slopeforge/numeric.hpp"

#include "slopeforge/error.hpp"

#include <mpfr.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace slopeforge {

namespace {

unsigned g_precision_bits = 0;

unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Boost reads a leading 0 as an octal prefix, so strip it first.
Integer decimal_integer(std::string_view digits) {
  const std::size_t first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return Integer(0);
  return Integer(std::string(digits.substr(first)));
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::budget: return "budget";
    case ErrorKind::convergence: return "non-convergence";
    case ErrorKind::verification: return "verification";
  }
  return "unknown";
}

void set_precision_bits(unsigned bits) {
  if (bits < 53) bits = 53;
  g_precision_bits = bits;
  Real::default_precision(digits10_for_bits(bits));
}

unsigned precision_bits() {
  if (g_precision_bits == 0) set_precision_bits(kDefaultPrecisionBits);
  return g_precision_bits;
}

unsigned init_precision_from_env() {
  unsigned bits = kDefaultPrecisionBits;
  if (const char* env = std::getenv("SLOPEFORGE_PRECISION")) {
    std::string_view text(env);
    if (!all_digits(text)) throw ParseError("SLOPEFORGE_PRECISION must be a positive integer");
    bits = static_cast<unsigned>(std::stoul(std::string(text)));
  }
  set_precision_bits(bits);
  return g_precision_bits;
}

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational value;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw ParseError("malformed rational '" + std::string(text) + "'");
    }
    Integer d = decimal_integer(den);
    if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    value = Rational(decimal_integer(num), d);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto whole = body.substr(0, dot);
    auto frac = body.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty())) {
      throw ParseError("malformed decimal '" + std::string(text) + "'");
    }
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac.size()));
    Integer digits = decimal_integer(std::string(whole) + std::string(frac));
    value = Rational(digits, scale);
  } else {
    if (!all_digits(body)) throw ParseError("malformed number '" + std::string(text) + "'");
    value = Rational(decimal_integer(body));
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

std::string format_decimal(const Real& x, int digits) {
  std::ostringstream out;
  out.precision(digits);
  out << x;
  return out.str();
}

std::string format_decimal(const Rational& r, int digits) {
  if (denominator(r) == 1) return numerator(r).str();
  return format_decimal(to_real(r), digits);
}

Real to_real(const Rational& r) {
  precision_bits();
  Real out;
  mpfr_set_q(out.backend().data(), r.backend().data(), MPFR_RNDN);
  return out;
}

Rational to_rational(const Real& x) {
  Rational out;
  mpfr_get_q(out.backend().data(), x.backend().data());
  return out;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Integer lcm(const Integer& a, const Integer& b) {
  return a / boost::multiprecision::gcd(a, b) * b;
}

}  // namespace slopeforge
