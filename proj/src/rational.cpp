#include "gexp/rational.hpp"

#include <cctype>
#include <cmath>

#include "gexp/error.hpp"

namespace gexp {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::parse: return "ParseError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::degenerate_set: return "DegenerateSet";
    case ErrorCode::degenerate_domain: return "DegenerateDomain";
    case ErrorCode::not_unital: return "NotUnital";
    case ErrorCode::not_symmetric: return "NotSymmetric";
    case ErrorCode::invalid_range: return "InvalidRange";
    case ErrorCode::missing_level: return "MissingLevel";
    case ErrorCode::outside_family: return "OutsideFamily";
    case ErrorCode::numerical_failure: return "NumericalFailure";
    case ErrorCode::not_normalized: return "NotNormalized";
    case ErrorCode::has_zero_set: return "HasZeroSet";
    case ErrorCode::insufficient_instruments: return "InsufficientInstruments";
    case ErrorCode::window_exceeded: return "WindowExceeded";
    case ErrorCode::invalid_path: return "InvalidPath";
    case ErrorCode::invariant_violation: return "InvariantViolation";
    case ErrorCode::io: return "IOError";
    case ErrorCode::internal: return "InternalError";
  }
  return "Unknown";
}

namespace {

mpz_class pow10(unsigned long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

Rational parse_decimal(std::string_view s, std::string_view whole) {
  std::size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  std::string digits;
  long frac = 0;
  bool any = false, dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any = true;
      if (dot) ++frac;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) fail(ErrorCode::parse, "not a rational: '" + std::string(whole) + "'");
  long exp = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::string e(s.substr(i));
    if (e.empty()) fail(ErrorCode::parse, "bad exponent in '" + std::string(whole) + "'");
    std::size_t used = 0;
    try {
      exp = std::stol(e, &used);
    } catch (...) {
      fail(ErrorCode::parse, "bad exponent in '" + std::string(whole) + "'");
    }
    if (used != e.size()) fail(ErrorCode::parse, "trailing text in '" + std::string(whole) + "'");
    i = s.size();
  }
  if (i != s.size()) fail(ErrorCode::parse, "trailing text in '" + std::string(whole) + "'");
  mpz_class num(digits, 10);
  long shift = exp - frac;
  Rational q;
  if (shift >= 0) {
    q = Rational(num * pow10(static_cast<unsigned long>(shift)));
  } else {
    q = Rational(num, pow10(static_cast<unsigned long>(-shift)));
  }
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string_view s = text.substr(b, e - b);
  if (s.empty()) fail(ErrorCode::parse, "empty rational");
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s, text);
  Rational p = parse_decimal(s.substr(0, slash), text);
  Rational q = parse_decimal(s.substr(slash + 1), text);
  if (q == 0) fail(ErrorCode::parse, "zero denominator in '" + std::string(text) + "'");
  return p / q;
}

std::string to_string(const Rational& q) {
  Rational c = q;  // values built from (p, q) pairs may not be reduced yet
  c.canonicalize();
  return c.get_str(10);
}

double to_double(const Rational& q) { return q.get_d(); }

Rational from_double(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::invalid_argument, "non-finite value");
  Rational q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

bool exact_sqrt(const Rational& q, Rational& out) {
  if (q < 0) return false;
  const mpz_class& n = q.get_num();
  const mpz_class& d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
  mpz_class a, b;
  mpz_sqrt(a.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(b.get_mpz_t(), d.get_mpz_t());
  out = Rational(a, b);
  out.canonicalize();
  return true;
}

namespace {
// floor(sqrt(q) * 2^bits) as an integer, plus whether the root is exact.
std::pair<mpz_class, bool> scaled_root(const Rational& q, unsigned bits) {
  if (q < 0) fail(ErrorCode::invalid_argument, "sqrt of negative rational");
  // sqrt(n/d) = sqrt(n*d)/d
  mpz_class nd = q.get_num() * q.get_den();
  nd <<= 2 * bits;
  mpz_class root, rem;
  mpz_sqrtrem(root.get_mpz_t(), rem.get_mpz_t(), nd.get_mpz_t());
  return {root, rem == 0};
}
}  // namespace

Rational sqrt_upper(const Rational& q, unsigned bits) {
  Rational exact;
  if (exact_sqrt(q, exact)) return exact;
  auto [root, is_exact] = scaled_root(q, bits);
  mpz_class den = q.get_den();
  den <<= bits;
  Rational r(is_exact ? root : mpz_class(root + 1), den);
  r.canonicalize();
  return r;
}

Rational sqrt_lower(const Rational& q, unsigned bits) {
  Rational exact;
  if (exact_sqrt(q, exact)) return exact;
  auto [root, is_exact] = scaled_root(q, bits);
  (void)is_exact;
  mpz_class den = q.get_den();
  den <<= bits;
  Rational r(root, den);
  r.canonicalize();
  return r;
}

namespace {
Rational rpow(const Rational& b, std::uint64_t m) {
  mpz_class n, d;
  mpz_pow_ui(n.get_mpz_t(), b.get_num().get_mpz_t(), m);
  mpz_pow_ui(d.get_mpz_t(), b.get_den().get_mpz_t(), m);
  Rational r(n, d);
  r.canonicalize();
  return r;
}
}  // namespace

std::uint64_t min_power_at_least(const Rational& base, const Rational& target) {
  if (base <= 1) fail(ErrorCode::invalid_argument, "power base must exceed 1");
  if (target <= 0) fail(ErrorCode::invalid_argument, "power target must be positive");
  if (target <= 1) return 0;
  const double est = std::log(to_double(target)) / std::log1p(to_double(base - 1));
  if (!std::isfinite(est) || est > 1e7)
    fail(ErrorCode::insufficient_instruments, "required power is astronomically large");
  std::uint64_t m = est > 2 ? static_cast<std::uint64_t>(est) - 2 : 0;
  while (m > 0 && rpow(base, m) >= target) --m;
  while (rpow(base, m) < target) ++m;
  return m;
}

Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }
Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace gexp
