#include "csg/rational.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "csg/error.hpp"

namespace csg {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

Rational pow10(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
  return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string t(text);
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
  std::size_t b = 0;
  while (b < t.size() && std::isspace(static_cast<unsigned char>(t[b]))) ++b;
  t = t.substr(b);
  if (t.empty()) fail(ErrorCode::ParseError, "empty number");

  if (auto slash = t.find('/'); slash != std::string::npos) {
    std::string num = t.substr(0, slash), den = t.substr(slash + 1);
    std::string num_digits = (!num.empty() && (num[0] == '-' || num[0] == '+')) ? num.substr(1) : num;
    if (!all_digits(num_digits) || !all_digits(den)) fail(ErrorCode::ParseError, "bad fraction '" + t + "'");
    Rational q(mpz_class(num[0] == '+' ? num.substr(1) : num, 10), mpz_class(den, 10));
    if (q.get_den() == 0) fail(ErrorCode::ParseError, "zero denominator in '" + t + "'");
    q.canonicalize();
    return q;
  }

  bool negative = false;
  std::size_t i = 0;
  if (t[0] == '-' || t[0] == '+') {
    negative = t[0] == '-';
    i = 1;
  }
  std::string mantissa = t.substr(i);
  long exponent = 0;
  if (auto e = mantissa.find_first_of("eE"); e != std::string::npos) {
    std::string exp_text = mantissa.substr(e + 1);
    mantissa = mantissa.substr(0, e);
    std::string exp_digits = (!exp_text.empty() && (exp_text[0] == '-' || exp_text[0] == '+')) ? exp_text.substr(1) : exp_text;
    if (!all_digits(exp_digits)) fail(ErrorCode::ParseError, "bad exponent in '" + t + "'");
    exponent = std::stol(exp_text);
  }
  std::string int_part = mantissa, frac_part;
  if (auto dot = mantissa.find('.'); dot != std::string::npos) {
    int_part = mantissa.substr(0, dot);
    frac_part = mantissa.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) fail(ErrorCode::ParseError, "bad number '" + t + "'");
  if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)))
    fail(ErrorCode::ParseError, "bad number '" + t + "'");
  // base 10 explicitly: GMP reads a leading 0 as octal otherwise
  mpz_class digits(int_part + frac_part, 10);
  Rational q(digits);
  q *= pow10(exponent - static_cast<long>(frac_part.size()));
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_str();
}

Rational exact_from_double(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::BadParams, "non-finite value has no rational form");
  Rational q(x);
  q.canonicalize();
  return q;
}

Rational pow(const Rational& q, unsigned long n) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), q.get_num().get_mpz_t(), n);
  mpz_pow_ui(den.get_mpz_t(), q.get_den().get_mpz_t(), n);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace csg
