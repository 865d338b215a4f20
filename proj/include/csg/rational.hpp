#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace csg {

using Rational = mpq_class;

/// Parses "3/4", "-2", "0.125" or "1e-3" into an exact rational. Decimal
/// notation is interpreted exactly (0.1 is 1/10, not the nearest double).
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

// Overloads so templates over double and Rational read the same.
inline double to_double_any(double v) { return v; }
inline double to_double_any(const Rational& q) { return q.get_d(); }
inline int sgn_any(double v) { return (v > 0) - (v < 0); }
inline int sgn_any(const Rational& q) { return sgn(q); }

/// The exact binary value of a finite double.
Rational exact_from_double(double x);

/// q^n for n >= 0 by repeated squaring.
Rational pow(const Rational& q, unsigned long n);

}  // namespace csg
