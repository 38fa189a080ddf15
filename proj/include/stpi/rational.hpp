#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace stpi {

// Exact probabilities. mpq_class keeps values canonical (reduced, positive denominator)
// after every arithmetic operation.
using Rational = mpq_class;

// Accepts "p/q", "p" or a finite decimal such as "0.25".
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

// log2 of a positive rational, accurate for numerators/denominators far beyond double range.
double log2q(const Rational& q);

double to_double(const Rational& q);

inline bool is_probability(const Rational& q) { return q >= 0 && q <= 1; }

}  // namespace stpi
