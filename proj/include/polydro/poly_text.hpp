#pragma once

// Text syntax for polynomials.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' digits)?
//   primary := number | variable | '(' expr ')'
//   variable:= 'x' digits | 'xi' digits        (1-based indices)
//
// Numbers use the usual decimal/exponent notation. Exponents after '^' are
// non-negative integer literals, so `x1^-2` and `x1^0.5` are syntax errors.
// Whitespace is ignored. Example: `3*x1^2*xi2 - 0.5*(x1 - x2)^2`.

#include <cstddef>
#include <string>
#include <string_view>

#include "polydro/polynomial.hpp"

namespace polydro {

/// Which variable families an expression may reference.
struct VariableScope {
  std::size_t n = 0;  // x1..xn
  std::size_t p = 0;  // xi1..xip
  bool allow_x = true;
  bool allow_xi = true;
};

/// Parses into a polynomial over the concatenated (x, xi) variables,
/// i.e. var_count = n + p with x first.
Polynomial parse_polynomial(std::string_view text, const VariableScope& scope);

/// Convenience wrappers returning polynomials over one family only.
Polynomial parse_x_polynomial(std::string_view text, std::size_t n);
Polynomial parse_xi_polynomial(std::string_view text, std::size_t p);

/// Formats with shortest round-trip coefficients. `n` is the number of x
/// variables; variables at index >= n are printed as xi(i - n + 1).
std::string format_polynomial(const Polynomial& poly, std::size_t n);
std::string format_x_polynomial(const Polynomial& poly);
std::string format_xi_polynomial(const Polynomial& poly);

std::string format_double(double v);

}  // namespace polydro
