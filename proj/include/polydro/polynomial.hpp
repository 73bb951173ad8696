#pragma once

// Sparse multivariate polynomials over a graded monomial basis.
//
// Monomials are ordered graded-lexicographically: lower total degree first,
// and within one degree the exponent that is lexicographically larger comes
// first (x1 dominates x2 dominates ...). For two variables and degree two the
// order is 1, x1, x2, x1^2, x1*x2, x2^2. Every matrix row/column layout in the
// library follows this order.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace polydro {

using Exponent = std::vector<unsigned>;

unsigned total_degree(const Exponent& e);

/// Strict weak order realising the graded lexicographic monomial order.
struct GradedLess {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

/// Contiguous range of variables inside a polynomial's variable list, e.g.
/// the x block {0, n} or the xi block {n, p} of a polynomial in (x, xi).
struct VariableBlock {
  std::size_t offset = 0;
  std::size_t count = 0;
};

/// Ordered list of all exponents of total degree <= degree.
class GradedBasis {
 public:
  GradedBasis(std::size_t var_count, unsigned degree);

  std::size_t var_count() const { return var_count_; }
  unsigned degree() const { return degree_; }
  std::size_t size() const { return exponents_.size(); }
  const Exponent& operator[](std::size_t i) const { return exponents_[i]; }
  const std::vector<Exponent>& exponents() const { return exponents_; }

  std::optional<std::size_t> index_of(const Exponent& e) const;
  std::size_t index_or_throw(const Exponent& e) const;

  /// Monomial values [v]_d at a point.
  std::vector<double> evaluate(std::span<const double> point) const;

 private:
  std::size_t var_count_;
  unsigned degree_;
  std::vector<Exponent> exponents_;
  std::map<Exponent, std::size_t> index_;
};

GradedBasis graded_basis(std::size_t var_count, unsigned degree);

/// C(n + d, d), the length of graded_basis(n, d).
std::size_t basis_size(std::size_t var_count, unsigned degree);

class Polynomial {
 public:
  using TermMap = std::map<Exponent, double, GradedLess>;

  explicit Polynomial(std::size_t var_count = 1);

  static Polynomial constant(std::size_t var_count, double value);
  static Polynomial variable(std::size_t var_count, std::size_t index);
  static Polynomial monomial(const Exponent& e, double coeff = 1.0);
  /// Builds sum_i coeffs[i] * basis[i].
  static Polynomial from_coefficients(const GradedBasis& basis, std::span<const double> coeffs);

  std::size_t var_count() const { return var_count_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Total degree; 0 for the zero polynomial.
  unsigned degree() const;
  /// Degree in the variables of one block.
  unsigned degree_in(VariableBlock block) const;

  double coefficient(const Exponent& e) const;
  void add_term(const Exponent& e, double coeff);

  /// Dense coefficient vector against a basis; throws if a term falls outside it.
  std::vector<double> coefficients(const GradedBasis& basis) const;

  double evaluate(std::span<const double> point) const;
  Polynomial derivative(std::size_t var) const;

  /// Re-express over a larger variable list, placing this polynomial's
  /// variables at [offset, offset + var_count()).
  Polynomial embed(std::size_t new_var_count, std::size_t offset) const;
  /// Restrict to a block; all other variables must not appear.
  Polynomial restrict_to(VariableBlock block) const;
  /// Substitute values for every variable outside `keep`, returning a
  /// polynomial over the block variables only.
  Polynomial partial_evaluate(VariableBlock keep, std::span<const double> values) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  Polynomial pow(unsigned k) const;

  bool operator==(const Polynomial& o) const = default;

  /// Max-norm of the coefficient difference.
  double distance(const Polynomial& o) const;

 private:
  std::size_t var_count_;
  TermMap terms_;
};

/// Symmetric matrix of polynomials.
class PolyMatrix {
 public:
  PolyMatrix(std::size_t size, std::size_t var_count);
  std::size_t size() const { return size_; }
  const Polynomial& operator()(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, Polynomial p);
  PolyMatrix operator-() const;
  std::vector<double> evaluate(std::span<const double> point) const;  // row-major

 private:
  std::size_t size_;
  std::vector<Polynomial> entries_;  // row-major, both triangles kept equal
};

/// Second derivatives with respect to the variables of one block.
PolyMatrix hessian(const Polynomial& p, VariableBlock block);

/// Splits h(x, xi) = sum_beta h_beta(x) xi^beta. The x block is [0, n) and the
/// xi block is [n, n + p). Entries follow graded_basis(p, d) and are
/// polynomials in x alone.
std::vector<Polynomial> decompose_in_xi(const Polynomial& h, std::size_t n, std::size_t p, unsigned d);

/// Inverse of decompose_in_xi.
Polynomial recombine_in_xi(const std::vector<Polynomial>& parts, std::size_t n, std::size_t p, unsigned d);

}  // namespace polydro
