#include "polydro/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polydro/errors.hpp"

namespace polydro {

unsigned total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0u); }

bool GradedLess::operator()(const Exponent& a, const Exponent& b) const {
  const unsigned da = total_degree(a);
  const unsigned db = total_degree(b);
  if (da != db) return da < db;
  // Within a degree, the lexicographically larger exponent comes first.
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

namespace {

void append_degree(std::size_t n, unsigned deg, Exponent& cur, std::size_t pos, std::vector<Exponent>& out) {
  if (pos + 1 == n) {
    cur[pos] = deg;
    out.push_back(cur);
    return;
  }
  for (int k = static_cast<int>(deg); k >= 0; --k) {
    cur[pos] = static_cast<unsigned>(k);
    append_degree(n, deg - static_cast<unsigned>(k), cur, pos + 1, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::size_t basis_size(std::size_t var_count, unsigned degree) {
  // C(n + d, d) computed incrementally; exact for the sizes used here.
  std::size_t r = 1;
  for (unsigned i = 1; i <= degree; ++i) r = r * (var_count + i) / i;
  return r;
}

GradedBasis::GradedBasis(std::size_t var_count, unsigned degree) : var_count_(var_count), degree_(degree) {
  if (var_count == 0) throw Error(ErrorKind::Dimension, "graded basis needs at least one variable");
  exponents_.reserve(basis_size(var_count, degree));
  Exponent cur(var_count, 0);
  for (unsigned k = 0; k <= degree; ++k) append_degree(var_count, k, cur, 0, exponents_);
  for (std::size_t i = 0; i < exponents_.size(); ++i) index_.emplace(exponents_[i], i);
}

std::optional<std::size_t> GradedBasis::index_of(const Exponent& e) const {
  auto it = index_.find(e);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t GradedBasis::index_or_throw(const Exponent& e) const {
  auto idx = index_of(e);
  if (!idx) throw Error(ErrorKind::Degree, "monomial outside the graded basis of degree " + std::to_string(degree_));
  return *idx;
}

std::vector<double> GradedBasis::evaluate(std::span<const double> point) const {
  if (point.size() != var_count_) throw Error(ErrorKind::Dimension, "point length does not match basis");
  std::vector<double> out(exponents_.size());
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    double v = 1.0;
    for (std::size_t j = 0; j < var_count_; ++j)
      for (unsigned k = 0; k < exponents_[i][j]; ++k) v *= point[j];
    out[i] = v;
  }
  return out;
}

GradedBasis graded_basis(std::size_t var_count, unsigned degree) { return GradedBasis(var_count, degree); }

// ---------------------------------------------------------------------------

Polynomial::Polynomial(std::size_t var_count) : var_count_(var_count) {
  if (var_count == 0) throw Error(ErrorKind::Dimension, "polynomial needs at least one variable");
}

Polynomial Polynomial::constant(std::size_t var_count, double value) {
  Polynomial p(var_count);
  p.add_term(Exponent(var_count, 0), value);
  return p;
}

Polynomial Polynomial::variable(std::size_t var_count, std::size_t index) {
  if (index >= var_count) throw Error(ErrorKind::Dimension, "variable index out of range");
  Exponent e(var_count, 0);
  e[index] = 1;
  Polynomial p(var_count);
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::monomial(const Exponent& e, double coeff) {
  Polynomial p(e.size());
  p.add_term(e, coeff);
  return p;
}

Polynomial Polynomial::from_coefficients(const GradedBasis& basis, std::span<const double> coeffs) {
  if (coeffs.size() != basis.size()) throw Error(ErrorKind::Dimension, "coefficient vector does not match basis");
  Polynomial p(basis.var_count());
  for (std::size_t i = 0; i < coeffs.size(); ++i) p.add_term(basis[i], coeffs[i]);
  return p;
}

unsigned Polynomial::degree() const {
  // Terms are sorted by degree, so the last one has maximal degree.
  return terms_.empty() ? 0 : total_degree(terms_.rbegin()->first);
}

unsigned Polynomial::degree_in(VariableBlock block) const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_) {
    unsigned s = 0;
    for (std::size_t i = block.offset; i < block.offset + block.count; ++i) s += e[i];
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponent& e, double coeff) {
  if (e.size() != var_count_) throw Error(ErrorKind::Dimension, "exponent length does not match variable count");
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

std::vector<double> Polynomial::coefficients(const GradedBasis& basis) const {
  if (basis.var_count() != var_count_) throw Error(ErrorKind::Dimension, "basis variable count mismatch");
  std::vector<double> out(basis.size(), 0.0);
  for (const auto& [e, c] : terms_) out[basis.index_or_throw(e)] = c;
  return out;
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (point.size() != var_count_) throw Error(ErrorKind::Dimension, "point length does not match polynomial");
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double v = c;
    for (std::size_t j = 0; j < var_count_; ++j)
      for (unsigned k = 0; k < e[j]; ++k) v *= point[j];
    sum += v;
  }
  return sum;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= var_count_) throw Error(ErrorKind::Dimension, "variable index out of range");
  Polynomial d(var_count_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent f = e;
    f[var] -= 1;
    d.add_term(f, c * e[var]);
  }
  return d;
}

Polynomial Polynomial::embed(std::size_t new_var_count, std::size_t offset) const {
  if (offset + var_count_ > new_var_count) throw Error(ErrorKind::Dimension, "embedding does not fit");
  Polynomial out(new_var_count);
  for (const auto& [e, c] : terms_) {
    Exponent f(new_var_count, 0);
    std::copy(e.begin(), e.end(), f.begin() + static_cast<std::ptrdiff_t>(offset));
    out.add_term(f, c);
  }
  return out;
}

Polynomial Polynomial::restrict_to(VariableBlock block) const {
  Polynomial out(block.count);
  for (const auto& [e, c] : terms_) {
    for (std::size_t i = 0; i < var_count_; ++i)
      if ((i < block.offset || i >= block.offset + block.count) && e[i] != 0)
        throw Error(ErrorKind::Semantic, "polynomial depends on variables outside the block");
    Exponent f(e.begin() + static_cast<std::ptrdiff_t>(block.offset),
               e.begin() + static_cast<std::ptrdiff_t>(block.offset + block.count));
    out.add_term(f, c);
  }
  return out;
}

Polynomial Polynomial::partial_evaluate(VariableBlock keep, std::span<const double> values) const {
  if (values.size() != var_count_ - keep.count)
    throw Error(ErrorKind::Dimension, "wrong number of substituted values");
  Polynomial out(keep.count);
  for (const auto& [e, c] : terms_) {
    double v = c;
    std::size_t k = 0;
    Exponent f(keep.count, 0);
    for (std::size_t i = 0; i < var_count_; ++i) {
      if (i >= keep.offset && i < keep.offset + keep.count) {
        f[i - keep.offset] = e[i];
      } else {
        for (unsigned r = 0; r < e[i]; ++r) v *= values[k];
        ++k;
      }
    }
    out.add_term(f, v);
  }
  return out;
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.var_count_ != var_count_) throw Error(ErrorKind::Dimension, "adding polynomials over different variables");
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.var_count_ != var_count_) throw Error(ErrorKind::Dimension, "subtracting polynomials over different variables");
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.var_count_ != b.var_count_) throw Error(ErrorKind::Dimension, "multiplying polynomials over different variables");
  Polynomial r(a.var_count_);
  Exponent e(a.var_count_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  return r;
}

Polynomial Polynomial::pow(unsigned k) const {
  Polynomial r = constant(var_count_, 1.0);
  for (unsigned i = 0; i < k; ++i) r = r * *this;
  return r;
}

double Polynomial::distance(const Polynomial& o) const {
  Polynomial d = *this - o;
  double m = 0.0;
  for (const auto& [e, c] : d.terms_) m = std::max(m, std::abs(c));
  return m;
}

// ---------------------------------------------------------------------------

PolyMatrix::PolyMatrix(std::size_t size, std::size_t var_count)
    : size_(size), entries_(size * size, Polynomial(var_count)) {}

const Polynomial& PolyMatrix::operator()(std::size_t i, std::size_t j) const { return entries_[i * size_ + j]; }

void PolyMatrix::set(std::size_t i, std::size_t j, Polynomial p) {
  entries_[j * size_ + i] = p;
  entries_[i * size_ + j] = std::move(p);
}

PolyMatrix PolyMatrix::operator-() const {
  PolyMatrix r = *this;
  for (auto& p : r.entries_) p = -p;
  return r;
}

std::vector<double> PolyMatrix::evaluate(std::span<const double> point) const {
  std::vector<double> out(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) out[i] = entries_[i].evaluate(point);
  return out;
}

PolyMatrix hessian(const Polynomial& p, VariableBlock block) {
  if (block.offset + block.count > p.var_count()) throw Error(ErrorKind::Dimension, "block exceeds variable count");
  PolyMatrix h(block.count, p.var_count());
  for (std::size_t i = 0; i < block.count; ++i) {
    Polynomial di = p.derivative(block.offset + i);
    for (std::size_t j = i; j < block.count; ++j) h.set(i, j, di.derivative(block.offset + j));
  }
  return h;
}

std::vector<Polynomial> decompose_in_xi(const Polynomial& h, std::size_t n, std::size_t p, unsigned d) {
  if (h.var_count() != n + p) throw Error(ErrorKind::Dimension, "h must be a polynomial in (x, xi)");
  const GradedBasis xi_basis(p, d);
  std::vector<Polynomial> parts(xi_basis.size(), Polynomial(n));
  for (const auto& [e, c] : h.terms()) {
    Exponent ex(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(n));
    Exponent exi(e.begin() + static_cast<std::ptrdiff_t>(n), e.end());
    auto idx = xi_basis.index_of(exi);
    if (!idx) throw Error(ErrorKind::Degree, "degree of h in xi exceeds " + std::to_string(d));
    parts[*idx].add_term(ex, c);
  }
  return parts;
}

Polynomial recombine_in_xi(const std::vector<Polynomial>& parts, std::size_t n, std::size_t p, unsigned d) {
  const GradedBasis xi_basis(p, d);
  if (parts.size() != xi_basis.size()) throw Error(ErrorKind::Dimension, "wrong number of coefficient polynomials");
  Polynomial h(n + p);
  for (std::size_t b = 0; b < parts.size(); ++b)
    for (const auto& [ex, c] : parts[b].terms()) {
      Exponent e = ex;
      e.insert(e.end(), xi_basis[b].begin(), xi_basis[b].end());
      h.add_term(e, c);
    }
  return h;
}

}  // namespace polydro
