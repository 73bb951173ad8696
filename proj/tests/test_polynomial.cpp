#include <doctest.h>

#include <cmath>
#include <random>

#include "polydro/errors.hpp"
#include "polydro/poly_text.hpp"
#include "polydro/polynomial.hpp"

using namespace polydro;

TEST_CASE("graded basis order and size") {
  const GradedBasis b12(1, 3);
  CHECK(b12.size() == 4);
  for (unsigned i = 0; i < 4; ++i) CHECK(b12[i] == Exponent{i});

  const GradedBasis b22(2, 2);
  const std::vector<Exponent> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(b22.exponents() == expected);

  CHECK(GradedBasis(2, 4).size() == 15);
  CHECK(basis_size(3, 4) == 35);

  const GradedBasis b3(3, 2);
  const std::vector<Exponent> deg2{{2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
  for (std::size_t i = 0; i < deg2.size(); ++i) CHECK(b3[4 + i] == deg2[i]);
}

TEST_CASE("graded basis is a prefix of the next degree") {
  for (std::size_t n = 1; n <= 4; ++n)
    for (unsigned d = 0; d < 5; ++d) {
      const GradedBasis a(n, d), b(n, d + 1);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
      CHECK(a.index_of(a[a.size() - 1]).value() == a.size() - 1);
    }
}

TEST_CASE("evaluation") {
  const Polynomial f = parse_x_polynomial("2*x1 - 3*x2 + x1^2 - x1*x2 + x2^2", 2);
  const double v[] = {-0.5, 1.0};
  CHECK(f.evaluate(v) == doctest::Approx(-2.25).epsilon(1e-15));
  CHECK(Polynomial::constant(3, 1.0).evaluate(std::vector<double>{4, 5, 6}) == 1.0);

  const Polynomial h = parse_polynomial("x1*x2 - x1*xi1^2 - x2^2*xi2^2", {2, 2});
  const double pt[] = {-1.0 / 6, -1.0 / 6, 0.0, 1.0};
  CHECK(std::abs(h.evaluate(pt)) < 1e-15);
  CHECK_THROWS_AS(h.evaluate(std::vector<double>{1.0}), Error);
}

TEST_CASE("hessian") {
  const Polynomial p = parse_x_polynomial("x1^2 + x2^2", 2);
  const PolyMatrix hp = hessian(p, {0, 2});
  CHECK(hp(0, 0) == Polynomial::constant(2, 2.0));
  CHECK(hp(0, 1).is_zero());

  const Polynomial f = parse_x_polynomial("2*x1 - 3*x2 + x1^2 - x1*x2 + x2^2", 2);
  const PolyMatrix hf = hessian(f, {0, 2});
  CHECK(hf(0, 0) == Polynomial::constant(2, 2.0));
  CHECK(hf(0, 1) == Polynomial::constant(2, -1.0));
  CHECK(hf(1, 0) == hf(0, 1));
  CHECK(hf(1, 1) == Polynomial::constant(2, 2.0));

  // -h for h = -(x1 - 1)^2 - x2^2 xi^3 ... only the x-Hessian matters here
  const Polynomial h = parse_polynomial("-x2^2*xi1^3 + x1*xi1", {2, 1});
  const PolyMatrix nh = -hessian(h, {0, 2});
  CHECK(nh(0, 0).is_zero());
  CHECK(nh(0, 1).is_zero());
  CHECK(nh(1, 1) == parse_polynomial("2*xi1^3", {2, 1}));
}

TEST_CASE("decompose in xi matches the worked H example") {
  const Polynomial h = parse_polynomial(
      "(1+x1)^2 + x1*xi1 + x2*xi2 + (x1^2+x2)*xi1^2 + 2*x1*x2*xi1*xi2 + (x1+x2^2)*xi2^2", {2, 2});
  const auto parts = decompose_in_xi(h, 2, 2, 2);
  REQUIRE(parts.size() == 6);
  const char* expected[] = {"(1+x1)^2", "x1", "x2", "x1^2+x2", "2*x1*x2", "x1+x2^2"};
  for (int i = 0; i < 6; ++i) CHECK(parts[i] == parse_x_polynomial(expected[i], 2));
  CHECK(recombine_in_xi(parts, 2, 2, 2) == h);
  CHECK_THROWS_AS(decompose_in_xi(h, 2, 2, 1), Error);

  const Polynomial plain = parse_polynomial("x1 - x2^2", {2, 2});
  const auto pp = decompose_in_xi(plain, 2, 2, 2);
  CHECK(pp[0] == parse_x_polynomial("x1 - x2^2", 2));
  for (int i = 1; i < 6; ++i) CHECK(pp[i].is_zero());
}

static Polynomial random_poly(std::mt19937_64& rng, std::size_t n, unsigned d) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution keep(0.5);
  const GradedBasis b(n, d);
  Polynomial p(n);
  for (std::size_t i = 0; i < b.size(); ++i)
    if (keep(rng)) p.add_term(b[i], u(rng));
  return p;
}

TEST_CASE("product evaluates as product of evaluations") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Polynomial p = random_poly(rng, 3, 3), q = random_poly(rng, 3, 2);
    const std::vector<double> v{u(rng), u(rng), u(rng)};
    const double lhs = (p * q).evaluate(v), rhs = p.evaluate(v) * q.evaluate(v);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("decompose/recombine roundtrip on random polynomials") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const Polynomial h = random_poly(rng, 4, 4);  // (x1, x2, xi1, xi2)
    const unsigned d = h.degree_in({2, 2});
    const auto parts = decompose_in_xi(h, 2, 2, d);
    CHECK(recombine_in_xi(parts, 2, 2, d) == h);
    const std::vector<double> pt{u(rng), u(rng), u(rng), u(rng)};
    const GradedBasis xb(2, d);
    const auto mono = xb.evaluate(std::vector<double>{pt[2], pt[3]});
    double s = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) s += parts[i].evaluate(std::vector<double>{pt[0], pt[1]}) * mono[i];
    CHECK(std::abs(s - h.evaluate(pt)) < 1e-12);
  }
}

TEST_CASE("quadratic hessian is twice the form matrix") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Polynomial p = random_poly(rng, 3, 2);
    const PolyMatrix H = hessian(p, {0, 3});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(H(i, j) == H(j, i));
        CHECK(H(i, j).degree() == 0);
        Exponent e(3, 0);
        e[i] += 1;
        e[j] += 1;
        const double expect = (i == j ? 2.0 : 1.0) * p.coefficient(e);
        CHECK(H(i, j).coefficient(Exponent(3, 0)) == doctest::Approx(expect));
      }
  }
}

TEST_CASE("text syntax") {
  CHECK(parse_x_polynomial("3*x1^2 - 0.5", 1) == Polynomial::monomial({2}, 3.0) + Polynomial::constant(1, -0.5));
  CHECK_THROWS_AS(parse_x_polynomial("x1^-2", 1), ParseError);
  CHECK_THROWS_AS(parse_x_polynomial("x1^0.5", 1), ParseError);
  CHECK_THROWS_AS(parse_x_polynomial("x3", 2), ParseError);
  CHECK_THROWS_AS(parse_x_polynomial("xi1", 2), ParseError);
  CHECK_THROWS_AS(parse_x_polynomial("(x1", 2), ParseError);
  CHECK_THROWS_AS(parse_x_polynomial("2 x1", 2), ParseError);
  try {
    parse_x_polynomial("x1 + $", 1);
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.column() == 6);
  }

  const Polynomial p = parse_polynomial("-1.25*x1^2*xi2 + 3 - x2 + 1e-3*xi1^4", {2, 2});
  const Polynomial q = parse_polynomial(format_polynomial(p, 2), {2, 2});
  CHECK(p == q);
}
