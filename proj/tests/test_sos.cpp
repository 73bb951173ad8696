#include <doctest.h>

#include <random>

#include "polydro/errors.hpp"
#include "polydro/poly_text.hpp"
#include "polydro/sos.hpp"

using namespace polydro;

namespace {

Polynomial xi(const char* text) { return parse_xi_polynomial(text, 1); }
Polynomial xv(const char* text, std::size_t n) { return parse_x_polynomial(text, n); }

}  // namespace

TEST_CASE("sos: perfect square has the rank-one Gram matrix") {
  const SosReport r = check_sos(xi("1 + 2*xi1 + xi1^2"), 1);
  REQUIRE(r.verdict == Verdict::Certified);
  REQUIRE(r.grams.size() == 1);
  CHECK(r.grams[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.grams[0](0, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.grams[0](1, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.residual < 1e-7);
}

TEST_CASE("sos: odd and indefinite polynomials are refuted") {
  CHECK(check_sos(xi("xi1"), 1).verdict == Verdict::Refuted);
  CHECK(check_sos(xi("xi1^2 - 1"), 1).verdict == Verdict::Refuted);
}

TEST_CASE("sos: random Gram products are certified") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const GradedBasis b(2, 2);
    Eigen::MatrixXd B(3, static_cast<Eigen::Index>(b.size()));
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
    const Eigen::MatrixXd G = B.transpose() * B;
    Polynomial p(2);
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) {
        Exponent e(2);
        for (int v = 0; v < 2; ++v) e[v] = b[i][v] + b[j][v];
        p.add_term(e, G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    const SosReport r = check_sos(p, 2);
    CHECK(r.verdict == Verdict::Certified);
  }
}

TEST_CASE("qmod: generators on the unit interval") {
  const std::vector<Polynomial> g{xi("xi1"), xi("1 - xi1")};
  CHECK(check_qmod_membership(xi("xi1"), g, 1).verdict == Verdict::Certified);
  CHECK(check_qmod_membership(xi("1 + xi1"), g, 1).verdict == Verdict::Certified);
  for (unsigned k = 1; k <= 3; ++k) CHECK(check_qmod_membership(xi("xi1 - 1"), g, k).verdict == Verdict::Refuted);
}

TEST_CASE("qmod: membership is monotone in the order") {
  const std::vector<Polynomial> g{xi("xi1"), xi("1 - xi1")};
  // 2 xi^3 = xi * (sqrt2 xi)^2 first fits at order 4.
  const Polynomial t = xi("2*xi1^3");
  CHECK(check_qmod_membership(t, g, 2).verdict == Verdict::Certified);
  CHECK(check_qmod_membership(t, g, 3).verdict == Verdict::Certified);
  // 1 - xi^2 has no order-2 representation (its xi^2 coefficient is
  // negative); once it appears it must stay.
  const Polynomial q = xi("1 - xi1^2");
  bool seen = false;
  for (unsigned k = 1; k <= 3; ++k) {
    const bool in = check_qmod_membership(q, g, k).verdict == Verdict::Certified;
    if (seen) CHECK(in);
    seen = seen || in;
  }
  CHECK(seen);
}

TEST_CASE("qmod: target above the truncation order throws") {
  CHECK_THROWS_AS(check_qmod_membership(xi("xi1^3"), {xi("xi1")}, 1), Error);
}

TEST_CASE("sos-convexity") {
  CHECK(is_sos_convex(xv("x1^2 + x2^2", 2)).verdict == Verdict::Certified);
  CHECK(is_sos_convex(xv("2*x1 - 3*x2 + x1^2 - x1*x2 + x2^2", 2)).verdict == Verdict::Certified);
  CHECK(is_sos_convex(xv("-x1^2", 2)).verdict == Verdict::Refuted);
  CHECK(is_sos_convex(xv("x1 - 2*x2", 2)).verdict == Verdict::Certified);
  CHECK(is_sos_convex(xv("x1^3 + x2^2", 2)).verdict == Verdict::Refuted);
  CHECK(is_sos_convex(xv("x1^4 + x2^4 + x1^2*x2^2", 2)).verdict == Verdict::Certified);
  CHECK(is_sos_convex(xv("x1^2*x2^2", 2)).verdict == Verdict::Refuted);
}

TEST_CASE("robust sos-concavity") {
  const std::vector<Polynomial> g1{xi("xi1"), xi("1 - xi1")};
  SUBCASE("cubic in xi with a negative-definite quadratic part") {
    const VariableScope sc{2, 1, true, true};
    const Polynomial h = parse_polynomial("1 + x1*xi1 - 2*x2*xi1^2 + (x1 - x2^2)*xi1^3", sc);
    const SosReport r = is_robust_sos_concave(h, 2, 1, g1);
    CHECK(r.verdict == Verdict::Certified);
  }
  SUBCASE("sum of negative squares weighted by xi^3 on a simplex") {
    const VariableScope sc{2, 2, true, true};
    const Polynomial h = parse_polynomial("x1*xi1^2 - x2*xi2^2 - x1^2*xi1^3 - x2^2*xi2^3", sc);
    const std::vector<Polynomial> g{parse_xi_polynomial("xi1", 2), parse_xi_polynomial("xi2 - xi1", 2),
                                    parse_xi_polynomial("1 - xi1 - xi2", 2)};
    CHECK(is_robust_sos_concave(h, 2, 2, g).verdict == Verdict::Certified);
  }
  SUBCASE("bilinear term is never concave") {
    const VariableScope sc{2, 2, true, true};
    const Polynomial h = parse_polynomial("x1*x2 - x1*xi1^2 - x2^2*xi2^2", sc);
    const std::vector<Polynomial> g{parse_xi_polynomial("xi1", 2), parse_xi_polynomial("1 - xi1", 2),
                                    parse_xi_polynomial("xi2", 2), parse_xi_polynomial("1 - xi2", 2)};
    CHECK(is_robust_sos_concave(h, 2, 2, g).verdict == Verdict::Unknown);
  }
}
