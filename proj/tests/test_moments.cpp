#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "polydro/errors.hpp"
#include "polydro/moments.hpp"
#include "polydro/poly_text.hpp"

using namespace polydro;

namespace {

// index of w_{ab} in graded_basis(2, 4)
std::size_t w2(unsigned a, unsigned b) { return GradedBasis(2, 4).index_or_throw({a, b}); }

using Form = std::vector<std::pair<std::size_t, double>>;

Form single(unsigned a, unsigned b) { return {{w2(a, b), 1.0}}; }

Form diff(unsigned a, unsigned b, unsigned c, unsigned d) {
  Form f{{w2(a, b), 1.0}, {w2(c, d), -1.0}};
  std::sort(f.begin(), f.end());
  return f;
}

}  // namespace

TEST_CASE("moment matrix layout, two variables, order two") {
  const LinearMatrixMap m = moment_map(2, 2);
  REQUIRE(m.size == 6);
  const unsigned rows[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = j; i < 6; ++i)
      CHECK(m.entries[packed_index(6, i, j)] == single(rows[i][0] + rows[j][0], rows[i][1] + rows[j][1]));
  // spot-check against the printed display
  CHECK(m.entries[packed_index(6, 4, 3)] == single(3, 1));
  CHECK(m.entries[packed_index(6, 5, 4)] == single(1, 3));
  CHECK(m.entries[packed_index(6, 5, 5)] == single(0, 4));
}

TEST_CASE("localizing matrix layouts") {
  const LinearMatrixMap l1 = localizing_map(parse_xi_polynomial("xi1", 2), 2);
  REQUIRE(l1.size == 3);
  const Form top[3] = {single(1, 0), single(2, 0), single(1, 1)};
  for (std::size_t i = 0; i < 3; ++i) CHECK(l1.entries[packed_index(3, i, 0)] == top[i]);
  CHECK(l1.entries[packed_index(3, 1, 1)] == single(3, 0));
  CHECK(l1.entries[packed_index(3, 2, 1)] == single(2, 1));
  CHECK(l1.entries[packed_index(3, 2, 2)] == single(1, 2));

  const LinearMatrixMap l2 = localizing_map(parse_xi_polynomial("xi1 - xi2^2", 2), 2);
  CHECK(l2.entries[packed_index(3, 0, 0)] == diff(1, 0, 0, 2));
  CHECK(l2.entries[packed_index(3, 1, 0)] == diff(2, 0, 1, 2));
  CHECK(l2.entries[packed_index(3, 2, 0)] == diff(1, 1, 0, 3));
  CHECK(l2.entries[packed_index(3, 1, 1)] == diff(3, 0, 2, 2));
  CHECK(l2.entries[packed_index(3, 2, 1)] == diff(2, 1, 1, 3));
  CHECK(l2.entries[packed_index(3, 2, 2)] == diff(1, 2, 0, 4));

  const TMS w(2, 4, [] {
    std::vector<double> v(15);
    std::iota(v.begin(), v.end(), 1.0);
    return v;
  }());
  CHECK(localizing_matrix(Polynomial::constant(2, 1.0), w, 2) == moment_matrix(w, 2));
  CHECK(moment_matrix(w, 0).size() == 1);
  CHECK_THROWS_AS(moment_matrix(w, 3), Error);
}

TEST_CASE("riesz pairing") {
  const Polynomial f = parse_x_polynomial("2*x1 - 3*x2 + x1^2 - x1*x2 + x2^2", 2);
  const TMS w(2, 2, {1.0, -0.5, 1.0, 0.25, -0.5, 1.0});
  CHECK(riesz(f, w) == doctest::Approx(-2.25).epsilon(1e-14));
  CHECK(riesz(Polynomial::constant(2, 1.0), w) == 1.0);
  CHECK_THROWS_AS(riesz(parse_x_polynomial("x1^3", 2), w), Error);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> v{u(rng), u(rng)};
    const TMS m = point_moments(v, 4);
    const Polynomial p = parse_x_polynomial("x1^4 - 2*x1*x2^3 + 0.3*x2 - 1", 2);
    CHECK(std::abs(riesz(p, m) - p.evaluate(v)) < 1e-12);
  }
}

TEST_CASE("point-mass matrices are outer products") {
  const std::vector<double> u{0.4, -1.3};
  const TMS w = point_moments(u, 4);
  const auto mono = GradedBasis(2, 2).evaluate(u);
  const Eigen::Map<const Eigen::VectorXd> v(mono.data(), 6);
  CHECK((moment_matrix(w, 2) - v * v.transpose()).norm() < 1e-12);
  CHECK(numeric_rank(moment_matrix(w, 2), 1e-6) == 1);

  const Polynomial g = parse_xi_polynomial("1 - xi1^2 - xi2", 2);
  const auto m1 = GradedBasis(2, 1).evaluate(u);
  const Eigen::Map<const Eigen::VectorXd> v1(m1.data(), 3);
  CHECK((localizing_matrix(g, w, 2) - g.evaluate(u) * v1 * v1.transpose()).norm() < 1e-12);
}

TEST_CASE("truncate and project") {
  const std::vector<double> u{3.0, -1.0};
  const TMS w = point_moments(u, 4);
  CHECK(truncate(w, 4).values == w.values);
  CHECK(truncate(w, 0).values == std::vector<double>{1.0});
  CHECK(truncate(w, 2).values == point_moments(u, 2).values);
  CHECK(project_pi(w) == u);
  CHECK(project_pi(TMS(2, 2, {1, 0, 1, 0, 0, 1})) == std::vector<double>{0, 1});
  CHECK_THROWS_AS(truncate(w, 5), Error);
}

TEST_CASE("flat truncation") {
  const TMS single = point_moments(std::vector<double>{0.2, 0.5}, 6);
  const auto ft = flat_truncation_check(single, 1, 1, 3);
  REQUIRE(ft);
  CHECK(ft->d1 == 1);
  CHECK(ft->rank == 1);

  // Uniform measure on a square has full-rank moment matrices at every order.
  std::vector<double> vals;
  const GradedBasis b(2, 4);
  for (const auto& e : b.exponents()) {
    auto m = [](unsigned k) { return k % 2 ? 0.0 : 1.0 / (k + 1); };
    vals.push_back(m(e[0]) * m(e[1]));
  }
  CHECK_FALSE(flat_truncation_check(TMS(2, 4, vals), 1, 1, 2));
}

TEST_CASE("atom extraction") {
  const TMS z = point_moments(std::vector<double>{0.3, 0.7}, 4, 2.0);
  const AtomicMeasure mu = extract_atoms(z, 1, 1, 1);
  REQUIRE(mu.atoms.size() == 1);
  CHECK(mu.atoms[0].weight == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(mu.atoms[0].point[0] == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(mu.atoms[0].point[1] == doctest::Approx(0.7).epsilon(1e-10));

  AtomicMeasure three;
  three.atoms = {{0.5, {-0.8, 0.1}}, {1.5, {0.2, 0.9}}, {0.7, {0.6, -0.4}}};
  const TMS z3 = three.moments(2, 6);
  const auto ft = flat_truncation_check(z3, 1, 1, 3);
  REQUIRE(ft);
  CHECK(ft->rank == 3);
  const AtomicMeasure got = extract_atoms(z3, ft->d1, 1, ft->rank);
  REQUIRE(got.atoms.size() == 3);
  auto want = three.atoms;
  std::sort(want.begin(), want.end(), [](const Atom& a, const Atom& b) { return a.point < b.point; });
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(got.atoms[i].weight == doctest::Approx(want[i].weight).epsilon(1e-8));
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(got.atoms[i].point[j] - want[i].point[j]) < 1e-8);
  }
}
