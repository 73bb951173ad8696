#include <doctest.h>

#include <random>

#include "polydro/dro.hpp"
#include "polydro/errors.hpp"
#include "polydro/poly_text.hpp"
#include "polydro/problem_io.hpp"

using namespace polydro;

namespace {

DROProblem load(const char* name) { return load_problem(std::string(POLYDRO_DATA_DIR) + "/" + name).problem; }

// cone(Y) = {A y >= 0} for the univariate interval example.
Eigen::Matrix4d interval_A() {
  Eigen::Matrix4d A;
  A << 1, -1, 0, 0,
       0, 1, -2, 0,
       0, 0, 2, -3,
       0, 0, 0, 3;
  return A;
}

}  // namespace

TEST_CASE("H matrix of the worked two-by-two example") {
  DROProblem pr;
  pr.n = 2;
  pr.p = 2;
  pr.f = parse_x_polynomial("x1", 2);
  pr.h = parse_polynomial(
      "(1+x1)^2 + x1*xi1 + x2*xi2 + (x1^2+x2)*xi1^2 + 2*x1*x2*xi1*xi2 + (x1+x2^2)*xi2^2", {2, 2});
  pr.Y.p = 2;
  pr.Y.d = 2;
  pr.Y.blocks.push_back({ConeKind::Nonneg, 1, Eigen::RowVectorXd::Unit(6, 0)});
  CHECK(compute_degrees(pr).t == 1);
  Eigen::MatrixXd expected(6, 6);
  expected << 1, 2, 0, 1, 0, 0,
              0, 1, 0, 0, 0, 0,
              0, 0, 1, 0, 0, 0,
              0, 0, 1, 1, 0, 0,
              0, 0, 0, 0, 2, 0,
              0, 1, 0, 0, 0, 1;
  CHECK(build_H(pr) == expected);

  // h(x, xi) = (H [x]_2)^T [xi]_2 at a random point
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const double x1 = u(rng), x2 = u(rng), a = u(rng), b = u(rng);
    const Eigen::VectorXd hx = h_at(pr, Eigen::Vector2d(x1, x2));
    Eigen::VectorXd m(6);
    m << 1, a, b, a * a, a * b, b * b;
    CHECK(hx.dot(m) == doctest::Approx(pr.h.evaluate(std::vector<double>{x1, x2, a, b})));
  }
}

TEST_CASE("degrees of the bundled examples") {
  const Degrees d33 = compute_degrees(load("interval_linear.json"));
  CHECK(d33.t == 1);
  CHECK(d33.d == 3);
  CHECK(d33.d2 == 1);
  CHECK(d33.d0 == 2);

  const Degrees d46 = compute_degrees(load("rank_one.json"));
  CHECK(d46.t == 1);
  CHECK(d46.d == 2);
  CHECK(d46.d0 == 1);
}

TEST_CASE("dual generators of the interval example") {
  const DROProblem pr = load("interval_linear.json");
  const std::vector<Polynomial> gens = dual_generators_Y(pr.Y);
  REQUIRE(gens.size() == 4);
  CHECK(gens[0] == parse_xi_polynomial("1 - xi1", 1));
  CHECK(gens[3] == parse_xi_polynomial("3*xi1^3", 1));

  // q = A^T u with u >= 0 is exactly the printed inequality system
  const Eigen::Matrix4d A = interval_A();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0, 1), u11(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector4d u(u01(rng), u01(rng), u01(rng), u01(rng));
    const Eigen::Vector4d q = A.transpose() * u;
    CHECK(q(0) >= -1e-12);
    CHECK(q(0) + q(1) >= -1e-12);
    CHECK(2 * q(0) + 2 * q(1) + q(2) >= -1e-12);
    CHECK(3 * q(0) + 3 * q(1) + 1.5 * q(2) + q(3) >= -1e-12);

    const Eigen::Vector4d r(u11(rng), u11(rng), u11(rng), u11(rng));
    const bool in = r(0) >= 0 && r(0) + r(1) >= 0 && 2 * r(0) + 2 * r(1) + r(2) >= 0 &&
                    3 * r(0) + 3 * r(1) + 1.5 * r(2) + r(3) >= 0;
    const Eigen::Vector4d back = A.transpose().fullPivLu().solve(r);
    CHECK(in == (back.minCoeff() >= 0));
  }
}

TEST_CASE("homogenized raw Y agrees with the raw description on y0 = 1") {
  RawY raw;
  raw.p = 1;
  raw.d = 3;
  const Eigen::Matrix4d A = interval_A();
  for (int i = 0; i < 4; ++i) raw.linear.push_back({A.row(i), RawY::Sense::Ge, 0.0});
  const ConeYDescription Y = homogenize_Y(raw);
  CHECK(Y.provenance == ConeYDescription::Provenance::AutoHomogenized);
  CHECK(Y.polyhedral());

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1), scale(0.1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::Vector4d y(1.0, u(rng), u(rng), u(rng));
    const bool raw_in = raw.contains(y);
    CHECK(raw_in == Y.contains(y));
    CHECK(raw_in == Y.contains(scale(rng) * y));
  }
  // moments of points of [0, 1/3] satisfy the chain y0 >= y1 >= 2 y2 >= ...
  CHECK(raw.contains(Eigen::Vector4d(1, 0.2, 0.04, 0.008)));
}

TEST_CASE("validation errors") {
  DROProblem pr = load("interval_linear.json");
  CHECK_NOTHROW(pr.validate());

  DROProblem low = pr;
  low.Y.d = 2;
  low.Y.blocks[0].map = low.Y.blocks[0].map.leftCols(3);
  CHECK_THROWS_AS(low.validate(), Error);

  DROProblem bad = pr;
  bad.f = parse_x_polynomial("x1", 3);
  CHECK_THROWS_AS(bad.validate(), Error);
}
