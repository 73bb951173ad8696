#include <doctest.h>

#include <cmath>

#include "polydro/errors.hpp"
#include "polydro/poly_text.hpp"
#include "polydro/problem_io.hpp"
#include "polydro/relax.hpp"
#include "polydro/sos.hpp"

using namespace polydro;

namespace {

DROProblem load(const char* name) { return load_problem(std::string(POLYDRO_DATA_DIR) + "/" + name).problem; }

}  // namespace

TEST_CASE("pair: interval example reaches the optimal value at the first order") {
  const DROProblem pr = load("interval_linear.json");
  const RelaxationOutcome out = solve_moment_sos_pair(pr, 2);
  REQUIRE((out.status == SolveStatus::Optimal || out.status == SolveStatus::Inaccurate));
  CHECK(out.gamma == doctest::Approx(-2.0).epsilon(1e-5));
  CHECK(out.gamma <= out.f_w + 1e-6);
  CHECK(out.gap_ok);
  CHECK(out.w[0] == doctest::Approx(1.0));
  CHECK(out.y[0] > 0.0);
  CHECK_THROWS_AS(build_moment_sos_pair(pr, 1), Error);
}

TEST_CASE("pair and direct relaxation agree on a polyhedral Y") {
  for (const char* name : {"interval_linear.json", "interval_nonlinear.json", "simplex_support.json"}) {
    CAPTURE(name);
    const DROProblem pr = load(name);
    const unsigned k = compute_degrees(pr).d0;
    const RelaxationOutcome pair = solve_moment_sos_pair(pr, k);
    const DirectOutcome direct = solve_direct_relaxation(pr, k);
    REQUIRE(direct.status != SolveStatus::Failed);
    CHECK(std::abs(pair.gamma - direct.value) <= 1e-5 * std::max(1.0, std::abs(direct.value)));
  }
}

TEST_CASE("direct relaxation refuses a non-polyhedral Y") {
  CHECK_THROWS_AS(build_direct_relaxation(load("cubic_soc.json"), 3), Error);
}

TEST_CASE("least-trace refinement on the interval example is rank one") {
  const DROProblem pr = load("interval_linear.json");
  const RelaxationOutcome out = refine_least_trace(pr, 2, -2.0);
  REQUIRE((out.status == SolveStatus::Optimal || out.status == SolveStatus::Inaccurate));
  const double expected[6] = {1, 0, 1, 0, 0, 1};
  for (int i = 0; i < 6; ++i) CHECK(out.w[static_cast<std::size_t>(i)] == doctest::Approx(expected[i]).epsilon(1e-4));
  CHECK(numeric_rank(moment_matrix(out.w, 1), 1e-6) == 1);
}

TEST_CASE("random SOS objective is SOS and seeded") {
  const Polynomial R = random_sos_objective(2, 2, 7);
  CHECK(R.degree() == 4);
  CHECK(R == random_sos_objective(2, 2, 7));
  CHECK_FALSE(R == random_sos_objective(2, 2, 8));
  CHECK(check_sos(R, 2).verdict == Verdict::Certified);
}

TEST_CASE("TKMP: a Dirac moment vector extends flatly") {
  // y = [0.3]_3 on [0, 1]
  std::vector<double> v{1, 0.3, 0.09, 0.027};
  const TMS y(1, 3, v);
  const std::vector<Polynomial> g{parse_xi_polynomial("xi1", 1), parse_xi_polynomial("1 - xi1", 1)};
  const TkmpOutcome tk = solve_tkmp(y, g, 2, random_sos_objective(1, 2, 1));
  REQUIRE(tk.status == SolveStatus::Optimal);
  CHECK(tk.z[4] == doctest::Approx(0.0081).epsilon(1e-5));
  const auto flat = flat_truncation_check(tk.z, 2, 1, 2, 1e-6);
  REQUIRE(flat.has_value());
  CHECK(flat->rank == 1);
}

TEST_CASE("TKMP: a vector outside the moment cone is infeasible") {
  // y2 < y1^2 cannot come from a measure
  const TMS y(1, 2, std::vector<double>{1, 0.5, 0.1});
  const std::vector<Polynomial> g{parse_xi_polynomial("xi1", 1), parse_xi_polynomial("1 - xi1", 1)};
  CHECK(solve_tkmp(y, g, 1, random_sos_objective(1, 1, 1)).status == SolveStatus::Infeasible);
}

TEST_CASE("heuristic recovers the origin on the nonconvex example") {
  const DROProblem pr = load("heuristic.json");
  const RelaxationOutcome out = solve_moment_sos_pair(pr, compute_degrees(pr).d0 + 1);
  REQUIRE((out.status == SolveStatus::Optimal || out.status == SolveStatus::Inaccurate));
  const HeuristicResult hr = solve_heuristic_pop(pr, out.y, {});
  REQUIRE(hr.kind == HeuristicResult::Kind::Optimizer);
  REQUIRE(hr.x.size() == 2);
  CHECK(std::abs(hr.x[0]) < 1e-3);
  CHECK(std::abs(hr.x[1]) < 1e-3);
}

TEST_CASE("feasibility check separates feasible and infeasible points") {
  const DROProblem pr = load("interval_linear.json");
  const FeasibilityCheck ok = verify_feasibility(Eigen::Vector2d(0, 1), pr, 2);
  CHECK(ok.eta >= -1e-6);
  const FeasibilityCheck bad = verify_feasibility(Eigen::Vector2d(0, 10), pr, 2);
  CHECK(bad.normalized < 0.0);
  CHECK(std::isinf(bad.eta));
}
