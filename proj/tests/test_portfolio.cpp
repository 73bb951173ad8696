#include <doctest.h>

#include <cmath>
#include <sstream>

#include "polydro/driver.hpp"
#include "polydro/errors.hpp"
#include "polydro/moments.hpp"
#include "polydro/portfolio.hpp"
#include "polydro/problem_io.hpp"

using namespace polydro;

namespace {

RawY printed_box() {
  const DROProblem pr = load_problem(std::string(POLYDRO_DATA_DIR) + "/portfolio_mv.json").problem;
  REQUIRE(pr.raw_Y.has_value());
  return *pr.raw_Y;
}

Eigen::VectorXd column_mean(const Eigen::MatrixXd& m) { return m.colwise().mean().transpose(); }

}  // namespace

TEST_CASE("uniform sampler mean") {
  const SampleSet s = sample_generators({CoordinateDist::uniform(0, 1)}, 1000, 3);
  CHECK(s.size() == 1000);
  CHECK(std::abs(column_mean(s.samples)(0) - 0.5) < 0.05);
}

TEST_CASE("truncated samplers stay in the box") {
  const SampleSet s = sample_generators(
      {CoordinateDist::truncated_normal(0, 1, -1, 1), CoordinateDist::truncated_exponential(1.0, 0.5, 2.0),
       CoordinateDist::truncated_normal(0.45, std::sqrt(0.27), -1, 1)},
      2000, 11);
  CHECK(s.samples.col(0).minCoeff() >= -1.0);
  CHECK(s.samples.col(0).maxCoeff() <= 1.0);
  CHECK(s.samples.col(1).minCoeff() >= 0.5);
  CHECK(s.samples.col(1).maxCoeff() <= 2.0);
  CHECK(s.samples.col(2).minCoeff() >= -1.0);
  CHECK(s.samples.col(2).maxCoeff() <= 1.0);
  // symmetric truncation keeps the mean at the center
  CHECK(std::abs(column_mean(s.samples)(0)) < 0.05);
}

TEST_CASE("sampler is deterministic in the seed") {
  const std::vector<CoordinateDist> spec{CoordinateDist::uniform(-1, 1), CoordinateDist::truncated_normal(0, 2, -1, 1)};
  const SampleSet a = sample_generators(spec, 50, 42);
  const SampleSet b = sample_generators(spec, 50, 42);
  const SampleSet c = sample_generators(spec, 50, 43);
  CHECK(a.samples == b.samples);
  CHECK_FALSE(a.samples == c.samples);
  CHECK(a.seed == 42u);
  CHECK_FALSE(a.generator.empty());
}

TEST_CASE("invalid distributions are rejected") {
  CHECK_THROWS_AS(CoordinateDist::uniform(1, 0).check(), Error);
  CHECK_THROWS_AS(CoordinateDist::truncated_normal(0, -1, -1, 1).check(), Error);
  CHECK_THROWS_AS(sample_generators({CoordinateDist::truncated_exponential(-1, 0, 1)}, 5, 1), Error);
}

TEST_CASE("box of identical samples collapses to the point moments") {
  SampleSet s;
  s.samples = Eigen::MatrixXd(10, 2);
  for (int i = 0; i < 10; ++i) s.samples.row(i) << 0.3, -0.7;
  const RawY box = build_box_ambiguity(s, 2, 5);
  REQUIRE(box.boxes.size() == 1);
  const std::vector<double> pt{0.3, -0.7};
  const TMS pm = point_moments(pt, 2);
  for (std::size_t i = 0; i < pm.size(); ++i) {
    CHECK(box.boxes[0].lower(static_cast<Eigen::Index>(i)) == doctest::Approx(pm[i]));
    CHECK(box.boxes[0].upper(static_cast<Eigen::Index>(i)) == doctest::Approx(pm[i]));
  }
}

TEST_CASE("full-sample moments lie inside the batch box") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SampleSet s = sample_generators({CoordinateDist::uniform(0, 1), CoordinateDist::uniform(-1, 2)}, 100, seed);
    const RawY box = build_box_ambiguity(s, 3, 5);
    const Eigen::VectorXd full = empirical_moments(s.samples, 3);
    CHECK(box.boxes[0].lower(0) == 1.0);
    CHECK(box.boxes[0].upper(0) == 1.0);
    CHECK((full.array() >= box.boxes[0].lower.array() - 1e-12).all());
    CHECK((full.array() <= box.boxes[0].upper.array() + 1e-12).all());
    CHECK(box.contains(full, 1e-10));
  }
  SampleSet tiny;
  tiny.samples = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(build_box_ambiguity(tiny, 1, 5), Error);
  CHECK_THROWS_AS(build_box_ambiguity(tiny, 1, 1), Error);
}

TEST_CASE("J oracles") {
  const Eigen::Vector3d x(0.2, 0.5, 0.3);
  const Eigen::Vector3d xi(0.4, -0.1, 0.9);
  Eigen::MatrixXd one(1, 3);
  one.row(0) = xi.transpose();
  CHECK(evaluate_J(x, one) == doctest::Approx(-x.dot(xi)));

  Eigen::MatrixXd pair(2, 3);
  pair.row(0) = xi.transpose();
  pair.row(1) = -xi.transpose();
  CHECK(evaluate_J(x, pair) == doctest::Approx(x.dot(xi) * x.dot(xi)));
  CHECK_THROWS_AS(evaluate_J(x, Eigen::MatrixXd(0, 3)), Error);
}

TEST_CASE("linear model on the printed box puts everything on the first asset") {
  const DROProblem pr = build_portfolio_model(PortfolioKind::Linear, printed_box(), Eigen::VectorXd(), 0.0, 1.0);
  const SosBattery b = run_sos_battery(pr);
  CHECK(b.all_certified());
  const DROResult r = run(pr);
  CHECK(r.certificate.kind == CertificateKind::SosConvexTight);
  const Eigen::VectorXd x = portfolio_weights(r.x);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(x(1)) < 1e-3);
  CHECK(std::abs(x(2)) < 1e-3);
}

TEST_CASE("mean-variance model on the printed box") {
  const Eigen::Vector3d nu(0.5132, 0.4598, 0.4356);
  const DROProblem pr = build_portfolio_model(PortfolioKind::MeanVariance, printed_box(), nu, 0.0, 1.0);
  CHECK(run_sos_battery(pr).all_certified());
  const DROResult r = run(pr);
  CHECK(r.certificate.kind == CertificateKind::SosConvexTight);
  const Eigen::VectorXd x = portfolio_weights(r.x);
  CHECK(std::abs(x(0) - 0.7277) < 1e-2);
  CHECK(std::abs(x(1) - 0.1326) < 1e-2);
  CHECK(std::abs(x(2) - 0.1397) < 1e-2);
}

TEST_CASE("single asset is trivially feasible") {
  const SampleSet s = sample_generators({CoordinateDist::uniform(0, 1)}, 20, 1);
  const RawY box = build_box_ambiguity(s, 2, 5);
  const DROProblem pr = build_portfolio_model(PortfolioKind::MeanVariance, box, Eigen::VectorXd::Constant(1, 0.5), 0, 1);
  CHECK(pr.c.empty());
  const DROResult r = run(pr);
  CHECK(r.certificate.kind != CertificateKind::LowerBoundOnly);
  const Eigen::VectorXd x = portfolio_weights(r.x);
  REQUIRE(x.size() == 1);
  CHECK(x(0) == 1.0);
}

TEST_CASE("small simulation is reproducible") {
  SimulationConfig cfg;
  cfg.n = 3;
  cfg.M = 60;
  cfg.d = 1;
  cfg.sims = 3;
  cfg.threads = 2;
  const SimulationSummary a = simulate_portfolio(cfg);
  const SimulationSummary b = simulate_portfolio(cfg);
  REQUIRE(a.runs.size() == 3);
  CHECK(a.avg_J_out == b.avg_J_out);
  CHECK(a.avg_J_in == b.avg_J_in);
  for (const SimulationRun& r : a.runs) {
    const Eigen::VectorXd x = portfolio_weights(r.x);
    CHECK(x.sum() == doctest::Approx(1.0));
    CHECK(x.minCoeff() >= -1e-6);
  }
  CHECK(summary_csv_row(a).rfind("1,60,", 0) == 0);
}

TEST_CASE("sample CSV") {
  std::istringstream ok("xi1,xi2\n0.1, 0.2\n0.3,0.4\n\n0.5,0.6\n");
  const SampleSet s = read_samples_csv(ok);
  REQUIRE(s.size() == 3);
  REQUIRE(s.dim() == 2);
  CHECK(s.samples(2, 1) == 0.6);

  std::istringstream bad_header("x1,x2\n1,2\n");
  CHECK_THROWS_AS(read_samples_csv(bad_header), ParseError);
  std::istringstream bad_cell("xi1,xi2\n1,2\n3,abc\n");
  try {
    read_samples_csv(bad_cell);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 2);
  }
  std::istringstream short_row("xi1,xi2\n1\n");
  CHECK_THROWS_AS(read_samples_csv(short_row), ParseError);
}
