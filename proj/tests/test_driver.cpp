#include <doctest.h>

#include <cmath>

#include "polydro/driver.hpp"
#include "polydro/problem_io.hpp"

using namespace polydro;

namespace {

DROProblem load(const char* name) { return load_problem(std::string(POLYDRO_DATA_DIR) + "/" + name).problem; }

SosReport certified() {
  SosReport r;
  r.verdict = Verdict::Certified;
  return r;
}

}  // namespace

TEST_CASE("certificate precedence") {
  Certificate ev;
  CHECK(classify_certificate(ev) == CertificateKind::LowerBoundOnly);

  ev.membership = true;
  ev.gap_ok = true;
  ev.rank_w = 2;
  CHECK(classify_certificate(ev) == CertificateKind::LowerBoundOnly);
  ev.rank_w = 1;
  CHECK(classify_certificate(ev) == CertificateKind::RankOne);

  ev.battery.ran = true;
  ev.battery.f_convex = certified();
  ev.battery.h_concave = certified();
  CHECK(classify_certificate(ev) == CertificateKind::SosConvexTight);
  ev.battery.c_concave.push_back(SosReport{});
  CHECK(classify_certificate(ev) == CertificateKind::RankOne);

  Certificate h;
  h.membership = true;
  h.eta = 0.0;
  HeuristicResult hr;
  hr.kind = HeuristicResult::Kind::Optimizer;
  hr.value = 1.0;
  hr.bound = 1.0 - 1e-7;
  h.heuristic = hr;
  CHECK(classify_certificate(h) == CertificateKind::HeuristicVerified);
  h.eta = -1.0;
  CHECK(classify_certificate(h) == CertificateKind::LowerBoundOnly);
  h.eta = 0.0;
  h.heuristic->value = 1.1;
  CHECK(classify_certificate(h) == CertificateKind::LowerBoundOnly);
}

TEST_CASE("battery short-circuits unless asked not to") {
  DROProblem pr = load("heuristic.json");
  const SosBattery quick = run_sos_battery(pr);
  CHECK_FALSE(quick.all_certified());
  const SosBattery full = run_sos_battery(pr, {}, false);
  CHECK(full.h_concave.has_value());
  CHECK(full.c_concave.size() == pr.c.size());
}

TEST_CASE("interval example is certified tight") {
  const DROResult r = run(load("interval_linear.json"));
  CHECK(r.certificate.kind == CertificateKind::SosConvexTight);
  REQUIRE(r.x.size() == 2);
  CHECK(std::abs(r.x[0]) < 1e-4);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-4);
  CHECK(std::abs(r.value + 2.0) < 1e-5);
  CHECK(r.lower_bound <= r.value + 1e-6);
  CHECK(r.certificate.membership);
  CHECK_FALSE(r.trace.empty());
}

TEST_CASE("rank-one example goes through both rank checks") {
  const DROResult r = run(load("rank_one.json"));
  CHECK(r.certificate.kind == CertificateKind::RankOne);
  CHECK(r.certificate.double_rank_one);
  CHECK(std::abs(r.x[0] + 1.0 / 6) < 1e-3);
  CHECK(std::abs(r.x[1] + 1.0 / 6) < 1e-3);
  CHECK(std::abs(r.value + 1.0 / 12) < 1e-4);
}

TEST_CASE("heuristic example") {
  const DROResult r = run(load("heuristic.json"));
  CHECK(r.certificate.kind == CertificateKind::HeuristicVerified);
  CHECK(r.certificate.rank_w > 1);
  CHECK(r.certificate.eta >= -1e-6);
  CHECK(std::abs(r.lower_bound) < 1e-5);
}

TEST_CASE("initial order only stops after one pair") {
  DriverOptions opt;
  opt.initial_order_only = true;
  const DROResult r = run(load("interval_linear.json"), opt);
  CHECK(r.k == compute_degrees(load("interval_linear.json")).d0);
  CHECK(r.trace.size() == 1);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-3);
}
