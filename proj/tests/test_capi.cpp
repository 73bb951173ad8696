#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "polydro/polydro.h"

namespace {

std::string data(const char* name) { return std::string(POLYDRO_DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("c api: load, solve, read back") {
  polydro_problem* pr = nullptr;
  REQUIRE(polydro_problem_load(data("interval_linear.json").c_str(), &pr) == POLYDRO_OK);
  CHECK(polydro_problem_n(pr) == 2);
  CHECK(polydro_problem_p(pr) == 1);

  polydro_options opt;
  polydro_options_default(&opt);
  polydro_result* res = nullptr;
  REQUIRE(polydro_solve(pr, &opt, &res) == POLYDRO_OK);
  CHECK(polydro_result_certificate(res) == POLYDRO_SOS_CONVEX_TIGHT);
  CHECK(std::strcmp(polydro_certificate_name(POLYDRO_SOS_CONVEX_TIGHT), "sos_convex_tight") == 0);

  double x[4] = {9, 9, 9, 9};
  CHECK(polydro_result_x(res, x, 4) == 2);
  CHECK(std::abs(x[0]) < 1e-4);
  CHECK(std::abs(x[1] - 1) < 1e-4);
  CHECK(x[2] == 9);
  CHECK(std::abs(polydro_result_value(res) + 2) < 1e-5);
  CHECK(polydro_result_solver_failure(res) == 0);

  const size_t atoms = polydro_result_atom_count(res);
  for (size_t i = 0; i < atoms; ++i) {
    double w = 0, pt[1] = {0};
    CHECK(polydro_result_atom(res, i, &w, pt, 1) == 1);
    CHECK(w > 0);
  }
  CHECK(polydro_result_atom(res, atoms, nullptr, nullptr, 0) == 0);

  char* js = nullptr;
  REQUIRE(polydro_result_json(res, &js) == POLYDRO_OK);
  CHECK(std::string(js).find("\"certificate\"") != std::string::npos);
  polydro_string_free(js);
  char* sum = nullptr;
  REQUIRE(polydro_result_summary(res, &sum) == POLYDRO_OK);
  CHECK(std::string(sum).find("x* =") != std::string::npos);
  polydro_string_free(sum);

  char* text = nullptr;
  REQUIRE(polydro_problem_serialize(pr, &text) == POLYDRO_OK);
  polydro_problem* again = nullptr;
  CHECK(polydro_problem_parse(text, &again) == POLYDRO_OK);
  polydro_string_free(text);
  polydro_problem_free(again);

  polydro_result_free(res);
  polydro_problem_free(pr);
}

TEST_CASE("c api: errors carry status, message and position") {
  polydro_problem* pr = nullptr;
  CHECK(polydro_problem_parse("{\n \"n\": }", &pr) == POLYDRO_ERR_PARSE);
  CHECK(pr == nullptr);
  CHECK(polydro_last_error_line() == 2);
  CHECK(std::strlen(polydro_last_error()) > 0);

  CHECK(polydro_problem_load("/nonexistent/problem.json", &pr) == POLYDRO_ERR_IO);
  CHECK(polydro_problem_parse(nullptr, &pr) == POLYDRO_ERR_ARGUMENT);
  CHECK(std::strcmp(polydro_status_name(POLYDRO_ERR_SOLVER), "solver") == 0);

  REQUIRE(polydro_problem_load(data("interval_linear.json").c_str(), &pr) == POLYDRO_OK);
  polydro_options opt;
  polydro_options_default(&opt);
  opt.solver = "no-such-solver";
  polydro_result* res = nullptr;
  CHECK(polydro_solve(pr, &opt, &res) == POLYDRO_ERR_UNSUPPORTED);
  CHECK(res == nullptr);
  polydro_problem_free(pr);
}

TEST_CASE("c api: convexity battery") {
  polydro_problem* pr = nullptr;
  REQUIRE(polydro_problem_load(data("portfolio_mv.json").c_str(), &pr) == POLYDRO_OK);
  char* js = nullptr;
  int all = 0;
  REQUIRE(polydro_check_convexity(pr, nullptr, &js, &all) == POLYDRO_OK);
  CHECK(all == 1);
  CHECK(std::string(js).find("h_concave") != std::string::npos);
  polydro_string_free(js);
  polydro_problem_free(pr);
}

TEST_CASE("c api: simulation row") {
  polydro_simulation cfg;
  polydro_simulation_default(&cfg);
  CHECK(cfg.n == 10);
  cfg.n = 3;
  cfg.M = 40;
  cfg.d = 1;
  cfg.sims = 2;
  char* row = nullptr;
  char* runs = nullptr;
  REQUIRE(polydro_portfolio_simulate(&cfg, &row, &runs) == POLYDRO_OK);
  CHECK(std::string(row).rfind("1,40,", 0) == 0);
  CHECK(std::string(runs).find("J_out") != std::string::npos);
  polydro_string_free(row);
  polydro_string_free(runs);
  CHECK(std::string(polydro_simulation_csv_header()) == "d,M,avg_J_in,avg_J_out,avg_time");
}

TEST_CASE("c api: moment box from a sample CSV") {
  const std::string path = "capi_samples.csv";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f);
    std::fputs("xi1\n0.1\n0.2\n0.3\n0.4\n0.5\n0.6\n0.7\n0.8\n0.9\n1.0\n", f);
    std::fclose(f);
  }
  char* js = nullptr;
  REQUIRE(polydro_box_from_csv(path.c_str(), 1, 5, &js) == POLYDRO_OK);
  const std::string text(js);
  polydro_string_free(js);
  CHECK(text.find("\"box\"") != std::string::npos);
  // batch means 0.15, 0.35, ..., 0.95
  CHECK(text.find("0.15") != std::string::npos);
  CHECK(text.find("0.95") != std::string::npos);

  CHECK(polydro_box_from_csv("/nonexistent.csv", 1, 5, &js) == POLYDRO_ERR_IO);
  CHECK(polydro_box_from_csv(path.c_str(), 1, 20, &js) == POLYDRO_ERR_SEMANTIC);
  std::remove(path.c_str());
}
