#include <doctest.h>

#include <filesystem>

#include "polydro/errors.hpp"
#include "polydro/poly_text.hpp"
#include "polydro/problem_io.hpp"

using namespace polydro;

namespace {

const char* kSmall = R"({
  "n": 1, "p": 1,
  "f": "x1",
  "h": "1 + x1*xi1",
  "g": ["xi1", "1 - xi1"],
  "Y": {"degree": 1, "raw": [{"type": "le", "expr": "xi1", "rhs": 0.5}]}
})";

std::string with(const std::string& key, const std::string& value) {
  std::string s = kSmall;
  const std::size_t at = s.find("\"f\"");
  return s.insert(at, "\"" + key + "\": " + value + ",\n  ");
}

}  // namespace

TEST_CASE("round trip on every bundled problem") {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(POLYDRO_DATA_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const ProblemFile a = load_problem(entry.path().string());
    const ProblemFile b = parse_problem(serialize_problem(a));
    CHECK(same_instance(a.problem, b.problem));
    CHECK(a.options == b.options);
    CHECK(serialize_problem(a) == serialize_problem(b));
    ++count;
  }
  CHECK(count >= 9);
}

TEST_CASE("interval example parses with t = 1 and d = 3") {
  const DROProblem pr = load_problem(std::string(POLYDRO_DATA_DIR) + "/interval_linear.json").problem;
  CHECK(pr.n == 2);
  CHECK(pr.p == 1);
  CHECK(compute_degrees(pr).t == 1);
  CHECK(pr.Y.d == 3);
  CHECK(pr.c.size() == 3);
}

TEST_CASE("empty constraint list means the whole space") {
  const ProblemFile pf = parse_problem(kSmall);
  CHECK(pf.problem.c.empty());
  CHECK(pf.problem.raw_Y.has_value());
  CHECK_NOTHROW(pf.problem.validate());
  CHECK(parse_problem(with("c", "[]")).problem.c.empty());
}

TEST_CASE("options block") {
  const ProblemFile pf = parse_problem(with("options", R"({"max_order": 4, "tol_rank": 1e-7, "seed": 9, "solver": "ipm"})"));
  CHECK(pf.options.max_order == 4u);
  CHECK(pf.options.tol_rank == 1e-7);
  CHECK(pf.options.seed == 9u);
  DriverOptions opt;
  apply_overrides(pf.options, opt);
  CHECK(opt.max_order == 4u);
  CHECK(opt.rank_tol == 1e-7);
  CHECK(opt.seed == 9u);
  CHECK_FALSE(opt.max_k1);
}

TEST_CASE("malformed exponent is a syntax error with a position") {
  std::string text = kSmall;
  text.replace(text.find("\"x1\""), 4, "\"x1^-2\"");
  try {
    parse_problem(text);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("f:") != std::string::npos);
    CHECK(std::string(e.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("broken JSON reports line and column") {
  try {
    parse_problem("{\n  \"n\": 1,\n  \"p\": ]\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 8);
  }
}

TEST_CASE("unknown keys and bad names are rejected") {
  CHECK_THROWS_AS(parse_problem(with("colour", "\"red\"")), Error);
  std::string xi_in_f = kSmall;
  xi_in_f.replace(xi_in_f.find("\"x1\""), 4, "\"xi1\"");
  CHECK_THROWS_AS(parse_problem(xi_in_f), Error);
  std::string x3 = kSmall;
  x3.replace(x3.find("\"x1\""), 4, "\"x3\"");
  CHECK_THROWS_AS(parse_problem(x3), Error);
}

TEST_CASE("moment degree below the xi-degree of h is a semantic error") {
  std::string text = kSmall;
  text.replace(text.find("1 + x1*xi1"), 10, "1 + x1*xi1^2");
  try {
    parse_problem(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Semantic);
  }
}

TEST_CASE("result document") {
  const ProblemFile pf = load_problem(std::string(POLYDRO_DATA_DIR) + "/interval_linear.json");
  DriverOptions opt;
  const DROResult r = run(pf.problem, opt);
  const nlohmann::json doc = result_to_json(r, pf.problem);
  CHECK(doc["certificate"] == "sos_convex_tight");
  CHECK(doc["x"].size() == 2);
  CHECK(doc.contains("trace"));
  CHECK(result_summary(r, pf.problem).find("sos_convex_tight") != std::string::npos);
}
