#pragma once

// JSON problem files and result documents.
//
//   {
//     "name": "...",                       optional
//     "n": 2, "p": 1,
//     "f": "x1 - 2*x2",
//     "c": ["x1", "x2", "1 - x1 - x2"],    optional, empty means X = R^n
//     "h": "1 + x1*xi1 - 2*x2*xi1^2",
//     "g": ["xi1", "1 - xi1"],             optional, empty means S = R^p
//     "Y": { "degree": 3, "raw": [...] }   or  { "degree": 3, "cone": [...] }
//     "options": { "max_order", "max_k1", "tol_rank", "seed", "solver" }
//   }
//
// Raw Y entries describe Y itself (y0 = 1 is implied). Expressions are
// polynomials in xi read as linear functionals, so "xi1 + xi1^2" means
// y_10 + y_20:
//   {"type": "ge" | "le" | "eq", "expr": "...", "rhs": 1}
//   {"type": "box", "lower": [...], "upper": [...]}          full moment vectors
//   {"type": "norm", "exprs": [...], "offsets": [...], "bound": 2}
//   {"type": "psd_bound", "side": 2, "entries": [...], "bound": 0.5}
// psd entries are packed lower-triangular, column by column.
//
// Cone entries describe cone(Y) directly:
//   {"type": "nonneg", "exprs": [...]}  each expr >= 0
//   {"type": "soc", "exprs": [...]}     first expr >= norm of the rest
//   {"type": "psd", "side": 2, "entries": [...]}

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "polydro/driver.hpp"
#include "polydro/dro.hpp"

namespace polydro {

struct ProblemOverrides {
  std::optional<unsigned> max_order;
  std::optional<unsigned> max_k1;
  std::optional<double> tol_rank;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;

  bool operator==(const ProblemOverrides&) const = default;
};

struct ProblemFile {
  DROProblem problem;
  ProblemOverrides options;
};

/// Throws ParseError (line/column of the JSON text) for syntax errors and
/// Error(Parse) naming the offending field for semantic ones.
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);

/// The "raw" array of a Y block.
nlohmann::json raw_y_to_json(const RawY& raw);
nlohmann::json problem_to_json(const ProblemFile& file);
std::string serialize_problem(const ProblemFile& file);

/// Structural equality: same dimensions, polynomials, cone(Y) maps and raw Y.
bool same_instance(const DROProblem& a, const DROProblem& b, double tol = 0.0);

void apply_overrides(const ProblemOverrides& o, DriverOptions& opt);

nlohmann::json battery_to_json(const SosBattery& battery);
nlohmann::json result_to_json(const DROResult& result, const DROProblem& problem);
std::string result_summary(const DROResult& result, const DROProblem& problem);

}  // namespace polydro
