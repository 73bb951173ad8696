#pragma once

// Conic programs of the moment-SOS method: the primal-dual pair over (w) and
// (gamma, y, z), the direct moment relaxation with explicit Y* generators,
// the truncated moment problem used for flat-extension checks, and the
// heuristic polynomial program with its feasibility verification.
//
// Every program here is built in inequality form (see InequalityFormBuilder):
// the unknowns (gamma, z, Gram entries, moments) are the solver's equality
// duals and the multipliers come back as the solver's primal vector.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydro/conic.hpp"
#include "polydro/dro.hpp"
#include "polydro/moments.hpp"

namespace polydro {

struct RelaxOptions {
  SolverOptions solver;
  std::string backend = "ipm";
  /// Refuse programs with a psd block larger than this.
  std::size_t max_psd_side = 2000;
  /// When nonempty, every built program is written there as <label>.conic.
  std::string dump_dir;
};

/// Affine expression per tms entry: either a program variable or a constant.
using TmsExprs = std::vector<AffineExpr>;

/// Adds the psd constraint map(z) >= 0 where z is given entrywise by exprs.
std::size_t add_matrix_constraint(InequalityFormBuilder& ib, const LinearMatrixMap& map, const TmsExprs& exprs);

struct InequalitySolution {
  SolveStatus status = SolveStatus::Failed;  // from the inequality form's point of view
  Eigen::VectorXd u;                         // unknowns
  Eigen::VectorXd multipliers;               // solver primal vector
  double value = 0.0;                        // b^T u (maximized)
  int iterations = 0;
  std::string message;
};

/// Solves, retrying once with tightened tolerances on an inaccurate status.
InequalitySolution solve_inequality_form(const InequalityFormBuilder& ib, const RelaxOptions& opt,
                                         const std::string& label);

struct PairProgram {
  InequalityFormBuilder builder;
  Degrees degrees;
  unsigned k = 0;
  std::size_t gamma = 0;                 // u index of gamma
  std::size_t z_first = 0;               // u index of z_0; z over graded_basis(p, 2k)
  std::vector<std::size_t> coefficient_constraints;  // per monomial of graded_basis(n, 2t)
};

/// Throws Error(Degree) if k < d0 or 2k < d, Error(Dimension) above the cap.
PairProgram build_moment_sos_pair(const DROProblem& problem, unsigned k, const RelaxOptions& opt = {});

struct RelaxationOutcome {
  unsigned k = 0;
  SolveStatus status = SolveStatus::Failed;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  TMS w, y, z;
  double f_w = std::numeric_limits<double>::quiet_NaN();  // <f, w>
  double raw_w0 = 0.0;
  bool degenerate_recovery = false;
  double gap = std::numeric_limits<double>::quiet_NaN();  // <f, w> - gamma
  bool gap_ok = false;
  int iterations = 0;
  std::string message;
};

RelaxationOutcome solve_moment_sos_pair(const DROProblem& problem, unsigned k, const RelaxOptions& opt = {});

/// Same pair with trace M_t[w] as the objective and <f, w> <= f_star (plus a
/// 1e-7 relative slack). Picks a least-trace point of the optimal face, which
/// is rank one whenever the face contains a unique rank-one point of smallest
/// trace. gamma of the outcome is f_star.
RelaxationOutcome refine_least_trace(const DROProblem& problem, unsigned k, double f_star, const RelaxOptions& opt = {});

/// Shared by the two above; bound unset solves the plain pair.
RelaxationOutcome solve_pair_stage(const DROProblem& problem, unsigned k, const RelaxOptions& opt,
                                   std::optional<double> bound);

struct DirectProgram {
  InequalityFormBuilder builder;
  Degrees degrees;
  unsigned k = 0;
  TmsExprs w;       // w over graded_basis(n, 2t), w_0 = 1
  double f0 = 0.0;  // constant of f (not part of the program objective)
};

/// Moment relaxation in w with Y* = {A^T u, u >= 0}. Throws Error(Unsupported)
/// for non-polyhedral cone(Y).
DirectProgram build_direct_relaxation(const DROProblem& problem, unsigned k, const RelaxOptions& opt = {});

struct DirectOutcome {
  SolveStatus status = SolveStatus::Failed;
  double value = std::numeric_limits<double>::quiet_NaN();
  TMS w;
};

DirectOutcome solve_direct_relaxation(const DROProblem& problem, unsigned k, const RelaxOptions& opt = {});

/// R = [xi]_{k1}^T B^T B [xi]_{k1} with B square standard Gaussian.
Polynomial random_sos_objective(std::size_t p, unsigned k1, std::uint64_t seed);

struct TkmpProgram {
  InequalityFormBuilder builder;
  unsigned k1 = 0;
  TmsExprs z;  // over graded_basis(p, 2k1); entries of degree <= d are constants
};

/// min <R, z> s.t. z|_d = y_star, M_{k1}[z] >= 0, L_g^{(k1)}[z] >= 0.
TkmpProgram build_tkmp(const TMS& y_star, const std::vector<Polynomial>& g, unsigned k1, const Polynomial& R,
                       const RelaxOptions& opt = {});

struct TkmpOutcome {
  SolveStatus status = SolveStatus::Failed;  // Infeasible is a regular outcome
  TMS z;
  double value = std::numeric_limits<double>::quiet_NaN();
};

TkmpOutcome solve_tkmp(const TMS& y_star, const std::vector<Polynomial>& g, unsigned k1, const Polynomial& R,
                       const RelaxOptions& opt = {});

struct HeuristicOptions {
  unsigned max_order = 0;  // 0: three orders above the first
  double rank_tol = 1e-6;
  std::uint64_t seed = 0;
};

struct HeuristicResult {
  enum class Kind { Optimizer, Infeasible, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::vector<double> x;
  double value = std::numeric_limits<double>::quiet_NaN();  // f(x)
  double bound = std::numeric_limits<double>::quiet_NaN();  // relaxation value at the final order
  unsigned order = 0;
  std::vector<std::vector<double>> optimizers;  // every extracted point
  std::string note;
};

const char* to_string(HeuristicResult::Kind kind);

/// min f(x) s.t. c(x) >= 0, h(x)^T y_star >= 0 by the moment hierarchy, with a
/// second stage minimizing trace M_k[w] over the optimal face so that a
/// unique minimizer of least norm shows up as a flat truncation.
HeuristicResult solve_heuristic_pop(const DROProblem& problem, const TMS& y_star, const HeuristicOptions& hopt,
                                    const RelaxOptions& opt = {});

struct FeasibilityCheck {
  /// min h(x)^T y over cone(Y) and the moment relaxation of S. It is a
  /// homogeneous program, so the value is 0 or -infinity.
  double eta = 0.0;
  /// Same objective over the slice trace M_k[z] <= 1; its sign decides eta.
  double normalized = 0.0;
  SolveStatus status = SolveStatus::Failed;
  unsigned k = 0;
};

FeasibilityCheck verify_feasibility(const Eigen::VectorXd& x, const DROProblem& problem, unsigned k,
                                    const RelaxOptions& opt = {}, double tol = 1e-7);

}  // namespace polydro
