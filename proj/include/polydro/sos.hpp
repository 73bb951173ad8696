#pragma once

// Sums of squares, truncated quadratic modules and their matrix versions,
// encoded into conic programs through Gram matrices.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydro/conic.hpp"
#include "polydro/polynomial.hpp"

namespace polydro {

/// Polynomial whose coefficients are affine in program variables.
using PolyExpr = std::map<Exponent, AffineExpr, GradedLess>;

PolyExpr to_expr(const Polynomial& p);
Polynomial evaluate_expr(const PolyExpr& e, std::size_t var_count, const Eigen::VectorXd& x);

struct GramBlock {
  std::size_t generator = 0;  // index into the encoding's generator list
  std::size_t start = 0;      // first program variable of the psd block
  std::size_t side = 0;
  unsigned half_degree = 0;   // monomials [v]_s with s = half_degree
};

/// Membership of a symmetric polynomial matrix T (side r) in the matrix
/// quadratic module  sum_j g_j * (I_r (x) [v]_{s_j})^T X_j (I_r (x) [v]_{s_j}),
/// X_j psd, with g_0 = 1 and s_j = k - ceil(deg g_j / 2). For r = 1 this is
/// the truncation qmod(g)_{2k}; with no generators it is Sigma[v]_{2k}.
///
/// One equality row per packed entry (i, j) of T and per monomial of
/// graded_basis(var_count, 2k):  Gram part - (variable part of T) = constant of T.
struct QmodEncoding {
  std::size_t side = 1;
  std::size_t var_count = 0;
  unsigned k = 0;
  std::vector<Polynomial> generators;  // generators[0] = 1
  std::vector<GramBlock> grams;
  std::size_t first_row = 0;
  std::size_t monomials = 0;  // rows per matrix entry

  std::size_t row(std::size_t i, std::size_t j, std::size_t monomial) const;
};

/// `target` holds packed lower-triangular entries, column by column.
/// Generators whose degree exceeds 2k are skipped. Throws Error(Degree) if a
/// target entry has degree above 2k.
QmodEncoding encode_matrix_qmod(ProgramBuilder& pb, const std::vector<PolyExpr>& target, std::size_t side,
                                std::size_t var_count, const std::vector<Polynomial>& g, unsigned k);

QmodEncoding encode_qmod_membership(ProgramBuilder& pb, const PolyExpr& target, std::size_t var_count,
                                    const std::vector<Polynomial>& g, unsigned k);

QmodEncoding encode_sos(ProgramBuilder& pb, const PolyExpr& target, std::size_t var_count, unsigned k);

/// Adds sum of Gram traces to the objective (keeps feasibility programs bounded).
void add_gram_trace_cost(ProgramBuilder& pb, const QmodEncoding& enc, double weight = 1.0);

/// Gram matrices of a solved encoding.
std::vector<Eigen::MatrixXd> gram_matrices(const QmodEncoding& enc, const Eigen::VectorXd& x);

/// sum_j g_j * Gram-part, as packed polynomial matrix entries.
std::vector<Polynomial> reassemble(const QmodEncoding& enc, const Eigen::VectorXd& x);

enum class Verdict { Certified, Refuted, Unknown };

const char* to_string(Verdict v);

struct SosReport {
  Verdict verdict = Verdict::Unknown;
  SolveStatus status = SolveStatus::Failed;
  unsigned order = 0;                 // 2k of the encoding that produced the verdict
  double residual = 0.0;              // reassembly residual, coefficient max-norm
  std::vector<Eigen::MatrixXd> grams;
  std::string note;
};

struct SosOptions {
  SolverOptions solver;
  std::string backend = "ipm";
  double reassembly_tol = 1e-7;  // times max(1, largest target coefficient)
};

/// Standalone membership tests. Refuted means the solver returned an
/// infeasibility certificate for that truncation order.
SosReport check_sos(const Polynomial& target, unsigned k, const SosOptions& opt = {});
SosReport check_qmod_membership(const Polynomial& target, const std::vector<Polynomial>& g, unsigned k,
                                const SosOptions& opt = {});

/// Hessian test: grad^2 psi = (I_n (x) [x]_{k-1})^T X (I_n (x) [x]_{k-1}), X psd.
/// Certified means SOS-convex, Refuted means not SOS-convex. Polynomials of
/// degree <= 1 are certified without solving; odd degree >= 3 is refuted.
/// Throws Error(Solver) if the backend fails.
SosReport is_sos_convex(const Polynomial& psi, const SosOptions& opt = {});

/// Sufficient test for SOS-concavity of h(., xi) in x uniformly over
/// S = {g >= 0}: -grad_x^2 h is in the matrix quadratic module of g over the
/// variables (x, xi). h lives on n + p variables (x first), g on p variables.
/// Never returns Refuted. With k_prime = 0 the default ceil(deg h / 2) is
/// used and raised once on failure.
SosReport is_robust_sos_concave(const Polynomial& h, std::size_t n, std::size_t p, const std::vector<Polynomial>& g,
                                unsigned k_prime = 0, const SosOptions& opt = {});

}  // namespace polydro
