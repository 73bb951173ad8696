#pragma once

// Solver-neutral conic programs
//
//   minimize  c^T x   subject to  A x = b,  x in K = K_1 x ... x K_q,
//
// where every K_i acts on a contiguous slice of x and is one of
//   free     unrestricted variables (the dual of the zero cone)
//   nonneg   componentwise x >= 0
//   soc      x_0 >= ||x_{1:}||
//   psd(m)   a symmetric m x m matrix X >= 0 stored as its packed lower
//            triangle, column by column, off-diagonal entries unscaled.
//
// With unscaled packing, c^T x counts every off-diagonal X_ij once, so a cost
// of C_ij on the packed entry means an objective of C_ij * X_ij. The dual
// slack s = c - A^T y follows the same convention: for a psd block its
// off-diagonal entries are twice the dual matrix entries (see
// psd_block_matrix).

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace polydro {

enum class ConeKind { Free, Nonneg, SecondOrder, Psd };

const char* to_string(ConeKind kind);

struct ConeBlock {
  ConeKind kind = ConeKind::Free;
  std::size_t start = 0;
  std::size_t dim = 0;  // matrix side for psd, slice length otherwise

  std::size_t length() const { return kind == ConeKind::Psd ? dim * (dim + 1) / 2 : dim; }
};

struct ConicProgram {
  std::vector<ConeBlock> blocks;
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd b;

  std::size_t num_vars() const { return static_cast<std::size_t>(c.size()); }
  std::size_t num_rows() const { return static_cast<std::size_t>(b.size()); }
  /// Throws Error(Dimension) unless the blocks tile [0, num_vars()) in order
  /// and A, b, c agree in size.
  void check() const;
  /// Number of scalar cone "dimensions" used by interior-point methods.
  std::size_t barrier_degree() const;
};

/// Incremental construction of a ConicProgram. Variables are allocated in
/// blocks; rows are equalities sum(coeff * var) = rhs.
class ProgramBuilder {
 public:
  std::size_t add_block(ConeKind kind, std::size_t dim);
  std::size_t add_free(std::size_t count) { return add_block(ConeKind::Free, count); }
  std::size_t add_nonneg(std::size_t count) { return add_block(ConeKind::Nonneg, count); }
  std::size_t add_soc(std::size_t count) { return add_block(ConeKind::SecondOrder, count); }
  std::size_t add_psd(std::size_t side) { return add_block(ConeKind::Psd, side); }

  std::size_t add_row(double rhs = 0.0);
  void add_coeff(std::size_t row, std::size_t var, double value);
  void add_rhs(std::size_t row, double value) { rhs_[row] += value; }
  void add_cost(std::size_t var, double value);

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_rows() const { return rhs_.size(); }

  ConicProgram build() const;

 private:
  std::vector<ConeBlock> blocks_;
  std::size_t num_vars_ = 0;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<double> rhs_;
  std::vector<std::pair<std::size_t, double>> cost_;
};

/// constant + sum coeff * var
struct AffineExpr {
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}
  static AffineExpr var(std::size_t v, double coeff = 1.0);

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator*=(double a);
  AffineExpr& add_term(std::size_t var, double coeff);
  double evaluate(const Eigen::VectorXd& x) const;
};

/// Programs in inequality form
///
///   maximize  b^T u  subject to  F_i(u) in K_i,  G_j(u) = 0,
///
/// with affine F_i, G_j and free u. build() returns the conic dual of this
/// (equalities become free columns, cone constraints become cone blocks), so
/// the solver's equality duals y are u and the solver's primal x holds the
/// multipliers of each constraint. The normal equations are then sized by
/// the number of u, which keeps moment relaxations small.
class InequalityFormBuilder {
 public:
  std::size_t add_vars(std::size_t count);
  std::size_t num_vars() const { return num_vars_; }
  void add_objective(std::size_t var, double coeff);

  /// Returns a constraint id.
  std::size_t add_equality(AffineExpr e);
  /// Entries for psd constraints are the packed lower triangle of the matrix.
  std::size_t add_cone(ConeKind kind, std::size_t dim, std::vector<AffineExpr> entries);

  ConicProgram build() const;
  /// Block of a constraint in the built program (equalities: a length-1 slice
  /// of the leading free block).
  ConeBlock block(std::size_t id) const;

 private:
  struct Constraint {
    ConeKind kind;
    std::size_t dim;
    std::vector<AffineExpr> entries;
  };
  std::vector<Constraint> cons_;
  std::size_t num_vars_ = 0;
  std::size_t num_eq_ = 0;
  std::vector<std::pair<std::size_t, double>> obj_;
};

/// Variable index of entry (i, j) of a psd block starting at `start`.
std::size_t psd_var(std::size_t start, std::size_t side, std::size_t i, std::size_t j);

/// Symmetric matrix of a psd block. For the primal vector x the packed
/// entries are the matrix entries; for the dual slack s (dual = true)
/// off-diagonal entries are halved.
Eigen::MatrixXd psd_block_matrix(const ConeBlock& block, const Eigen::VectorXd& v, bool dual = false);

enum class SolveStatus { Optimal, Infeasible, Unbounded, Inaccurate, Failed };

const char* to_string(SolveStatus status);

/// Status of an inequality-form program from the solution of its dual:
/// the solver's Unbounded means the inequality form is infeasible and vice
/// versa.
SolveStatus inequality_form_status(SolveStatus solver_status);

struct SolverOptions {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  double tol_infeas = 1e-8;
  /// Residual level accepted as "inaccurate" when the target is missed.
  double tol_inaccurate = 1e-5;
  int max_iter = 120;
  double step_fraction = 0.99;
  bool verbose = false;

  SolverOptions tightened() const;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::Failed;
  Eigen::VectorXd x;  // primal
  Eigen::VectorXd y;  // equality duals
  Eigen::VectorXd s;  // cone duals, s = c - A^T y
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  std::string message;
};

struct BlockResidual {
  std::size_t block = 0;
  double primal_cone = 0.0;  // min eigenvalue / x0 - ||x1|| / min entry, 0 for free blocks
  double dual_cone = 0.0;    // same for s; for free blocks -max|s|
  double complementarity = 0.0;
};

struct ResidualReport {
  double equality = 0.0;       // ||A x - b||_2
  double dual_equality = 0.0;  // ||c - A^T y - s||_2
  double gap = 0.0;            // c^T x - b^T y
  std::vector<BlockResidual> blocks;

  /// Worst primal/dual cone violation (nonnegative number).
  double worst_cone_violation() const;
};

ResidualReport validate_solution(const ConicProgram& p, const ConicSolution& s);

/// Sparse text format. Header lines give sizes and the cone layout, then one
/// line per nonzero:
///
///   conic <vars> <rows>
///   cone <free|nonneg|soc|psd> <start> <dim>
///   c <var> <value>
///   A <row> <var> <value>
///   b <row> <value>
///
/// Lines starting with '#' are comments. Values use shortest round-trip form.
void write_program(std::ostream& out, const ConicProgram& p);
ConicProgram read_program(std::istream& in);

using SolverFunction = std::function<ConicSolution(const ConicProgram&, const SolverOptions&)>;

/// Solver backends by name. "ipm" (the bundled interior-point method) is
/// always present.
void register_solver(const std::string& name, SolverFunction fn);
std::vector<std::string> solver_names();
/// Throws Error(Unsupported) for unknown names.
ConicSolution solve(const ConicProgram& p, const SolverOptions& options = {}, const std::string& solver = "ipm");

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling.
ConicSolution solve_ipm(const ConicProgram& p, const SolverOptions& options = {});

}  // namespace polydro
