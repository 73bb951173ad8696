#pragma once

// A DRO instance
//
//   min f(x)  s.t.  inf_{mu in M} E_mu[h(x, xi)] >= 0,  c(x) >= 0,
//
// with M the measures supported on S = {g >= 0} whose moments up to degree
// d lie in Y. The ambiguity set is carried as cone(Y), a homogeneous cone in
// the moment vector y indexed by graded_basis(p, d).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydro/conic.hpp"
#include "polydro/polynomial.hpp"

namespace polydro {

/// One conic block of cone(Y): rows(map) * y lies in the cone. For psd
/// blocks the rows are the packed lower triangle of the matrix.
struct ConeYBlock {
  ConeKind kind = ConeKind::Nonneg;
  std::size_t dim = 0;
  Eigen::MatrixXd map;
};

struct ConeYDescription {
  enum class Provenance { UserHomogeneous, AutoHomogenized };

  std::size_t p = 0;
  unsigned d = 0;
  std::vector<ConeYBlock> blocks;
  Provenance provenance = Provenance::UserHomogeneous;

  std::size_t size() const;  // length of y
  /// Largest violation over blocks: -(min entry) for nonneg, ||tail|| - head
  /// for soc, -(min eigenvalue) for psd. <= 0 means membership.
  double violation(const Eigen::VectorXd& y) const;
  bool contains(const Eigen::VectorXd& y, double tol = 1e-9) const { return violation(y) <= tol; }
  bool polyhedral() const;
  /// Throws Error(Dimension) on inconsistent block shapes.
  void check() const;
};

/// Row vector r with r . y = <q, y> for q in R[xi]_d.
Eigen::RowVectorXd functional_row(const Polynomial& q, unsigned d);
Polynomial row_polynomial(const Eigen::RowVectorXd& row, std::size_t p, unsigned d);

/// Moment constraints with the normalization y_0 = 1 implied.
struct RawY {
  enum class Sense { Ge, Le, Eq };
  struct Linear {
    Eigen::RowVectorXd a;
    Sense sense = Sense::Ge;
    double rhs = 0.0;
  };
  struct Box {
    Eigen::VectorXd lower, upper;
  };
  /// ||B y + offset||_2 <= bound
  struct Norm {
    Eigen::MatrixXd B;
    Eigen::VectorXd offset;
    double bound = 0.0;
  };
  /// M(y) <= bound * I, M given by packed rows
  struct PsdBound {
    std::size_t side = 0;
    Eigen::MatrixXd map;
    double bound = 0.0;
  };

  std::size_t p = 0;
  unsigned d = 0;
  std::vector<Linear> linear;
  std::vector<Box> boxes;
  std::vector<Norm> norms;
  std::vector<PsdBound> psd_bounds;

  /// Evaluates the raw description at y (y_0 is required to equal 1).
  double violation(const Eigen::VectorXd& y) const;
  bool contains(const Eigen::VectorXd& y, double tol = 1e-9) const { return violation(y) <= tol; }
};

/// Constants become multiples of y_0 and y_0 >= 0 is added. The equality
/// y_0 = 1 itself is dropped.
ConeYDescription homogenize_Y(const RawY& raw);

/// Y* = {A^T u : u >= 0} for polyhedral cone(Y) = {A y >= 0}: one generator
/// polynomial per row of A. Throws Error(Unsupported) for soc/psd blocks.
std::vector<Polynomial> dual_generators_Y(const ConeYDescription& Y);

struct DROProblem {
  std::size_t n = 0, p = 0;
  Polynomial f;
  std::vector<Polynomial> c;  // on n variables
  Polynomial h;               // on n + p variables, x first
  std::vector<Polynomial> g;  // on p variables
  ConeYDescription Y;         // Y.d is the moment degree d
  std::optional<RawY> raw_Y;  // kept when cone(Y) came from homogenize_Y
  std::string name;

  /// Throws Error(Dimension/Degree) when the pieces do not fit together.
  void validate() const;
};

struct Degrees {
  unsigned d = 0, t = 1, d0 = 1, d2 = 0;
};

/// d = Y.d (which must be >= deg_xi h), t, d0 and d2 = ceil(deg g / 2).
Degrees compute_degrees(const DROProblem& problem);

/// H with H [x]_{2t} = coefficients of h in [xi]_d; rows graded_basis(p, d),
/// columns graded_basis(n, 2t).
Eigen::MatrixXd build_H(const DROProblem& problem);

/// h(x)^T as the vector of xi-coefficients at a given x.
Eigen::VectorXd h_at(const DROProblem& problem, const Eigen::VectorXd& x);

/// Largest ceil(deg / 2) over a list (0 for an empty list).
unsigned half_degree(const std::vector<Polynomial>& list);

}  // namespace polydro
