#pragma once

// Truncated moment sequences (tms), the Riesz pairing, moment and localizing
// matrices, flat truncation and atom extraction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polydro/polynomial.hpp"

namespace polydro {

/// Dense vector indexed by graded_basis(var_count, degree).
struct TMS {
  std::size_t var_count = 1;
  unsigned degree = 0;
  std::vector<double> values;

  TMS() = default;
  TMS(std::size_t var_count, unsigned degree, std::vector<double> values);
  static TMS zeros(std::size_t var_count, unsigned degree);

  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

struct Atom {
  double weight = 0.0;
  std::vector<double> point;
};

/// theta_1 delta_{u_1} + ... + theta_r delta_{u_r}
struct AtomicMeasure {
  std::vector<Atom> atoms;

  std::size_t dimension() const { return atoms.empty() ? 0 : atoms.front().point.size(); }
  TMS moments(std::size_t var_count, unsigned degree) const;
};

/// Moments of the point mass weight * delta_point.
TMS point_moments(std::span<const double> point, unsigned degree, double weight = 1.0);

/// <f, w> = sum_alpha f_alpha w_alpha.
double riesz(const Polynomial& f, const TMS& w);

/// Index of (i, j) in packed column-major lower-triangular storage of an
/// m x m symmetric matrix. Requires i >= j.
std::size_t packed_index(std::size_t m, std::size_t i, std::size_t j);
std::size_t packed_size(std::size_t m);

/// Symmetric matrix whose packed entries are sparse linear forms in a tms.
struct LinearMatrixMap {
  std::size_t size = 0;                                        // matrix side
  std::vector<std::vector<std::pair<std::size_t, double>>> entries;  // packed, each a list of (tms index, coeff)

  Eigen::MatrixXd evaluate(std::span<const double> tms) const;
};

/// Linear map w -> L_g^{(k)}[w] for a tms over graded_basis(var_count, 2k).
/// The matrix side is C(n + s, s) with s = k - ceil(deg(g) / 2).
LinearMatrixMap localizing_map(const Polynomial& g, unsigned k);
LinearMatrixMap moment_map(std::size_t var_count, unsigned k);

Eigen::MatrixXd moment_matrix(const TMS& w, unsigned k);
Eigen::MatrixXd localizing_matrix(const Polynomial& g, const TMS& w, unsigned k);

TMS truncate(const TMS& z, unsigned d);

/// (w_{e_1}, ..., w_{e_n}).
std::vector<double> project_pi(const TMS& w);

/// Number of singular values above tol * max(sigma_1, 1).
std::size_t numeric_rank(const Eigen::MatrixXd& m, double tol);

struct FlatTruncation {
  unsigned d1 = 0;
  std::size_t rank = 0;
};

/// Smallest d1 in [d0, k1] with rank M_{d1}[z] = rank M_{d1 - d2}[z].
/// d2 is clamped to at least 1. z.degree must be at least 2 * k1.
std::optional<FlatTruncation> flat_truncation_check(const TMS& z, unsigned d0, unsigned d2, unsigned k1,
                                                    double rank_tol = 1e-6);

struct ExtractionOptions {
  double rank_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Weights in (-negative_tol, negative_tol] are dropped, smaller ones reject.
  double negative_tol = 1e-8;
  /// Smallest accepted reciprocal condition number of the basis block.
  double min_conditioning = 1e-10;
};

/// Recovers an r-atomic representing measure from a flat truncation at d1.
/// The basis monomials are chosen among degrees <= d1 - d2.
/// Throws Error(ErrorKind::Extraction) when the multiplication operators are
/// ill-conditioned or not simultaneously diagonalizable over the reals.
AtomicMeasure extract_atoms(const TMS& z, unsigned d1, unsigned d2, std::size_t r,
                            const ExtractionOptions& options = {});

}  // namespace polydro
