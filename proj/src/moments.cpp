#include "polydro/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "polydro/errors.hpp"

namespace polydro {

TMS::TMS(std::size_t var_count_, unsigned degree_, std::vector<double> values_)
    : var_count(var_count_), degree(degree_), values(std::move(values_)) {
  if (values.size() != basis_size(var_count, degree))
    throw Error(ErrorKind::Dimension, "tms length " + std::to_string(values.size()) + " does not match C(" +
                                          std::to_string(var_count + degree) + ", " + std::to_string(degree) + ")");
}

TMS TMS::zeros(std::size_t var_count, unsigned degree) {
  return TMS(var_count, degree, std::vector<double>(basis_size(var_count, degree), 0.0));
}

TMS point_moments(std::span<const double> point, unsigned degree, double weight) {
  const GradedBasis basis(point.size(), degree);
  std::vector<double> v = basis.evaluate(point);
  for (double& x : v) x *= weight;
  return TMS(point.size(), degree, std::move(v));
}

TMS AtomicMeasure::moments(std::size_t var_count, unsigned degree) const {
  TMS out = TMS::zeros(var_count, degree);
  const GradedBasis basis(var_count, degree);
  for (const Atom& a : atoms) {
    if (a.point.size() != var_count) throw Error(ErrorKind::Dimension, "atom dimension mismatch");
    const std::vector<double> v = basis.evaluate(a.point);
    for (std::size_t i = 0; i < v.size(); ++i) out.values[i] += a.weight * v[i];
  }
  return out;
}

double riesz(const Polynomial& f, const TMS& w) {
  if (f.var_count() != w.var_count) throw Error(ErrorKind::Dimension, "riesz: variable count mismatch");
  if (f.degree() > w.degree) throw Error(ErrorKind::Degree, "riesz: polynomial degree exceeds tms degree");
  const GradedBasis basis(w.var_count, w.degree);
  double s = 0.0;
  for (const auto& [e, c] : f.terms()) s += c * w.values[basis.index_or_throw(e)];
  return s;
}

std::size_t packed_size(std::size_t m) { return m * (m + 1) / 2; }

std::size_t packed_index(std::size_t m, std::size_t i, std::size_t j) {
  // column j starts after columns 0..j-1 of lengths m, m-1, ...
  return j * m - j * (j - 1) / 2 + (i - j);
}

Eigen::MatrixXd LinearMatrixMap::evaluate(std::span<const double> tms) const {
  Eigen::MatrixXd m(size, size);
  for (std::size_t j = 0; j < size; ++j) {
    for (std::size_t i = j; i < size; ++i) {
      double v = 0.0;
      for (const auto& [idx, c] : entries[packed_index(size, i, j)]) {
        if (idx >= tms.size()) throw Error(ErrorKind::Degree, "tms too short for matrix map");
        v += c * tms[idx];
      }
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

static unsigned half_ceil(unsigned v) { return (v + 1) / 2; }

LinearMatrixMap localizing_map(const Polynomial& g, unsigned k) {
  const std::size_t n = g.var_count();
  const unsigned dg = half_ceil(g.degree());
  if (dg > k) throw Error(ErrorKind::Degree, "localizing order too small for generator degree");
  const unsigned s = k - dg;
  const GradedBasis row_basis(n, s);
  const GradedBasis full(n, 2 * k);

  LinearMatrixMap map;
  map.size = row_basis.size();
  map.entries.resize(packed_size(map.size));
  Exponent sum(n);
  for (std::size_t j = 0; j < map.size; ++j) {
    for (std::size_t i = j; i < map.size; ++i) {
      auto& entry = map.entries[packed_index(map.size, i, j)];
      for (const auto& [gamma, coeff] : g.terms()) {
        for (std::size_t v = 0; v < n; ++v) sum[v] = gamma[v] + row_basis[i][v] + row_basis[j][v];
        entry.emplace_back(full.index_or_throw(sum), coeff);
      }
      std::sort(entry.begin(), entry.end());
    }
  }
  return map;
}

LinearMatrixMap moment_map(std::size_t var_count, unsigned k) {
  return localizing_map(Polynomial::constant(var_count, 1.0), k);
}

Eigen::MatrixXd moment_matrix(const TMS& w, unsigned k) {
  if (2 * k > w.degree) throw Error(ErrorKind::Degree, "moment_matrix: 2k exceeds tms degree");
  return moment_map(w.var_count, k).evaluate(w.values);
}

Eigen::MatrixXd localizing_matrix(const Polynomial& g, const TMS& w, unsigned k) {
  if (g.var_count() != w.var_count) throw Error(ErrorKind::Dimension, "localizing_matrix: variable count mismatch");
  if (2 * k > w.degree) throw Error(ErrorKind::Degree, "localizing_matrix: 2k exceeds tms degree");
  return localizing_map(g, k).evaluate(w.values);
}

TMS truncate(const TMS& z, unsigned d) {
  if (d > z.degree) throw Error(ErrorKind::Degree, "truncate: degree exceeds tms degree");
  const std::size_t len = basis_size(z.var_count, d);
  return TMS(z.var_count, d, std::vector<double>(z.values.begin(), z.values.begin() + static_cast<long>(len)));
}

std::vector<double> project_pi(const TMS& w) {
  if (w.degree < 1) throw Error(ErrorKind::Degree, "project_pi needs a tms of degree >= 1");
  return {w.values.begin() + 1, w.values.begin() + 1 + static_cast<long>(w.var_count)};
}

std::size_t numeric_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double cut = tol * std::max(sv(0), 1.0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

std::optional<FlatTruncation> flat_truncation_check(const TMS& z, unsigned d0, unsigned d2, unsigned k1,
                                                    double rank_tol) {
  if (2 * k1 > z.degree) throw Error(ErrorKind::Degree, "flat_truncation_check: z degree below 2*k1");
  d2 = std::max(d2, 1u);
  const GradedBasis basis(z.var_count, k1);
  const Eigen::MatrixXd full = moment_matrix(z, k1);
  for (unsigned d1 = std::max(d0, d2); d1 <= k1; ++d1) {
    const auto hi = static_cast<Eigen::Index>(basis_size(z.var_count, d1));
    const auto lo = static_cast<Eigen::Index>(basis_size(z.var_count, d1 - d2));
    const std::size_t r_hi = numeric_rank(full.topLeftCorner(hi, hi), rank_tol);
    const std::size_t r_lo = numeric_rank(full.topLeftCorner(lo, lo), rank_tol);
    if (r_hi == r_lo) return FlatTruncation{d1, r_hi};
  }
  return std::nullopt;
}

AtomicMeasure extract_atoms(const TMS& z, unsigned d1, unsigned d2, std::size_t r, const ExtractionOptions& options) {
  const std::size_t n = z.var_count;
  d2 = std::max(d2, 1u);
  if (2 * d1 > z.degree) throw Error(ErrorKind::Degree, "extract_atoms: z degree below 2*d1");
  if (d2 > d1) throw Error(ErrorKind::Degree, "extract_atoms: d2 exceeds d1");
  if (r == 0) throw Error(ErrorKind::Extraction, "extract_atoms: rank zero, no atoms");

  const GradedBasis basis(n, d1);
  const Eigen::MatrixXd m = moment_matrix(z, d1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::Extraction, "eigendecomposition failed");
  const auto N = static_cast<Eigen::Index>(basis.size());
  const auto R = static_cast<Eigen::Index>(r);
  if (R > N) throw Error(ErrorKind::Extraction, "rank exceeds moment matrix size");

  // m ~ V V^T with V from the r leading eigenpairs (eigenvalues ascend).
  Eigen::MatrixXd V(N, R);
  for (Eigen::Index c = 0; c < R; ++c) {
    const double lam = eig.eigenvalues()(N - 1 - c);
    if (lam <= 0.0) throw Error(ErrorKind::Extraction, "moment matrix has fewer positive eigenvalues than the rank");
    V.col(c) = eig.eigenvectors().col(N - 1 - c) * std::sqrt(lam);
  }

  // Basis monomials are picked among degrees <= d1 - d2 so their shifts by
  // one variable stay inside the rows of V.
  const auto low = static_cast<Eigen::Index>(basis_size(n, d1 - d2));
  if (low < R) throw Error(ErrorKind::Extraction, "not enough low-degree monomials for the rank");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V.topRows(low).transpose());
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(R));
  for (Eigen::Index c = 0; c < R; ++c) rows[static_cast<std::size_t>(c)] = qr.colsPermutation().indices()(c);
  std::sort(rows.begin(), rows.end());

  Eigen::MatrixXd VB(R, R);
  for (Eigen::Index c = 0; c < R; ++c) VB.row(c) = V.row(rows[static_cast<std::size_t>(c)]);
  Eigen::JacobiSVD<Eigen::MatrixXd> vb_svd(VB);
  const auto& sv = vb_svd.singularValues();
  if (sv(R - 1) <= options.min_conditioning * sv(0))
    throw Error(ErrorKind::Extraction, "basis block of the moment matrix is ill-conditioned");
  // W maps values on the basis monomials to values on all monomials of degree <= d1.
  const Eigen::MatrixXd W = VB.transpose().partialPivLu().solve(V.transpose()).transpose();

  std::vector<Eigen::MatrixXd> mult(n, Eigen::MatrixXd(R, R));
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < R; ++c) {
      Exponent e = basis[static_cast<std::size_t>(rows[static_cast<std::size_t>(c)])];
      e[i] += 1;
      mult[i].row(c) = W.row(static_cast<Eigen::Index>(basis.index_or_throw(e)));
    }
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> lambda(n);
  for (double& l : lambda) l = unif(rng) + 0.05;
  const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  Eigen::MatrixXd comb = Eigen::MatrixXd::Zero(R, R);
  for (std::size_t i = 0; i < n; ++i) comb += (lambda[i] / total) * mult[i];

  Eigen::RealSchur<Eigen::MatrixXd> schur(comb);
  if (schur.info() != Eigen::Success) throw Error(ErrorKind::Extraction, "Schur decomposition failed");
  const Eigen::MatrixXd& T = schur.matrixT();
  const double tscale = std::max(1.0, T.cwiseAbs().maxCoeff());
  for (Eigen::Index c = 0; c + 1 < R; ++c)
    if (std::abs(T(c + 1, c)) > 1e-8 * tscale)
      throw Error(ErrorKind::Extraction, "multiplication operators have complex eigenvalues");
  const Eigen::MatrixXd& Q = schur.matrixU();

  std::vector<std::vector<double>> points(static_cast<std::size_t>(R), std::vector<double>(n));
  for (Eigen::Index c = 0; c < R; ++c)
    for (std::size_t i = 0; i < n; ++i)
      points[static_cast<std::size_t>(c)][i] = Q.col(c).dot(mult[i] * Q.col(c));
  std::sort(points.begin(), points.end());

  // Weights by least squares against the moments up to degree 2*d1.
  const TMS target = truncate(z, 2 * d1);
  const GradedBasis full(n, 2 * d1);
  Eigen::MatrixXd A(static_cast<Eigen::Index>(full.size()), R);
  for (Eigen::Index c = 0; c < R; ++c) {
    const std::vector<double> v = full.evaluate(points[static_cast<std::size_t>(c)]);
    A.col(c) = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(target.values.data(),
                                                                static_cast<Eigen::Index>(target.values.size()));
  const Eigen::VectorXd theta = A.colPivHouseholderQr().solve(rhs);

  AtomicMeasure mu;
  for (Eigen::Index c = 0; c < R; ++c) {
    const double wgt = theta(c);
    if (wgt < -options.negative_tol) throw Error(ErrorKind::Extraction, "extracted a negative weight");
    if (wgt <= options.negative_tol) continue;
    mu.atoms.push_back(Atom{wgt, points[static_cast<std::size_t>(c)]});
  }
  if (mu.atoms.empty()) throw Error(ErrorKind::Extraction, "all extracted weights vanish");
  return mu;
}

}  // namespace polydro
