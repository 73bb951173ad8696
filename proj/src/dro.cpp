#include "polydro/dro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polydro/errors.hpp"
#include "polydro/moments.hpp"

namespace polydro {

namespace {

double block_violation(ConeKind kind, std::size_t dim, const Eigen::VectorXd& v) {
  switch (kind) {
    case ConeKind::Free: return 0.0;
    case ConeKind::Nonneg: return v.size() ? -v.minCoeff() : 0.0;
    case ConeKind::SecondOrder: return v.tail(v.size() - 1).norm() - v(0);
    case ConeKind::Psd: {
      const Eigen::MatrixXd M = psd_block_matrix({ConeKind::Psd, 0, dim}, v);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
      return -es.eigenvalues()(0);
    }
  }
  return 0.0;
}

unsigned ceil_half(unsigned v) { return (v + 1) / 2; }

}  // namespace

std::size_t ConeYDescription::size() const { return basis_size(p, d); }

void ConeYDescription::check() const {
  for (const ConeYBlock& b : blocks) {
    const ConeBlock probe{b.kind, 0, b.dim};
    if (b.kind == ConeKind::Free) throw Error(ErrorKind::Dimension, "cone(Y) blocks must be nonneg, soc or psd");
    if (static_cast<std::size_t>(b.map.rows()) != probe.length() || static_cast<std::size_t>(b.map.cols()) != size())
      throw Error(ErrorKind::Dimension, "cone(Y) block map has the wrong shape");
    if (b.kind == ConeKind::SecondOrder && b.dim < 1) throw Error(ErrorKind::Dimension, "empty second-order block");
  }
}

double ConeYDescription::violation(const Eigen::VectorXd& y) const {
  if (static_cast<std::size_t>(y.size()) != size()) throw Error(ErrorKind::Dimension, "moment vector has the wrong length");
  double worst = -std::numeric_limits<double>::infinity();
  for (const ConeYBlock& b : blocks) worst = std::max(worst, block_violation(b.kind, b.dim, b.map * y));
  return blocks.empty() ? 0.0 : worst;
}

bool ConeYDescription::polyhedral() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const ConeYBlock& b) { return b.kind == ConeKind::Nonneg; });
}

Eigen::RowVectorXd functional_row(const Polynomial& q, unsigned d) {
  const std::vector<double> c = q.coefficients(GradedBasis(q.var_count(), d));
  return Eigen::Map<const Eigen::RowVectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
}

Polynomial row_polynomial(const Eigen::RowVectorXd& row, std::size_t p, unsigned d) {
  const GradedBasis b(p, d);
  if (static_cast<std::size_t>(row.size()) != b.size()) throw Error(ErrorKind::Dimension, "row length mismatch");
  return Polynomial::from_coefficients(b, std::span<const double>(row.data(), b.size()));
}

double RawY::violation(const Eigen::VectorXd& y) const {
  const Eigen::Index m = static_cast<Eigen::Index>(basis_size(p, d));
  if (y.size() != m) throw Error(ErrorKind::Dimension, "moment vector has the wrong length");
  double worst = std::abs(y(0) - 1.0);
  for (const Linear& l : linear) {
    const double v = l.a.dot(y) - l.rhs;
    switch (l.sense) {
      case Sense::Ge: worst = std::max(worst, -v); break;
      case Sense::Le: worst = std::max(worst, v); break;
      case Sense::Eq: worst = std::max(worst, std::abs(v)); break;
    }
  }
  for (const Box& b : boxes) {
    worst = std::max(worst, (b.lower - y).maxCoeff());
    worst = std::max(worst, (y - b.upper).maxCoeff());
  }
  for (const Norm& nb : norms) worst = std::max(worst, (nb.B * y + nb.offset).norm() - nb.bound);
  for (const PsdBound& pb : psd_bounds) {
    const Eigen::MatrixXd M = psd_block_matrix({ConeKind::Psd, 0, pb.side}, pb.map * y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues()(es.eigenvalues().size() - 1) - pb.bound);
  }
  return worst;
}

ConeYDescription homogenize_Y(const RawY& raw) {
  ConeYDescription Y;
  Y.p = raw.p;
  Y.d = raw.d;
  Y.provenance = ConeYDescription::Provenance::AutoHomogenized;
  const Eigen::Index m = static_cast<Eigen::Index>(basis_size(raw.p, raw.d));
  const Eigen::RowVectorXd e0 = Eigen::RowVectorXd::Unit(m, 0);

  std::vector<Eigen::RowVectorXd> rows;
  auto push = [&](const Eigen::RowVectorXd& r) {
    if (r.size() != m) throw Error(ErrorKind::Dimension, "raw moment constraint has the wrong length");
    if (r.cwiseAbs().maxCoeff() > 0) rows.push_back(r);
  };
  push(e0);
  for (const RawY::Linear& l : raw.linear) {
    const Eigen::RowVectorXd r = l.a - l.rhs * e0;
    switch (l.sense) {
      case RawY::Sense::Ge: push(r); break;
      case RawY::Sense::Le: push(-r); break;
      case RawY::Sense::Eq:
        push(r);  // the normalization y_0 = 1 maps to the zero row and vanishes
        push(-r);
        break;
    }
  }
  for (const RawY::Box& b : raw.boxes) {
    if (b.lower.size() != m || b.upper.size() != m) throw Error(ErrorKind::Dimension, "box bounds have the wrong length");
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::isfinite(b.lower(i))) push(Eigen::RowVectorXd::Unit(m, i) - b.lower(i) * e0);
      if (std::isfinite(b.upper(i))) push(b.upper(i) * e0 - Eigen::RowVectorXd::Unit(m, i));
    }
  }
  if (!rows.empty()) {
    ConeYBlock blk{ConeKind::Nonneg, rows.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), m)};
    for (std::size_t i = 0; i < rows.size(); ++i) blk.map.row(static_cast<Eigen::Index>(i)) = rows[i];
    Y.blocks.push_back(std::move(blk));
  }
  for (const RawY::Norm& nb : raw.norms) {
    if (nb.B.cols() != m || nb.offset.size() != nb.B.rows())
      throw Error(ErrorKind::Dimension, "norm bound has the wrong shape");
    ConeYBlock blk{ConeKind::SecondOrder, static_cast<std::size_t>(nb.B.rows()) + 1,
                   Eigen::MatrixXd(nb.B.rows() + 1, m)};
    blk.map.row(0) = nb.bound * e0;
    blk.map.bottomRows(nb.B.rows()) = nb.B + nb.offset * e0;
    Y.blocks.push_back(std::move(blk));
  }
  for (const RawY::PsdBound& pb : raw.psd_bounds) {
    if (static_cast<std::size_t>(pb.map.rows()) != packed_size(pb.side) || pb.map.cols() != m)
      throw Error(ErrorKind::Dimension, "psd bound has the wrong shape");
    ConeYBlock blk{ConeKind::Psd, pb.side, -pb.map};
    for (std::size_t j = 0; j < pb.side; ++j)
      blk.map.row(static_cast<Eigen::Index>(packed_index(pb.side, j, j))) += pb.bound * e0;
    Y.blocks.push_back(std::move(blk));
  }
  Y.check();
  return Y;
}

std::vector<Polynomial> dual_generators_Y(const ConeYDescription& Y) {
  if (!Y.polyhedral()) throw Error(ErrorKind::Unsupported, "dual generators need a polyhedral cone(Y)");
  std::vector<Polynomial> out;
  for (const ConeYBlock& b : Y.blocks)
    for (Eigen::Index i = 0; i < b.map.rows(); ++i) out.push_back(row_polynomial(b.map.row(i), Y.p, Y.d));
  return out;
}

unsigned half_degree(const std::vector<Polynomial>& list) {
  unsigned m = 0;
  for (const Polynomial& q : list) m = std::max(m, ceil_half(q.degree()));
  return m;
}

void DROProblem::validate() const {
  if (n == 0) throw Error(ErrorKind::Dimension, "the decision vector must be nonempty");
  if (p == 0) throw Error(ErrorKind::Dimension, "the random vector must be nonempty");
  if (f.var_count() != n) throw Error(ErrorKind::Dimension, "f must live on n variables");
  for (const Polynomial& ci : c)
    if (ci.var_count() != n) throw Error(ErrorKind::Dimension, "constraints c must live on n variables");
  if (h.var_count() != n + p) throw Error(ErrorKind::Dimension, "h must live on n + p variables");
  for (const Polynomial& gi : g)
    if (gi.var_count() != p) throw Error(ErrorKind::Dimension, "support generators g must live on p variables");
  if (Y.p != p) throw Error(ErrorKind::Dimension, "cone(Y) is over the wrong number of variables");
  if (h.degree_in({n, p}) > Y.d) throw Error(ErrorKind::Degree, "moment degree d is below the xi-degree of h");
  Y.check();
}

Degrees compute_degrees(const DROProblem& pr) {
  Degrees dg;
  dg.d = pr.Y.d;
  dg.t = std::max({1u, ceil_half(pr.h.degree_in({0, pr.n})), ceil_half(pr.f.degree()), half_degree(pr.c)});
  dg.d2 = half_degree(pr.g);
  dg.d0 = std::max(ceil_half(dg.d), dg.d2);
  return dg;
}

Eigen::MatrixXd build_H(const DROProblem& pr) {
  const Degrees dg = compute_degrees(pr);
  const std::vector<Polynomial> parts = decompose_in_xi(pr.h, pr.n, pr.p, dg.d);
  const GradedBasis cols(pr.n, 2 * dg.t);
  Eigen::MatrixXd H(static_cast<Eigen::Index>(parts.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < parts.size(); ++r) {
    const std::vector<double> c = parts[r].coefficients(cols);
    for (std::size_t j = 0; j < c.size(); ++j) H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = c[j];
  }
  return H;
}

Eigen::VectorXd h_at(const DROProblem& pr, const Eigen::VectorXd& x) {
  const Degrees dg = compute_degrees(pr);
  const std::vector<Polynomial> parts = decompose_in_xi(pr.h, pr.n, pr.p, dg.d);
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t r = 0; r < parts.size(); ++r)
    v(static_cast<Eigen::Index>(r)) = parts[r].evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  return v;
}

}  // namespace polydro
