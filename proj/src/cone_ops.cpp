#include "cone_ops.hpp"

#include <cmath>
#include <limits>

namespace polydro::detail {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInf = std::numeric_limits<double>::infinity();

double jdot(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

Eigen::VectorXd jmul(const Eigen::Ref<const Eigen::VectorXd>& u) {
  Eigen::VectorXd r = -u;
  r(0) = u(0);
  return r;
}

}  // namespace

std::vector<Block> make_blocks(const ConicProgram& p) {
  std::vector<Block> out;
  for (const ConeBlock& b : p.blocks)
    out.push_back(Block{b.kind, static_cast<Eigen::Index>(b.start), static_cast<Eigen::Index>(b.length()),
                        static_cast<Eigen::Index>(b.dim)});
  return out;
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Index side) {
  Eigen::MatrixXd m(side, side);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < side; ++j) {
    m(j, j) = u(k++);
    for (Eigen::Index i = j + 1; i < side; ++i) {
      m(i, j) = u(k++) / kSqrt2;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

void svec(const Eigen::MatrixXd& m, Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index side = m.rows();
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < side; ++j) {
    out(k++) = m(j, j);
    for (Eigen::Index i = j + 1; i < side; ++i) out(k++) = 0.5 * (m(i, j) + m(j, i)) * kSqrt2;
  }
}

bool Scaling::compute(const std::vector<Block>& blks, const Eigen::VectorXd& x, const Eigen::VectorXd& s) {
  blocks = blks;
  parts.assign(blocks.size(), Part{});
  lambda = Eigen::VectorXd::Zero(x.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block& blk = blocks[b];
    Part& part = parts[b];
    auto xs = x.segment(blk.start, blk.len);
    auto ss = s.segment(blk.start, blk.len);
    switch (blk.kind) {
      case ConeKind::Free: break;
      case ConeKind::Nonneg: {
        if ((xs.array() <= 0).any() || (ss.array() <= 0).any()) return false;
        part.w = (xs.array() / ss.array()).sqrt();
        lambda.segment(blk.start, blk.len) = (xs.array() * ss.array()).sqrt().matrix();
        break;
      }
      case ConeKind::SecondOrder: {
        const double xj = jdot(xs, xs), sj = jdot(ss, ss);
        if (xj <= 0 || sj <= 0 || xs(0) <= 0 || ss(0) <= 0) return false;
        const double xn = std::sqrt(xj), sn = std::sqrt(sj);
        const Eigen::VectorXd xb = xs / xn, sb = ss / sn;
        const double gamma = std::sqrt((1.0 + xb.dot(sb)) / 2.0);
        Eigen::VectorXd wb = (xb + jmul(sb)) / (2.0 * gamma);
        part.v = wb;
        part.v(0) += 1.0;
        part.v /= std::sqrt(2.0 * (wb(0) + 1.0));
        part.beta = std::sqrt(xn / sn);
        lambda.segment(blk.start, blk.len) = apply_block(b, Op::W, ss);
        break;
      }
      case ConeKind::Psd: {
        const Eigen::MatrixXd X = smat(xs, blk.side), S = smat(ss, blk.side);
        Eigen::LLT<Eigen::MatrixXd> lx(X), ls(S);
        if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
        const Eigen::MatrixXd Lx = lx.matrixL(), Ls = ls.matrixL();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::VectorXd sv = svd.singularValues();
        if (sv.minCoeff() <= 0) return false;
        part.lam = sv;
        part.R = Lx * svd.matrixV() * sv.cwiseSqrt().cwiseInverse().asDiagonal();
        // R^{-1} = Lambda^{1/2} V^T Lx^{-1}
        part.Rinv = sv.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() *
                    Lx.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(blk.side, blk.side));
        svec(Eigen::MatrixXd(sv.asDiagonal()), lambda.segment(blk.start, blk.len));
        break;
      }
    }
  }
  return true;
}

Eigen::VectorXd Scaling::apply_block(std::size_t b, Op op, const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const Block& blk = blocks[b];
  const Part& part = parts[b];
  switch (blk.kind) {
    case ConeKind::Free: return u;
    case ConeKind::Nonneg:
      return (op == Op::W || op == Op::Wt) ? Eigen::VectorXd(part.w * u.array())
                                           : Eigen::VectorXd(u.array() / part.w);
    case ConeKind::SecondOrder: {
      if (op == Op::W || op == Op::Wt) return part.beta * (2.0 * part.v * part.v.dot(u) - jmul(u));
      const Eigen::VectorXd ju = jmul(u);
      return jmul(2.0 * part.v * part.v.dot(ju) - u) / part.beta;
    }
    case ConeKind::Psd: {
      const Eigen::MatrixXd U = smat(u, blk.side);
      Eigen::MatrixXd r;
      switch (op) {
        case Op::W: r = part.R.transpose() * U * part.R; break;
        case Op::Wt: r = part.R * U * part.R.transpose(); break;
        case Op::Winv: r = part.Rinv.transpose() * U * part.Rinv; break;
        case Op::Wit: r = part.Rinv * U * part.Rinv.transpose(); break;
      }
      Eigen::VectorXd out(blk.len);
      svec(r, out);
      return out;
    }
  }
  return u;
}

Eigen::VectorXd Scaling::apply(Op op, const Eigen::VectorXd& u) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block& blk = blocks[b];
    if (blk.kind == ConeKind::Free) continue;
    out.segment(blk.start, blk.len) = apply_block(b, op, u.segment(blk.start, blk.len));
  }
  return out;
}

namespace {

// Coefficients of the symmetric product with a diagonal Lambda in svec layout.
Eigen::VectorXd lam_pair(const Eigen::VectorXd& lam) {
  const Eigen::Index m = lam.size();
  Eigen::VectorXd out(m * (m + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = j; i < m; ++i) out(k++) = 0.5 * (lam(i) + lam(j));
  return out;
}

}  // namespace

Eigen::VectorXd Scaling::lambda_prod(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block& blk = blocks[b];
    auto l = lambda.segment(blk.start, blk.len);
    auto uu = u.segment(blk.start, blk.len);
    auto o = out.segment(blk.start, blk.len);
    switch (blk.kind) {
      case ConeKind::Free: break;
      case ConeKind::Nonneg: o = (l.array() * uu.array()).matrix(); break;
      case ConeKind::SecondOrder:
        o(0) = l.dot(uu);
        o.tail(blk.len - 1) = l(0) * uu.tail(blk.len - 1) + uu(0) * l.tail(blk.len - 1);
        break;
      case ConeKind::Psd: o = (lam_pair(parts[b].lam).array() * uu.array()).matrix(); break;
    }
  }
  return out;
}

Eigen::VectorXd Scaling::lambda_div(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block& blk = blocks[b];
    auto l = lambda.segment(blk.start, blk.len);
    auto uu = u.segment(blk.start, blk.len);
    auto o = out.segment(blk.start, blk.len);
    switch (blk.kind) {
      case ConeKind::Free: break;
      case ConeKind::Nonneg: o = (uu.array() / l.array()).matrix(); break;
      case ConeKind::SecondOrder: {
        const double l0 = l(0);
        const auto l1 = l.tail(blk.len - 1);
        const double q0 = (l0 * uu(0) - l1.dot(uu.tail(blk.len - 1))) / (l0 * l0 - l1.squaredNorm());
        o(0) = q0;
        o.tail(blk.len - 1) = (uu.tail(blk.len - 1) - q0 * l1) / l0;
        break;
      }
      case ConeKind::Psd: o = (uu.array() / lam_pair(parts[b].lam).array()).matrix(); break;
    }
  }
  return out;
}

Eigen::VectorXd jordan(const std::vector<Block>& blocks, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (const Block& blk : blocks) {
    auto uu = u.segment(blk.start, blk.len);
    auto vv = v.segment(blk.start, blk.len);
    auto o = out.segment(blk.start, blk.len);
    switch (blk.kind) {
      case ConeKind::Free: break;
      case ConeKind::Nonneg: o = (uu.array() * vv.array()).matrix(); break;
      case ConeKind::SecondOrder:
        o(0) = uu.dot(vv);
        o.tail(blk.len - 1) = uu(0) * vv.tail(blk.len - 1) + vv(0) * uu.tail(blk.len - 1);
        break;
      case ConeKind::Psd: {
        const Eigen::MatrixXd U = smat(uu, blk.side), V = smat(vv, blk.side);
        svec(0.5 * (U * V + V * U), o);
        break;
      }
    }
  }
  return out;
}

Eigen::VectorXd identity(const std::vector<Block>& blocks, Eigen::Index n) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (const Block& blk : blocks) {
    switch (blk.kind) {
      case ConeKind::Free: break;
      case ConeKind::Nonneg: e.segment(blk.start, blk.len).setOnes(); break;
      case ConeKind::SecondOrder: e(blk.start) = 1.0; break;
      case ConeKind::Psd: {
        Eigen::Index k = blk.start;
        for (Eigen::Index j = 0; j < blk.side; ++j) {
          e(k) = 1.0;
          k += blk.side - j;
        }
        break;
      }
    }
  }
  return e;
}

double max_step(const std::vector<Block>& blocks, const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double alpha = kInf;
  for (const Block& blk : blocks) {
    auto xs = x.segment(blk.start, blk.len);
    auto ds = dx.segment(blk.start, blk.len);
    switch (blk.kind) {
      case ConeKind::Free: break;
      case ConeKind::Nonneg:
        for (Eigen::Index i = 0; i < blk.len; ++i)
          if (ds(i) < 0) alpha = std::min(alpha, -xs(i) / ds(i));
        break;
      case ConeKind::SecondOrder: {
        const double xn = std::sqrt(std::max(jdot(xs, xs), 1e-300));
        const Eigen::VectorXd xb = xs / xn, db = ds / xn;
        const double rho0 = jdot(xb, db);
        const Eigen::VectorXd rho1 =
            db.tail(blk.len - 1) - ((rho0 + db(0)) / (xb(0) + 1.0)) * xb.tail(blk.len - 1);
        const double denom = rho1.norm() - rho0;
        if (denom > 0) alpha = std::min(alpha, 1.0 / denom);
        break;
      }
      case ConeKind::Psd: {
        const Eigen::MatrixXd X = smat(xs, blk.side), D = smat(ds, blk.side);
        Eigen::LLT<Eigen::MatrixXd> llt(X);
        if (llt.info() != Eigen::Success) return 0.0;
        const Eigen::MatrixXd L = llt.matrixL();
        Eigen::MatrixXd T = L.triangularView<Eigen::Lower>().solve(D);
        T = L.triangularView<Eigen::Lower>().solve(T.transpose()).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues()(0);
        if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
        break;
      }
    }
  }
  return alpha;
}

}  // namespace polydro::detail
