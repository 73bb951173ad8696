// Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
// predictor-corrector. The Newton system is reduced to
//
//   [ A_K W^T W A_K^T   A_f ] [dy ]
//   [ A_f^T             0   ] [dxf]
//
// which is small and dense for the relaxations built in this library.

#include <cmath>
#include <cstdio>
#include <limits>

#include "cone_ops.hpp"
#include "polydro/conic.hpp"
#include "polydro/errors.hpp"

namespace polydro {

namespace {

using detail::Block;
using detail::Scaling;
using Op = Scaling::Op;

constexpr double kSqrt2 = 1.4142135623730951;

struct Direction {
  Eigen::VectorXd x, y, s;
  double tau = 0.0, kappa = 0.0;
};

class Ipm {
 public:
  Ipm(const ConicProgram& p, const SolverOptions& opt) : prog_(p), opt_(opt) {
    p.check();
    blocks_ = detail::make_blocks(p);
    n_ = static_cast<Eigen::Index>(p.num_vars());
    m_ = static_cast<Eigen::Index>(p.num_rows());

    // svec scaling of psd off-diagonals: x_user = D x_internal.
    dscale_ = Eigen::VectorXd::Ones(n_);
    for (const Block& b : blocks_) {
      if (b.kind != ConeKind::Psd) continue;
      Eigen::Index k = b.start;
      for (Eigen::Index j = 0; j < b.side; ++j) {
        ++k;
        for (Eigen::Index i = j + 1; i < b.side; ++i) dscale_(k++) = 1.0 / kSqrt2;
      }
    }
    for (const Block& b : blocks_)
      if (b.kind == ConeKind::Free)
        for (Eigen::Index i = 0; i < b.len; ++i) free_.push_back(b.start + i);
    is_free_ = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i : free_) is_free_(i) = 1.0;

    Eigen::MatrixXd A = Eigen::MatrixXd(p.A) * dscale_.asDiagonal();
    rscale_ = Eigen::VectorXd::Ones(m_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      const double nr = A.row(r).norm();
      if (nr > 0) rscale_(r) = 1.0 / nr;
    }
    A_ = rscale_.asDiagonal() * A;
    b_ = rscale_.cwiseProduct(p.b);
    c_ = dscale_.cwiseProduct(p.c);
    Af_.resize(m_, static_cast<Eigen::Index>(free_.size()));
    for (std::size_t j = 0; j < free_.size(); ++j) Af_.col(static_cast<Eigen::Index>(j)) = A_.col(free_[j]);

    // Rows touching each cone block, for assembling A_K W^T W A_K^T.
    block_rows_.resize(blocks_.size());
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const Block& b = blocks_[bi];
      if (b.kind == ConeKind::Free) continue;
      for (Eigen::Index r = 0; r < m_; ++r)
        if (A_.row(r).segment(b.start, b.len).cwiseAbs().maxCoeff() > 0) block_rows_[bi].push_back(r);
    }
  }

  ConicSolution run() {
    const Eigen::VectorXd e = detail::identity(blocks_, n_);
    x_ = e;
    s_ = e;
    y_ = Eigen::VectorXd::Zero(m_);
    tau_ = kappa_ = 1.0;
    const double nu = static_cast<double>(prog_.barrier_degree());
    const double bnorm = b_.norm(), cnorm = c_.norm();

    ConicSolution out;
    int it = 0;
    double best_res = std::numeric_limits<double>::infinity();
    for (; it <= opt_.max_iter; ++it) {
      const Eigen::VectorXd rp = A_ * x_ - b_ * tau_;
      Eigen::VectorXd rd = A_.transpose() * y_ + s_ - c_ * tau_;
      const double rg = c_.dot(x_) - b_.dot(y_) + kappa_;
      const double mu = (x_.dot(s_) + tau_ * kappa_) / (nu + 1.0);

      const double pres = rp.norm() / tau_ / (1.0 + bnorm);
      const double dres = rd.norm() / tau_ / (1.0 + cnorm);
      const double pobj = c_.dot(x_) / tau_, dobj = b_.dot(y_) / tau_;
      const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
      if (opt_.verbose)
        std::fprintf(stderr, "%3d  pobj %+.8e dobj %+.8e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e\n", it, pobj,
                     dobj, pres, dres, gap, tau_, kappa_);
      const double res_now = std::max({pres, dres, gap});
      if (res_now < best_res) {
        best_res = res_now;
        best_ = {x_, y_, s_, tau_, kappa_};
      } else if (best_res <= opt_.tol_inaccurate && res_now > 1e3 * best_res) {
        // Weakly feasible programs lose tau after getting close; keep the best point.
        out.message = "stalled after reaching " + std::to_string(best_res);
        break;
      }
      if (pres <= opt_.tol_feas && dres <= opt_.tol_feas && gap <= opt_.tol_gap) {
        out.status = SolveStatus::Optimal;
        break;
      }
      const double by = b_.dot(y_);
      if (by > 0 && (A_.transpose() * y_ + s_).norm() <= opt_.tol_infeas * by) {
        out.status = SolveStatus::Infeasible;
        out.message = "primal infeasibility certificate";
        break;
      }
      const double cx = c_.dot(x_);
      if (cx < 0 && (A_ * x_).norm() <= opt_.tol_infeas * -cx) {
        out.status = SolveStatus::Unbounded;
        out.message = "dual infeasibility certificate";
        break;
      }
      if (it == opt_.max_iter) {
        out.message = "iteration limit";
        break;
      }

      if (!scaling_.compute(blocks_, x_, s_)) {
        out.message = "iterate left the cone";
        break;
      }
      if (!factor()) {
        out.message = "singular Newton system";
        break;
      }
      second_rhs();

      const Eigen::VectorXd& lam = scaling_.lambda;
      // predictor
      Direction aff = newton(1.0, rp, rd, rg, detail::jordan(blocks_, lam, lam), tau_ * kappa_);
      double alpha_aff = std::min(1.0, step_length(aff));
      const double sigma = std::pow(std::max(0.0, 1.0 - alpha_aff), 3);
      // corrector
      const Eigen::VectorXd corr =
          detail::jordan(blocks_, scaling_.apply(Op::Wit, aff.x), scaling_.apply(Op::W, aff.s));
      const Eigen::VectorXd ds = detail::jordan(blocks_, lam, lam) + corr - sigma * mu * e;
      const double dk = tau_ * kappa_ + aff.tau * aff.kappa - sigma * mu;
      Direction d = newton(1.0 - sigma, rp, rd, rg, ds, dk);
      const double amax = step_length(d);
      const double alpha = std::min(1.0, opt_.step_fraction * amax);
      if (!(alpha > 1e-12)) {
        out.message = "step length collapsed";
        break;
      }
      x_ += alpha * d.x;
      y_ += alpha * d.y;
      s_ += alpha * d.s;
      tau_ += alpha * d.tau;
      kappa_ += alpha * d.kappa;
    }
    out.iterations = it;
    if (out.status == SolveStatus::Failed && best_res <= opt_.tol_inaccurate) {
      x_ = best_.x;
      y_ = best_.y;
      s_ = best_.s;
      tau_ = best_.tau;
      kappa_ = best_.kappa;
    }

    const Eigen::VectorXd rp = A_ * x_ - b_ * tau_;
    const Eigen::VectorXd rd = A_.transpose() * y_ + s_ - c_ * tau_;
    const double pres = rp.norm() / tau_ / (1.0 + bnorm);
    const double dres = rd.norm() / tau_ / (1.0 + cnorm);
    const double pobj = c_.dot(x_) / tau_, dobj = b_.dot(y_) / tau_;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    if (out.status == SolveStatus::Failed) {
      if (std::max({pres, dres, gap}) <= opt_.tol_inaccurate) {
        out.status = SolveStatus::Inaccurate;
      } else {
        const double by = b_.dot(y_), cx = c_.dot(x_);
        const bool near_infeas = by > 0 && (A_.transpose() * y_ + s_).norm() <= opt_.tol_inaccurate * by;
        const bool near_unbdd = cx < 0 && (A_ * x_).norm() <= opt_.tol_inaccurate * -cx;
        if (near_infeas || near_unbdd) {
          out.status = SolveStatus::Inaccurate;
          out.message += near_infeas ? "; nearly infeasible" : "; nearly unbounded";
        }
      }
    }

    // Back to user scaling. Certificates are reported unnormalized.
    const double scale = (out.status == SolveStatus::Infeasible || out.status == SolveStatus::Unbounded) ? 1.0 : tau_;
    out.x = dscale_.cwiseProduct(x_) / scale;
    out.y = rscale_.cwiseProduct(y_) / scale;
    out.s = s_.cwiseQuotient(dscale_) / scale;
    out.primal_objective = prog_.c.dot(out.x);
    out.dual_objective = prog_.b.dot(out.y);
    if (out.status == SolveStatus::Infeasible) out.primal_objective = std::numeric_limits<double>::infinity();
    if (out.status == SolveStatus::Unbounded) out.primal_objective = -std::numeric_limits<double>::infinity();
    return out;
  }

 private:
  struct Iterate {
    Eigen::VectorXd x, y, s;
    double tau = 1.0, kappa = 1.0;
  };
  Iterate best_;

  double step_length(const Direction& d) const {
    double a = std::min(detail::max_step(blocks_, x_, d.x), detail::max_step(blocks_, s_, d.s));
    if (d.tau < 0) a = std::min(a, -tau_ / d.tau);
    if (d.kappa < 0) a = std::min(a, -kappa_ / d.kappa);
    return a;
  }

  // W^T W applied to the cone part of a full vector.
  Eigen::VectorXd wtw(const Eigen::VectorXd& u) const { return scaling_.apply(Op::Wt, scaling_.apply(Op::W, u)); }

  bool factor() {
    const Eigen::Index nf = static_cast<Eigen::Index>(free_.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m_, m_);
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const Block& b = blocks_[bi];
      const auto& rows = block_rows_[bi];
      if (b.kind == ConeKind::Free || rows.empty()) continue;
      Eigen::MatrixXd B(static_cast<Eigen::Index>(rows.size()), b.len);
      for (std::size_t r = 0; r < rows.size(); ++r)
        B.row(static_cast<Eigen::Index>(r)) =
            scaling_.apply_block(bi, Op::W, A_.row(rows[r]).segment(b.start, b.len).transpose()).transpose();
      const Eigen::MatrixXd BB = B * B.transpose();
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j)
          G(rows[i], rows[j]) += BB(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    K_ = Eigen::MatrixXd::Zero(m_ + nf, m_ + nf);
    K_.topLeftCorner(m_, m_) = G;
    K_.topRightCorner(m_, nf) = Af_;
    K_.bottomLeftCorner(nf, m_) = Af_.transpose();
    const double reg = 1e-13 * std::max(1.0, G.diagonal().cwiseAbs().maxCoeff());
    Eigen::MatrixXd Kr = K_;
    Kr.topLeftCorner(m_, m_).diagonal().array() += reg;
    Kr.bottomRightCorner(nf, nf).diagonal().array() -= reg;
    lu_.compute(Kr);
    return std::isfinite(lu_.matrixLU().cwiseAbs().maxCoeff());
  }

  Eigen::VectorXd kkt_solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd sol = lu_.solve(rhs);
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd res = rhs - K_ * sol;
      if (res.norm() <= 1e-15 * (1.0 + rhs.norm())) break;
      sol += lu_.solve(res);
    }
    return sol;
  }

  void second_rhs() {
    const Eigen::Index nf = static_cast<Eigen::Index>(free_.size());
    const Eigen::VectorXd cK = c_.cwiseProduct(Eigen::VectorXd::Ones(n_) - is_free_);
    Eigen::VectorXd rhs(m_ + nf);
    rhs.head(m_) = b_ + A_ * wtw(cK);
    for (Eigen::Index j = 0; j < nf; ++j) rhs(m_ + j) = c_(free_[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd sol = kkt_solve(rhs);
    dy2_ = sol.head(m_);
    dx2_ = wtw(A_.transpose() * dy2_ - cK);
    for (Eigen::Index j = 0; j < nf; ++j) dx2_(free_[static_cast<std::size_t>(j)]) = sol(m_ + j);
  }

  Direction newton(double eta, const Eigen::VectorXd& rp, const Eigen::VectorXd& rd, double rg,
                   const Eigen::VectorXd& dsvec, double dk) const {
    const Eigen::Index nf = static_cast<Eigen::Index>(free_.size());
    const Eigen::VectorXd dst = scaling_.lambda_div(dsvec);
    const Eigen::VectorXd wt_ds = scaling_.apply(Op::Wt, dst);
    const Eigen::VectorXd rdK = rd.cwiseProduct(Eigen::VectorXd::Ones(n_) - is_free_);

    Eigen::VectorXd rhs(m_ + nf);
    rhs.head(m_) = -eta * rp + A_ * (wt_ds - eta * wtw(rdK));
    for (Eigen::Index j = 0; j < nf; ++j) rhs(m_ + j) = -eta * rd(free_[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd sol = kkt_solve(rhs);
    const Eigen::VectorXd dy1 = sol.head(m_);
    Eigen::VectorXd dx1 = wtw(A_.transpose() * dy1 + eta * rdK) - wt_ds;
    for (Eigen::Index j = 0; j < nf; ++j) dx1(free_[static_cast<std::size_t>(j)]) = sol(m_ + j);

    Direction d;
    const double num = -eta * rg - c_.dot(dx1) + b_.dot(dy1) + dk / tau_;
    const double den = c_.dot(dx2_) - b_.dot(dy2_) - kappa_ / tau_;
    d.tau = num / den;
    d.y = dy1 + d.tau * dy2_;
    d.x = dx1 + d.tau * dx2_;
    d.s = (-eta * rd - A_.transpose() * d.y + c_ * d.tau).cwiseProduct(Eigen::VectorXd::Ones(n_) - is_free_);
    d.kappa = (-dk - kappa_ * d.tau) / tau_;
    return d;
  }

  const ConicProgram& prog_;
  SolverOptions opt_;
  std::vector<Block> blocks_;
  Eigen::Index n_ = 0, m_ = 0;
  Eigen::VectorXd dscale_, rscale_, is_free_;
  std::vector<Eigen::Index> free_;
  std::vector<std::vector<Eigen::Index>> block_rows_;
  Eigen::MatrixXd A_, Af_;
  Eigen::VectorXd b_, c_;

  Eigen::VectorXd x_, y_, s_;
  double tau_ = 1.0, kappa_ = 1.0;
  Scaling scaling_;
  Eigen::MatrixXd K_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd dy2_, dx2_;
};

}  // namespace

ConicSolution solve_ipm(const ConicProgram& p, const SolverOptions& options) {
  if (p.num_vars() == 0) throw Error(ErrorKind::Dimension, "conic program has no variables");
  Ipm ipm(p, options);
  return ipm.run();
}

}  // namespace polydro
