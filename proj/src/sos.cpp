#include "polydro/sos.hpp"

#include <algorithm>
#include <cmath>

#include "polydro/errors.hpp"
#include "polydro/moments.hpp"

namespace polydro {

PolyExpr to_expr(const Polynomial& p) {
  PolyExpr e;
  for (const auto& [ex, c] : p.terms()) e[ex].constant = c;
  return e;
}

Polynomial evaluate_expr(const PolyExpr& e, std::size_t var_count, const Eigen::VectorXd& x) {
  Polynomial p(var_count);
  for (const auto& [ex, a] : e) p.add_term(ex, a.evaluate(x));
  return p;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::Refuted: return "refuted";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

std::size_t QmodEncoding::row(std::size_t i, std::size_t j, std::size_t monomial) const {
  if (i < j) std::swap(i, j);
  return first_row + packed_index(side, i, j) * monomials + monomial;
}

static unsigned half_ceil(unsigned v) { return (v + 1) / 2; }

QmodEncoding encode_matrix_qmod(ProgramBuilder& pb, const std::vector<PolyExpr>& target, std::size_t side,
                                std::size_t var_count, const std::vector<Polynomial>& g, unsigned k) {
  if (target.size() != packed_size(side)) throw Error(ErrorKind::Dimension, "target matrix has the wrong size");
  QmodEncoding enc;
  enc.side = side;
  enc.var_count = var_count;
  enc.k = k;
  enc.generators.push_back(Polynomial::constant(var_count, 1.0));
  for (const Polynomial& gi : g) {
    if (gi.var_count() != var_count) throw Error(ErrorKind::Dimension, "generator variable count mismatch");
    enc.generators.push_back(gi);
  }
  const GradedBasis full(var_count, 2 * k);
  enc.monomials = full.size();
  enc.first_row = pb.num_rows();
  for (std::size_t r = 0; r < packed_size(side) * enc.monomials; ++r) pb.add_row(0.0);

  for (std::size_t idx = 0; idx < target.size(); ++idx) {
    for (const auto& [ex, a] : target[idx]) {
      if (ex.size() != var_count) throw Error(ErrorKind::Dimension, "target variable count mismatch");
      const auto pos = full.index_of(ex);
      if (!pos) throw Error(ErrorKind::Degree, "target degree exceeds the truncation order");
      const std::size_t row = enc.first_row + idx * enc.monomials + *pos;
      pb.add_rhs(row, a.constant);
      for (const auto& [v, c] : a.terms) pb.add_coeff(row, v, -c);
    }
  }

  for (std::size_t gi = 0; gi < enc.generators.size(); ++gi) {
    const Polynomial& gen = enc.generators[gi];
    const unsigned dg = half_ceil(gen.degree());
    if (dg > k) continue;
    const unsigned s = k - dg;
    const GradedBasis mono(var_count, s);
    const std::size_t nm = mono.size();
    GramBlock blk;
    blk.generator = gi;
    blk.side = side * nm;
    blk.half_degree = s;
    blk.start = pb.add_psd(blk.side);
    enc.grams.push_back(blk);

    // Entry (P, Q) of X with P = (a, beta), Q = (b, gamma) feeds T(a, b) at
    // monomials gen * x^(beta + gamma). Ordered pairs with a <= b cover every
    // matrix entry once; within a diagonal block both orders are visited.
    Exponent sum(var_count);
    for (std::size_t P = 0; P < blk.side; ++P) {
      const std::size_t a = P / nm, beta = P % nm;
      for (std::size_t Q = 0; Q < blk.side; ++Q) {
        const std::size_t b = Q / nm, gamma = Q % nm;
        if (a > b) continue;
        const std::size_t var = psd_var(blk.start, blk.side, P, Q);
        for (const auto& [delta, coeff] : gen.terms()) {
          for (std::size_t v = 0; v < var_count; ++v) sum[v] = delta[v] + mono[beta][v] + mono[gamma][v];
          pb.add_coeff(enc.row(b, a, full.index_or_throw(sum)), var, coeff);
        }
      }
    }
  }
  return enc;
}

QmodEncoding encode_qmod_membership(ProgramBuilder& pb, const PolyExpr& target, std::size_t var_count,
                                    const std::vector<Polynomial>& g, unsigned k) {
  return encode_matrix_qmod(pb, {target}, 1, var_count, g, k);
}

QmodEncoding encode_sos(ProgramBuilder& pb, const PolyExpr& target, std::size_t var_count, unsigned k) {
  return encode_matrix_qmod(pb, {target}, 1, var_count, {}, k);
}

void add_gram_trace_cost(ProgramBuilder& pb, const QmodEncoding& enc, double weight) {
  for (const GramBlock& blk : enc.grams)
    for (std::size_t i = 0; i < blk.side; ++i) pb.add_cost(psd_var(blk.start, blk.side, i, i), weight);
}

std::vector<Eigen::MatrixXd> gram_matrices(const QmodEncoding& enc, const Eigen::VectorXd& x) {
  std::vector<Eigen::MatrixXd> out;
  for (const GramBlock& blk : enc.grams) out.push_back(psd_block_matrix({ConeKind::Psd, blk.start, blk.side}, x));
  return out;
}

std::vector<Polynomial> reassemble(const QmodEncoding& enc, const Eigen::VectorXd& x) {
  std::vector<Polynomial> out(packed_size(enc.side), Polynomial(enc.var_count));
  for (const GramBlock& blk : enc.grams) {
    const GradedBasis mono(enc.var_count, blk.half_degree);
    const std::size_t nm = mono.size();
    const Eigen::MatrixXd X = psd_block_matrix({ConeKind::Psd, blk.start, blk.side}, x);
    std::vector<Polynomial> part(packed_size(enc.side), Polynomial(enc.var_count));
    for (std::size_t P = 0; P < blk.side; ++P)
      for (std::size_t Q = 0; Q < blk.side; ++Q) {
        const std::size_t a = P / nm, b = Q / nm;
        if (a > b) continue;
        Exponent e(enc.var_count);
        for (std::size_t v = 0; v < enc.var_count; ++v) e[v] = mono[P % nm][v] + mono[Q % nm][v];
        part[packed_index(enc.side, b, a)].add_term(e, X(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(Q)));
      }
    for (std::size_t i = 0; i < part.size(); ++i) out[i] += enc.generators[blk.generator] * part[i];
  }
  return out;
}

namespace {

ConicSolution solve_with_retry(const ConicProgram& prog, const SosOptions& opt) {
  ConicSolution sol = solve(prog, opt.solver, opt.backend);
  if (sol.status == SolveStatus::Inaccurate) sol = solve(prog, opt.solver.tightened(), opt.backend);
  return sol;
}

// Solves a constant-target encoding and fills a report.
SosReport finish(ProgramBuilder& pb, const QmodEncoding& enc, const std::vector<Polynomial>& target,
                 const SosOptions& opt, bool refutable) {
  add_gram_trace_cost(pb, enc);
  const ConicProgram prog = pb.build();
  const ConicSolution sol = solve_with_retry(prog, opt);
  SosReport rep;
  rep.status = sol.status;
  rep.order = 2 * enc.k;
  switch (sol.status) {
    case SolveStatus::Failed:
      throw Error(ErrorKind::Solver, "conic solver failed: " + sol.message);
    case SolveStatus::Infeasible:
      rep.verdict = refutable ? Verdict::Refuted : Verdict::Unknown;
      rep.note = "no representation at this order";
      return rep;
    case SolveStatus::Unbounded:
      rep.note = "unexpected unbounded status";
      return rep;
    case SolveStatus::Optimal:
    case SolveStatus::Inaccurate: break;
  }
  const std::vector<Polynomial> got = reassemble(enc, sol.x);
  double res = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) res = std::max(res, got[i].distance(target[i]));
  rep.residual = res;
  rep.grams = gram_matrices(enc, sol.x);
  double min_eig = 0.0;
  for (const Eigen::MatrixXd& G : rep.grams) {
    if (G.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues()(0));
  }
  // relative to the target's largest coefficient, so rescaling does not flip the verdict
  double scale = 1.0;
  for (const Polynomial& t : target)
    for (const auto& [e, v] : t.terms()) scale = std::max(scale, std::abs(v));
  const double tol = opt.reassembly_tol * scale;
  if (res <= tol && min_eig >= -tol) {
    rep.verdict = Verdict::Certified;
  } else {
    rep.note = "Gram reassembly residual too large";
  }
  return rep;
}

}  // namespace

SosReport check_sos(const Polynomial& target, unsigned k, const SosOptions& opt) {
  return check_qmod_membership(target, {}, k, opt);
}

SosReport check_qmod_membership(const Polynomial& target, const std::vector<Polynomial>& g, unsigned k,
                                const SosOptions& opt) {
  ProgramBuilder pb;
  const QmodEncoding enc = encode_qmod_membership(pb, to_expr(target), target.var_count(), g, k);
  return finish(pb, enc, {target}, opt, true);
}

SosReport is_sos_convex(const Polynomial& psi, const SosOptions& opt) {
  const unsigned deg = psi.degree();
  SosReport rep;
  if (deg <= 1) {
    rep.verdict = Verdict::Certified;
    rep.status = SolveStatus::Optimal;
    rep.note = "affine";
    return rep;
  }
  if (deg % 2 == 1) {
    rep.verdict = Verdict::Refuted;
    rep.status = SolveStatus::Optimal;
    rep.note = "odd degree";
    return rep;
  }
  const std::size_t n = psi.var_count();
  const PolyMatrix H = hessian(psi, {0, n});
  std::vector<PolyExpr> target;
  std::vector<Polynomial> plain;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) {
      target.push_back(to_expr(H(i, j)));
      plain.push_back(H(i, j));
    }
  ProgramBuilder pb;
  const QmodEncoding enc = encode_matrix_qmod(pb, target, n, n, {}, deg / 2 - 1);
  return finish(pb, enc, plain, opt, true);
}

SosReport is_robust_sos_concave(const Polynomial& h, std::size_t n, std::size_t p, const std::vector<Polynomial>& g,
                                unsigned k_prime, const SosOptions& opt) {
  if (h.var_count() != n + p) throw Error(ErrorKind::Dimension, "h must live on n + p variables");
  const std::size_t V = n + p;
  const PolyMatrix H = -hessian(h, {0, n});
  std::vector<PolyExpr> target;
  std::vector<Polynomial> plain;
  unsigned hdeg = 0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) {
      target.push_back(to_expr(H(i, j)));
      plain.push_back(H(i, j));
      hdeg = std::max(hdeg, H(i, j).degree());
    }
  std::vector<Polynomial> gv;
  for (const Polynomial& gi : g) {
    if (gi.var_count() != p) throw Error(ErrorKind::Dimension, "support generators must live on p variables");
    gv.push_back(gi.embed(V, n));
  }
  bool all_zero = std::all_of(plain.begin(), plain.end(), [](const Polynomial& q) { return q.is_zero(); });
  if (all_zero) {
    SosReport rep;
    rep.verdict = Verdict::Certified;
    rep.status = SolveStatus::Optimal;
    rep.note = "h is affine in x";
    return rep;
  }
  const bool raise = k_prime == 0;
  if (k_prime == 0) k_prime = std::max(1u, half_ceil(h.degree()));
  // The Hessian has degree <= deg h - 2, so order 2(k' - 1) always fits it.
  unsigned k = std::max(k_prime - 1, half_ceil(hdeg));
  SosReport rep;
  for (int attempt = 0; attempt < (raise ? 2 : 1); ++attempt, ++k) {
    ProgramBuilder pb;
    const QmodEncoding enc = encode_matrix_qmod(pb, target, n, V, gv, k);
    rep = finish(pb, enc, plain, opt, false);
    if (rep.verdict == Verdict::Certified) return rep;
  }
  return rep;
}

}  // namespace polydro
