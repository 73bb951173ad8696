#include "polydro/relax.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "polydro/errors.hpp"

namespace polydro {

namespace {

unsigned ceil_half(unsigned v) { return (v + 1) / 2; }

void check_side(std::size_t side, const RelaxOptions& opt) {
  if (side > opt.max_psd_side)
    throw Error(ErrorKind::Dimension,
                "psd block of side " + std::to_string(side) + " exceeds the cap " + std::to_string(opt.max_psd_side));
}

// Unknown tms entries for indices [0, count).
TmsExprs tms_vars(InequalityFormBuilder& ib, std::size_t count) {
  const std::size_t first = ib.add_vars(count);
  TmsExprs out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = AffineExpr::var(first + i);
  return out;
}

// target - sum_j g_j * [v]_{s_j}^T G_j [v]_{s_j} = 0 coefficientwise over
// graded_basis(var_count, 2k), with fresh psd Gram unknowns G_j. `target`
// is indexed by that basis and is consumed.
std::vector<std::size_t> add_qmod_constraints(InequalityFormBuilder& ib, std::vector<AffineExpr> target,
                                              std::size_t var_count, const std::vector<Polynomial>& g, unsigned k,
                                              const RelaxOptions& opt) {
  const GradedBasis full(var_count, 2 * k);
  if (target.size() != full.size()) throw Error(ErrorKind::Dimension, "qmod target has the wrong length");
  std::vector<Polynomial> gens{Polynomial::constant(var_count, 1.0)};
  gens.insert(gens.end(), g.begin(), g.end());
  Exponent sum(var_count);
  for (const Polynomial& gen : gens) {
    const unsigned dg = ceil_half(gen.degree());
    if (dg > k) continue;
    const GradedBasis mono(var_count, k - dg);
    const std::size_t side = mono.size();
    check_side(side, opt);
    const std::size_t first = ib.add_vars(packed_size(side));
    std::vector<AffineExpr> entries(packed_size(side));
    for (std::size_t j = 0; j < side; ++j)
      for (std::size_t i = j; i < side; ++i) {
        const std::size_t var = first + packed_index(side, i, j);
        entries[packed_index(side, i, j)] = AffineExpr::var(var);
        const double factor = i == j ? 1.0 : 2.0;
        for (const auto& [delta, coeff] : gen.terms()) {
          for (std::size_t v = 0; v < var_count; ++v) sum[v] = delta[v] + mono[i][v] + mono[j][v];
          target[full.index_or_throw(sum)].add_term(var, -factor * coeff);
        }
      }
    ib.add_cone(ConeKind::Psd, side, std::move(entries));
  }
  std::vector<std::size_t> ids;
  ids.reserve(target.size());
  for (AffineExpr& e : target) ids.push_back(ib.add_equality(std::move(e)));
  return ids;
}

// Moment matrix and localizing matrices of z at order k.
void add_support_constraints(InequalityFormBuilder& ib, const TmsExprs& z, std::size_t p,
                             const std::vector<Polynomial>& g, unsigned k, const RelaxOptions& opt) {
  const LinearMatrixMap M = moment_map(p, k);
  check_side(M.size, opt);
  add_matrix_constraint(ib, M, z);
  for (const Polynomial& gi : g) {
    if (ceil_half(gi.degree()) > k) continue;
    add_matrix_constraint(ib, localizing_map(gi, k), z);
  }
}

// y in cone(Y) with y given by the first entries of z.
void add_coneY(InequalityFormBuilder& ib, const ConeYDescription& Y, const TmsExprs& z) {
  for (const ConeYBlock& b : Y.blocks) {
    std::vector<AffineExpr> entries(static_cast<std::size_t>(b.map.rows()));
    for (Eigen::Index r = 0; r < b.map.rows(); ++r)
      for (Eigen::Index c = 0; c < b.map.cols(); ++c)
        if (b.map(r, c) != 0.0) {
          AffineExpr t = z[static_cast<std::size_t>(c)];
          t *= b.map(r, c);
          entries[static_cast<std::size_t>(r)] += t;
        }
    ib.add_cone(b.kind, b.dim, std::move(entries));
  }
}

TMS tms_from(const TmsExprs& exprs, const Eigen::VectorXd& u, std::size_t var_count, unsigned degree) {
  std::vector<double> v(exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) v[i] = exprs[i].evaluate(u);
  return TMS(var_count, degree, std::move(v));
}

}  // namespace

std::size_t add_matrix_constraint(InequalityFormBuilder& ib, const LinearMatrixMap& map, const TmsExprs& exprs) {
  std::vector<AffineExpr> entries(map.entries.size());
  for (std::size_t e = 0; e < map.entries.size(); ++e)
    for (const auto& [idx, coeff] : map.entries[e]) {
      if (idx >= exprs.size()) throw Error(ErrorKind::Degree, "matrix constraint reaches beyond the tms");
      AffineExpr t = exprs[idx];
      t *= coeff;
      entries[e] += t;
    }
  return ib.add_cone(ConeKind::Psd, map.size, std::move(entries));
}

InequalitySolution solve_inequality_form(const InequalityFormBuilder& ib, const RelaxOptions& opt,
                                         const std::string& label) {
  const ConicProgram prog = ib.build();
  if (!opt.dump_dir.empty()) {
    std::filesystem::create_directories(opt.dump_dir);
    std::ofstream out(std::filesystem::path(opt.dump_dir) / (label + ".conic"));
    if (!out) throw Error(ErrorKind::Io, "cannot write conic dump for " + label);
    out << "# " << label << "\n";
    write_program(out, prog);
  }
  ConicSolution sol = solve(prog, opt.solver, opt.backend);
  if (sol.status == SolveStatus::Inaccurate) {
    ConicSolution again = solve(prog, opt.solver.tightened(), opt.backend);
    if (again.status != SolveStatus::Failed) sol = std::move(again);
  }
  InequalitySolution out;
  out.status = inequality_form_status(sol.status);
  out.u = std::move(sol.y);
  out.multipliers = std::move(sol.x);
  out.value = sol.dual_objective;
  out.iterations = sol.iterations;
  out.message = sol.message;
  return out;
}

namespace {

// With `bound` set, the objective polynomial becomes trace M_t[w] and
// <f, w> <= *bound is added through a multiplier lambda >= 0 on f.
PairProgram build_pair(const DROProblem& pr, unsigned k, const RelaxOptions& opt, std::optional<double> bound) {
  pr.validate();
  PairProgram pp;
  pp.degrees = compute_degrees(pr);
  pp.k = k;
  const Degrees& dg = pp.degrees;
  if (k < dg.d0 || 2 * k < dg.d) throw Error(ErrorKind::Degree, "relaxation order below d0");
  InequalityFormBuilder& ib = pp.builder;

  pp.gamma = ib.add_vars(1);
  ib.add_objective(pp.gamma, 1.0);
  const std::size_t zlen = basis_size(pr.p, 2 * k);
  const TmsExprs z = tms_vars(ib, zlen);
  pp.z_first = z[0].terms[0].first;

  // f - y^T H [x]_{2t} - gamma in qmod(c)_{2t}
  const Eigen::MatrixXd H = build_H(pr);
  const GradedBasis xb(pr.n, 2 * dg.t);
  std::vector<AffineExpr> target(xb.size());
  std::size_t lambda = 0;
  if (bound) {
    lambda = ib.add_vars(1);
    ib.add_objective(lambda, -*bound);
    ib.add_cone(ConeKind::Nonneg, 1, {AffineExpr::var(lambda)});
  }
  for (std::size_t a = 0; a < xb.size(); ++a) {
    if (bound) {
      const Exponent& e = xb[a];
      target[a].constant = std::all_of(e.begin(), e.end(), [](unsigned v) { return v % 2 == 0; }) ? 1.0 : 0.0;
      const double fa = pr.f.coefficient(e);
      if (fa != 0.0) target[a].add_term(lambda, fa);
    } else {
      target[a].constant = pr.f.coefficient(xb[a]);
    }
    for (Eigen::Index b = 0; b < H.rows(); ++b) {
      const double hv = H(b, static_cast<Eigen::Index>(a));
      if (hv != 0.0) target[a].add_term(pp.z_first + static_cast<std::size_t>(b), -hv);
    }
  }
  target[0].add_term(pp.gamma, -1.0);
  pp.coefficient_constraints = add_qmod_constraints(ib, std::move(target), pr.n, pr.c, dg.t, opt);

  add_coneY(ib, pr.Y, z);
  add_support_constraints(ib, z, pr.p, pr.g, k, opt);
  return pp;
}

}  // namespace

PairProgram build_moment_sos_pair(const DROProblem& pr, unsigned k, const RelaxOptions& opt) {
  return build_pair(pr, k, opt, std::nullopt);
}

RelaxationOutcome solve_moment_sos_pair(const DROProblem& pr, unsigned k, const RelaxOptions& opt) {
  return solve_pair_stage(pr, k, opt, std::nullopt);
}

RelaxationOutcome refine_least_trace(const DROProblem& pr, unsigned k, double f_star, const RelaxOptions& opt) {
  const double bound = f_star + 1e-7 * std::max(1.0, std::abs(f_star));
  RelaxationOutcome out = solve_pair_stage(pr, k, opt, bound);
  if (out.status == SolveStatus::Optimal || out.status == SolveStatus::Inaccurate) {
    // gamma here is the trace objective; report the bound the stage enforced.
    out.gamma = f_star;
    out.gap = out.f_w - f_star;
    const double scale = std::max({1.0, std::abs(f_star), std::abs(out.f_w)});
    out.gap_ok = !out.degenerate_recovery && std::abs(out.gap) <= 1e-6 * scale;
  }
  return out;
}

RelaxationOutcome solve_pair_stage(const DROProblem& pr, unsigned k, const RelaxOptions& opt, std::optional<double> bound) {
  PairProgram pp = build_pair(pr, k, opt, bound);
  const InequalitySolution sol =
      solve_inequality_form(pp.builder, opt, (bound ? "trace_k" : "pair_k") + std::to_string(k));
  RelaxationOutcome out;
  out.k = k;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.message = sol.message;
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Inaccurate) return out;

  const Degrees& dg = pp.degrees;
  out.gamma = sol.u(static_cast<Eigen::Index>(pp.gamma));
  std::vector<double> zv(basis_size(pr.p, 2 * k));
  for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = sol.u(static_cast<Eigen::Index>(pp.z_first + i));
  out.z = TMS(pr.p, 2 * k, std::move(zv));
  out.y = truncate(out.z, dg.d);

  std::vector<double> wv(pp.coefficient_constraints.size());
  for (std::size_t a = 0; a < wv.size(); ++a)
    wv[a] = sol.multipliers(static_cast<Eigen::Index>(pp.builder.block(pp.coefficient_constraints[a]).start));
  out.raw_w0 = wv[0];
  if (std::abs(out.raw_w0) < 1e-9) {
    out.degenerate_recovery = true;
    out.message = "degenerate recovery: w_0 vanishes";
  } else {
    for (double& v : wv) v /= out.raw_w0;
  }
  out.w = TMS(pr.n, 2 * dg.t, std::move(wv));
  out.f_w = riesz(pr.f, out.w);
  out.gap = out.f_w - out.gamma;
  const double scale = std::max({1.0, std::abs(out.gamma), std::abs(out.f_w)});
  out.gap_ok = !out.degenerate_recovery && std::abs(out.gap) <= 1e-6 * scale;
  return out;
}

DirectProgram build_direct_relaxation(const DROProblem& pr, unsigned k, const RelaxOptions& opt) {
  pr.validate();
  const std::vector<Polynomial> gens = dual_generators_Y(pr.Y);
  DirectProgram dp;
  dp.degrees = compute_degrees(pr);
  dp.k = k;
  const Degrees& dg = dp.degrees;
  if (k < dg.d0 || 2 * k < dg.d) throw Error(ErrorKind::Degree, "relaxation order below d0");
  InequalityFormBuilder& ib = dp.builder;

  const GradedBasis xb(pr.n, 2 * dg.t);
  dp.w.resize(xb.size());
  dp.w[0] = AffineExpr(1.0);
  const std::size_t first = ib.add_vars(xb.size() - 1);
  for (std::size_t a = 1; a < xb.size(); ++a) {
    dp.w[a] = AffineExpr::var(first + a - 1);
    ib.add_objective(first + a - 1, -pr.f.coefficient(xb[a]));
  }
  dp.f0 = pr.f.coefficient(xb[0]);

  check_side(basis_size(pr.n, dg.t), opt);
  add_matrix_constraint(ib, moment_map(pr.n, dg.t), dp.w);
  for (const Polynomial& ci : pr.c) add_matrix_constraint(ib, localizing_map(ci, dg.t), dp.w);

  // (H w)^T [xi]_d = p + sum_j u_j a_j with p in qmod(g)_{2k}, deg p <= d
  const Eigen::MatrixXd H = build_H(pr);
  const GradedBasis zb(pr.p, 2 * k);
  std::vector<AffineExpr> target(zb.size());
  for (Eigen::Index b = 0; b < H.rows(); ++b)
    for (Eigen::Index a = 0; a < H.cols(); ++a) {
      const double hv = H(b, a);
      if (hv == 0.0) continue;
      AffineExpr t = dp.w[static_cast<std::size_t>(a)];
      t *= hv;
      target[static_cast<std::size_t>(b)] += t;
    }
  if (!gens.empty()) {
    const std::size_t ufirst = ib.add_vars(gens.size());
    std::vector<AffineExpr> nonneg(gens.size());
    for (std::size_t j = 0; j < gens.size(); ++j) {
      nonneg[j] = AffineExpr::var(ufirst + j);
      for (const auto& [e, cf] : gens[j].terms()) target[zb.index_or_throw(e)].add_term(ufirst + j, -cf);
    }
    ib.add_cone(ConeKind::Nonneg, gens.size(), std::move(nonneg));
  }
  add_qmod_constraints(ib, std::move(target), pr.p, pr.g, k, opt);
  return dp;
}

DirectOutcome solve_direct_relaxation(const DROProblem& pr, unsigned k, const RelaxOptions& opt) {
  DirectProgram dp = build_direct_relaxation(pr, k, opt);
  const InequalitySolution sol = solve_inequality_form(dp.builder, opt, "direct_k" + std::to_string(k));
  DirectOutcome out;
  out.status = sol.status;
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Inaccurate) return out;
  out.w = tms_from(dp.w, sol.u, pr.n, 2 * dp.degrees.t);
  out.value = riesz(pr.f, out.w);
  return out;
}

Polynomial random_sos_objective(std::size_t p, unsigned k1, std::uint64_t seed) {
  const GradedBasis b(p, k1);
  const Eigen::Index m = static_cast<Eigen::Index>(b.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd B(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) B(i, j) = gauss(rng);
  const Eigen::MatrixXd G = B.transpose() * B;
  Polynomial R(p);
  Exponent e(p);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      for (std::size_t v = 0; v < p; ++v)
        e[v] = b[static_cast<std::size_t>(i)][v] + b[static_cast<std::size_t>(j)][v];
      R.add_term(e, G(i, j));
    }
  return R;
}

TkmpProgram build_tkmp(const TMS& y_star, const std::vector<Polynomial>& g, unsigned k1, const Polynomial& R,
                       const RelaxOptions& opt) {
  if (2 * k1 < y_star.degree) throw Error(ErrorKind::Degree, "TKMP order below the moment degree");
  const std::size_t p = y_star.var_count;
  TkmpProgram tp;
  tp.k1 = k1;
  InequalityFormBuilder& ib = tp.builder;
  const GradedBasis zb(p, 2 * k1);
  tp.z.resize(zb.size());
  const std::size_t fixed = y_star.size();
  for (std::size_t i = 0; i < fixed; ++i) tp.z[i] = AffineExpr(y_star[i]);
  if (zb.size() > fixed) {
    const std::size_t first = ib.add_vars(zb.size() - fixed);
    for (std::size_t i = fixed; i < zb.size(); ++i) {
      tp.z[i] = AffineExpr::var(first + i - fixed);
      const double r = R.coefficient(zb[i]);
      if (r != 0.0) ib.add_objective(first + i - fixed, -r);
    }
  }
  add_support_constraints(ib, tp.z, p, g, k1, opt);
  return tp;
}

TkmpOutcome solve_tkmp(const TMS& y_star, const std::vector<Polynomial>& g, unsigned k1, const Polynomial& R,
                       const RelaxOptions& opt) {
  TkmpProgram tp = build_tkmp(y_star, g, k1, R, opt);
  TkmpOutcome out;
  const std::size_t p = y_star.var_count;
  if (tp.builder.num_vars() == 0) {
    // Nothing free: feasibility is a direct psd test.
    const TMS z = tms_from(tp.z, Eigen::VectorXd(), p, 2 * k1);
    double worst = -Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(moment_matrix(z, k1)).eigenvalues()(0);
    for (const Polynomial& gi : g)
      if (ceil_half(gi.degree()) <= k1)
        worst = std::max(worst,
                         -Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(localizing_matrix(gi, z, k1)).eigenvalues()(0));
    out.status = worst <= 1e-9 ? SolveStatus::Optimal : SolveStatus::Infeasible;
    out.z = z;
    out.value = riesz(R, z);
    return out;
  }
  const InequalitySolution sol = solve_inequality_form(tp.builder, opt, "tkmp_k1_" + std::to_string(k1));
  out.status = sol.status;
  if (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::Inaccurate) {
    out.z = tms_from(tp.z, sol.u, p, 2 * k1);
    out.value = riesz(R, out.z);
  }
  return out;
}

const char* to_string(HeuristicResult::Kind kind) {
  switch (kind) {
    case HeuristicResult::Kind::Optimizer: return "optimizer";
    case HeuristicResult::Kind::Infeasible: return "infeasible";
    case HeuristicResult::Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

HeuristicResult solve_heuristic_pop(const DROProblem& pr, const TMS& y_star, const HeuristicOptions& hopt,
                                    const RelaxOptions& opt) {
  pr.validate();
  const Degrees dg = compute_degrees(pr);
  if (y_star.var_count != pr.p || y_star.degree < dg.d) throw Error(ErrorKind::Dimension, "y_star does not fit h");
  // q(x) = h(x)^T y_star
  const std::vector<Polynomial> parts = decompose_in_xi(pr.h, pr.n, pr.p, dg.d);
  Polynomial q(pr.n);
  for (std::size_t b = 0; b < parts.size(); ++b) q += y_star[b] * parts[b];
  std::vector<Polynomial> cons = pr.c;
  cons.push_back(q);

  const unsigned dc = std::max(1u, half_degree(cons));
  const unsigned k_min = std::max({1u, ceil_half(pr.f.degree()), dc});
  const unsigned k_max = hopt.max_order ? std::max(hopt.max_order, k_min) : k_min + 3;
  const double feas_tol = 1e-6;

  HeuristicResult res;
  for (unsigned k = k_min; k <= k_max; ++k) {
    res.order = k;
    const GradedBasis xb(pr.n, 2 * k);
    check_side(basis_size(pr.n, k), opt);
    auto base = [&](InequalityFormBuilder& ib, TmsExprs& w) {
      w.resize(xb.size());
      w[0] = AffineExpr(1.0);
      const std::size_t first = ib.add_vars(xb.size() - 1);
      for (std::size_t a = 1; a < xb.size(); ++a) w[a] = AffineExpr::var(first + a - 1);
      add_matrix_constraint(ib, moment_map(pr.n, k), w);
      for (const Polynomial& ci : cons) add_matrix_constraint(ib, localizing_map(ci, k), w);
    };
    auto f_expr = [&](const TmsExprs& w) {
      AffineExpr e;
      for (const auto& [ex, cf] : pr.f.terms()) {
        AffineExpr t = w[xb.index_or_throw(ex)];
        t *= cf;
        e += t;
      }
      return e;
    };

    // Stage 1: the relaxation value.
    InequalityFormBuilder ib1;
    TmsExprs w1;
    base(ib1, w1);
    {
      const AffineExpr fe = f_expr(w1);
      for (const auto& [v, cf] : fe.terms) ib1.add_objective(v, -cf);
    }
    const InequalitySolution s1 = solve_inequality_form(ib1, opt, "heuristic_k" + std::to_string(k));
    if (s1.status == SolveStatus::Infeasible) {
      res.kind = HeuristicResult::Kind::Infeasible;
      res.note = "moment relaxation of the heuristic problem is infeasible";
      return res;
    }
    if (s1.status != SolveStatus::Optimal && s1.status != SolveStatus::Inaccurate) {
      res.note = std::string("relaxation status ") + to_string(s1.status);
      continue;
    }
    const TMS wa = tms_from(w1, s1.u, pr.n, 2 * k);
    const double fk = riesz(pr.f, wa);
    res.bound = fk;

    // Stage 2: least trace over the near-optimal face.
    InequalityFormBuilder ib2;
    TmsExprs w2;
    base(ib2, w2);
    {
      AffineExpr slack = f_expr(w2);
      slack *= -1.0;
      slack.constant += fk + 1e-7 * std::max(1.0, std::abs(fk));
      ib2.add_cone(ConeKind::Nonneg, 1, {slack});
      const GradedBasis half(pr.n, k);
      for (std::size_t i = 0; i < half.size(); ++i) {
        Exponent e(pr.n);
        for (std::size_t v = 0; v < pr.n; ++v) e[v] = 2 * half[i][v];
        const std::size_t idx = xb.index_or_throw(e);
        if (idx > 0) ib2.add_objective(w2[idx].terms[0].first, -1.0);
      }
    }
    const InequalitySolution s2 = solve_inequality_form(ib2, opt, "heuristic_trace_k" + std::to_string(k));
    const TMS w = (s2.status == SolveStatus::Optimal || s2.status == SolveStatus::Inaccurate)
                      ? tms_from(w2, s2.u, pr.n, 2 * k)
                      : wa;

    const std::optional<FlatTruncation> flat = flat_truncation_check(w, k_min, dc, k, hopt.rank_tol);
    if (!flat) {
      res.note = "no flat truncation at order " + std::to_string(k);
      continue;
    }
    AtomicMeasure atoms;
    try {
      ExtractionOptions eo;
      eo.rank_tol = hopt.rank_tol;
      eo.seed = hopt.seed;
      atoms = extract_atoms(w, flat->d1, dc, flat->rank, eo);
    } catch (const Error& e) {
      res.note = std::string("extraction failed: ") + e.what();
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    res.optimizers.clear();
    for (const Atom& a : atoms.atoms) {
      res.optimizers.push_back(a.point);
      bool ok = true;
      for (const Polynomial& ci : cons)
        if (ci.evaluate(a.point) < -feas_tol * std::max(1.0, std::abs(fk))) ok = false;
      const double fv = pr.f.evaluate(a.point);
      if (ok && fv < best) {
        best = fv;
        res.x = a.point;
      }
    }
    if (res.x.empty()) {
      res.note = "extracted points violate the constraints";
      continue;
    }
    res.kind = HeuristicResult::Kind::Optimizer;
    res.value = best;
    res.note.clear();
    return res;
  }
  res.kind = HeuristicResult::Kind::Inconclusive;
  if (res.note.empty()) res.note = "no flat truncation up to the order cap";
  return res;
}

FeasibilityCheck verify_feasibility(const Eigen::VectorXd& x, const DROProblem& pr, unsigned k,
                                    const RelaxOptions& opt, double tol) {
  pr.validate();
  const Degrees dg = compute_degrees(pr);
  if (k < dg.d0 || 2 * k < dg.d) throw Error(ErrorKind::Degree, "verification order below d0");
  if (static_cast<std::size_t>(x.size()) != pr.n) throw Error(ErrorKind::Dimension, "x has the wrong length");
  FeasibilityCheck fc;
  fc.k = k;
  const Eigen::VectorXd hx = h_at(pr, x);
  const double scale = std::max(1.0, hx.cwiseAbs().maxCoeff());
  if (hx.cwiseAbs().maxCoeff() == 0.0) {
    fc.status = SolveStatus::Optimal;
    return fc;
  }
  InequalityFormBuilder ib;
  const TmsExprs z = tms_vars(ib, basis_size(pr.p, 2 * k));
  for (Eigen::Index i = 0; i < hx.size(); ++i)
    if (hx(i) != 0.0) ib.add_objective(z[static_cast<std::size_t>(i)].terms[0].first, -hx(i));
  add_coneY(ib, pr.Y, z);
  add_support_constraints(ib, z, pr.p, pr.g, k, opt);
  AffineExpr slice(1.0);
  const GradedBasis half(pr.p, k), zb(pr.p, 2 * k);
  for (std::size_t i = 0; i < half.size(); ++i) {
    Exponent e(pr.p);
    for (std::size_t v = 0; v < pr.p; ++v) e[v] = 2 * half[i][v];
    slice.add_term(z[zb.index_or_throw(e)].terms[0].first, -1.0);
  }
  ib.add_cone(ConeKind::Nonneg, 1, {slice});
  const InequalitySolution sol = solve_inequality_form(ib, opt, "verify_k" + std::to_string(k));
  fc.status = sol.status;
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Inaccurate) {
    fc.eta = -std::numeric_limits<double>::infinity();
    fc.normalized = std::numeric_limits<double>::quiet_NaN();
    return fc;
  }
  fc.normalized = -sol.value;
  fc.eta = fc.normalized >= -tol * scale ? 0.0 : -std::numeric_limits<double>::infinity();
  return fc;
}

}  // namespace polydro
