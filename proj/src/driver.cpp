#include "polydro/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "polydro/errors.hpp"

namespace polydro {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Smallest nonzero-rank test with a ratio report for near-threshold cases.
struct RankInfo {
  std::size_t rank = 0;
  bool fragile = false;
};

RankInfo rank_info(const Eigen::MatrixXd& m, double tol) {
  RankInfo ri;
  if (m.size() == 0) return ri;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double scale = std::max(sv(0), 1.0);
  ri.rank = numeric_rank(m, tol);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double ratio = sv(i) / scale;
    if (ratio >= 1e-7 && ratio <= 1e-5) ri.fragile = true;
  }
  return ri;
}

}  // namespace

const char* to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::SosConvexTight: return "sos_convex_tight";
    case CertificateKind::RankOne: return "rank_one";
    case CertificateKind::HeuristicVerified: return "heuristic_verified";
    case CertificateKind::LowerBoundOnly: return "lower_bound_only";
  }
  return "?";
}

bool SosBattery::all_certified() const {
  if (!ran || !f_convex || f_convex->verdict != Verdict::Certified) return false;
  for (const SosReport& r : c_concave)
    if (r.verdict != Verdict::Certified) return false;
  return h_concave && h_concave->verdict == Verdict::Certified;
}

SosBattery run_sos_battery(const DROProblem& pr, const SosOptions& opt, bool short_circuit) {
  SosBattery b;
  b.ran = true;
  b.f_convex = is_sos_convex(pr.f, opt);
  if (short_circuit && b.f_convex->verdict != Verdict::Certified) return b;
  for (const Polynomial& ci : pr.c) {
    b.c_concave.push_back(is_sos_convex(-ci, opt));
    if (short_circuit && b.c_concave.back().verdict != Verdict::Certified) return b;
  }
  b.h_concave = is_robust_sos_concave(pr.h, pr.n, pr.p, pr.g, 0, opt);
  return b;
}

CertificateKind classify_certificate(const Certificate& ev, double heuristic_gap_tol) {
  if (ev.membership && ev.gap_ok && ev.battery.all_certified()) return CertificateKind::SosConvexTight;
  if (ev.membership && ev.gap_ok && ev.rank_w == 1) return CertificateKind::RankOne;
  if (ev.membership && ev.heuristic && ev.heuristic->kind == HeuristicResult::Kind::Optimizer && ev.eta >= 0.0 &&
      std::abs(ev.heuristic->value - ev.heuristic->bound) <= heuristic_gap_tol * std::max(1.0, std::abs(ev.heuristic->bound)))
    return CertificateKind::HeuristicVerified;
  return CertificateKind::LowerBoundOnly;
}

DROResult run(const DROProblem& pr, const DriverOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  pr.validate();
  DROResult res;
  const Degrees dg = compute_degrees(pr);
  res.degrees = dg;
  const unsigned max_order = opt.max_order ? opt.max_order : dg.d0 + 3;
  const unsigned max_k1 = opt.max_k1 ? opt.max_k1 : dg.d0 + 4;
  Certificate& cert = res.certificate;
  res.diagnostics.push_back("assumed: the dual cone of the robust constraint splits as P_d(S) + Y*");

  if (opt.sos_battery && !opt.initial_order_only) {
    SosOptions so;
    so.solver = opt.relax.solver;
    so.backend = opt.relax.backend;
    try {
      cert.battery = run_sos_battery(pr, so);
    } catch (const Error& e) {
      res.diagnostics.push_back(std::string("sos battery failed: ") + e.what());
    }
  }

  unsigned k = dg.d0;
  unsigned k1 = (dg.d + 2) / 2;  // ceil((d + 1) / 2)
  RelaxationOutcome out;
  bool done = false;
  for (; k <= max_order && !done; ++k) {
    out = solve_moment_sos_pair(pr, k, opt.relax);
    TraceEntry te{k, 0, "pair", to_string(out.status), out.gamma, 0, out.message};
    const bool solved = out.status == SolveStatus::Optimal || out.status == SolveStatus::Inaccurate;
    if (!solved) {
      res.trace.push_back(te);
      if (out.status == SolveStatus::Failed) {
        res.solver_failure = true;
        res.diagnostics.push_back("pair solve failed at k = " + std::to_string(k) + ": " + out.message);
      } else if (out.status == SolveStatus::Unbounded) {
        res.diagnostics.push_back("the moment relaxation is infeasible at k = " + std::to_string(k) +
                                  ", so the DRO problem is infeasible");
        res.lower_bound = std::numeric_limits<double>::infinity();
      } else {
        res.diagnostics.push_back("the SOS side is infeasible at k = " + std::to_string(k));
      }
      res.k = k;
      break;
    }
    const RankInfo rw = rank_info(moment_matrix(out.w, dg.t), opt.rank_tol);
    te.rank = rw.rank;
    res.trace.push_back(te);
    cert.rank_w = rw.rank;
    cert.fragile_rank = rw.fragile;
    cert.gap_ok = out.gap_ok;
    res.k = k;
    if (opt.initial_order_only) break;

    // rank M_{d1}[z*] = 1 gives a Dirac representing measure directly.
    cert.rank_one_z = false;
    for (unsigned d1 = dg.d0; d1 <= k; ++d1) {
      const RankInfo rz = rank_info(moment_matrix(out.z, d1), opt.rank_tol);
      cert.fragile_rank = cert.fragile_rank || rz.fragile;
      if (rz.rank == 1) {
        cert.rank_one_z = true;
        res.trace.push_back({k, 0, "rank_one", "found", out.gamma, 1, "d1 = " + std::to_string(d1)});
        break;
      }
    }
    if (cert.rank_one_z) {
      cert.membership = true;
      cert.double_rank_one = rw.rank == 1;
      const double mass = out.z[0];
      std::vector<double> pt(pr.p);
      for (std::size_t i = 0; i < pr.p; ++i) pt[i] = out.z[1 + i] / mass;
      res.worst_case = AtomicMeasure{{Atom{mass, pt}}};
      done = true;
      break;
    }

    // Truncated moment problem with flat-truncation checks.
    bool next_k = false;
    for (; k1 <= max_k1; ++k1) {
      const Polynomial R = random_sos_objective(pr.p, k1, opt.seed + k1);
      TkmpOutcome tk;
      try {
        tk = solve_tkmp(out.y, pr.g, k1, R, opt.relax);
      } catch (const Error& e) {
        res.trace.push_back({k, k1, "tkmp", "error", out.gamma, 0, e.what()});
        res.diagnostics.push_back(std::string("TKMP not built: ") + e.what());
        break;
      }
      TraceEntry tt{k, k1, "tkmp", to_string(tk.status), out.gamma, 0, ""};
      if (tk.status == SolveStatus::Infeasible) {
        tt.note = "y* has no extension at this order; raising k";
        res.trace.push_back(tt);
        next_k = true;
        break;
      }
      if (tk.status != SolveStatus::Optimal && tk.status != SolveStatus::Inaccurate) {
        if (tk.status == SolveStatus::Failed) res.solver_failure = true;
        tt.note = "TKMP not solved";
        res.trace.push_back(tt);
        continue;
      }
      const std::optional<FlatTruncation> flat = flat_truncation_check(tk.z, dg.d0, dg.d2, k1, opt.rank_tol);
      if (!flat) {
        tt.note = "no flat truncation";
        res.trace.push_back(tt);
        continue;
      }
      tt.rank = flat->rank;
      tt.note = "flat at d1 = " + std::to_string(flat->d1);
      res.trace.push_back(tt);
      cert.flat = flat;
      cert.membership = true;
      res.k1 = k1;
      try {
        ExtractionOptions eo;
        eo.rank_tol = opt.rank_tol;
        eo.seed = opt.seed;
        res.worst_case = extract_atoms(tk.z, flat->d1, std::max(1u, dg.d2), flat->rank, eo);
      } catch (const Error& e) {
        res.diagnostics.push_back(std::string("atom extraction failed: ") + e.what());
      }
      done = true;
      break;
    }
    if (done) break;
    if (!next_k) {
      res.diagnostics.push_back("k1 cap reached without a flat truncation");
      break;
    }
  }
  if (k > max_order && !done && !opt.initial_order_only) res.diagnostics.push_back("relaxation order cap reached");

  const bool solved = out.status == SolveStatus::Optimal || out.status == SolveStatus::Inaccurate;
  if (solved) {
    res.w = out.w;
    res.y = out.y;
    res.z = out.z;
    res.x = project_pi(out.w);
    res.lower_bound = out.gamma;
    res.value = pr.f.evaluate(res.x);
    if (!out.gap_ok)
      res.diagnostics.push_back("duality gap check failed: <f,w*> - gamma = " + fmt(out.gap));
    if (cert.fragile_rank) res.diagnostics.push_back("fragile rank decision (singular value ratio near tolerance)");
  }
  if (!cert.membership && solved && !opt.initial_order_only)
    res.diagnostics.push_back("membership of y* not established; the value is only the relaxation value");

  cert.kind = classify_certificate(cert);
  if (cert.kind == CertificateKind::SosConvexTight && cert.rank_w != 1) {
    // Every optimal w projects to a minimizer here; prefer the least-trace one.
    try {
      const RelaxationOutcome ref = refine_least_trace(pr, res.k, out.gamma, opt.relax);
      const bool ok = (ref.status == SolveStatus::Optimal || ref.status == SolveStatus::Inaccurate) && ref.gap_ok;
      const RankInfo rr = ok ? rank_info(moment_matrix(ref.w, dg.t), opt.rank_tol) : RankInfo{};
      res.trace.push_back({res.k, 0, "least_trace", to_string(ref.status), ref.f_w, rr.rank, ""});
      if (ok) {
        res.w = ref.w;
        res.x = project_pi(ref.w);
        res.value = pr.f.evaluate(res.x);
        cert.rank_w = rr.rank;
      }
    } catch (const Error& e) {
      res.diagnostics.push_back(std::string("least-trace refinement failed: ") + e.what());
    }
  }
  if (cert.kind == CertificateKind::LowerBoundOnly && cert.membership && opt.heuristic && solved) {
    HeuristicOptions ho;
    ho.rank_tol = opt.rank_tol;
    ho.seed = opt.seed;
    try {
      cert.heuristic = solve_heuristic_pop(pr, out.y, ho, opt.relax);
      const HeuristicResult& hr = *cert.heuristic;
      res.trace.push_back({res.k, 0, "heuristic", to_string(hr.kind), hr.bound, 0, hr.note});
      if (hr.kind == HeuristicResult::Kind::Optimizer) {
        const Eigen::VectorXd xh = Eigen::Map<const Eigen::VectorXd>(hr.x.data(), static_cast<Eigen::Index>(hr.x.size()));
        const FeasibilityCheck fc = verify_feasibility(xh, pr, res.k, opt.relax);
        cert.eta = fc.eta;
        res.trace.push_back({res.k, 0, "verify", to_string(fc.status), fc.normalized, 0, "eta = " + fmt(fc.eta)});
        // f(x_hat) must match the bound f* from the DRO relaxation.
        HeuristicResult compare = hr;
        compare.bound = res.lower_bound;
        Certificate probe = cert;
        probe.heuristic = compare;
        if (classify_certificate(probe) == CertificateKind::HeuristicVerified) {
          cert.kind = CertificateKind::HeuristicVerified;
          res.x = hr.x;
          res.value = hr.value;
        }
      }
    } catch (const Error& e) {
      res.diagnostics.push_back(std::string("heuristic failed: ") + e.what());
      if (e.kind() == ErrorKind::Solver) res.solver_failure = true;
    }
  } else if (cert.kind != CertificateKind::LowerBoundOnly) {
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(res.x.data(), static_cast<Eigen::Index>(res.x.size()));
    try {
      const FeasibilityCheck fc = verify_feasibility(xv, pr, res.k, opt.relax, 1e-6);
      cert.eta = fc.eta;
      res.trace.push_back({res.k, 0, "verify", to_string(fc.status), fc.normalized, 0, "eta = " + fmt(fc.eta)});
      if (fc.eta < 0.0) res.diagnostics.push_back("feasibility verification of x* reported a negative value");
    } catch (const Error& e) {
      res.diagnostics.push_back(std::string("verification failed: ") + e.what());
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace polydro
