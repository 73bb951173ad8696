#pragma once

// The moment-SOS loop: solve the pair at order k, certify that y* admits a
// representing measure (rank-one z* or a flat truncated moment problem),
// then classify what can be claimed about x* = pi(w*).

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polydro/dro.hpp"
#include "polydro/moments.hpp"
#include "polydro/relax.hpp"
#include "polydro/sos.hpp"

namespace polydro {

enum class CertificateKind { SosConvexTight, RankOne, HeuristicVerified, LowerBoundOnly };

const char* to_string(CertificateKind kind);

struct SosBattery {
  bool ran = false;
  std::optional<SosReport> f_convex;
  std::vector<SosReport> c_concave;  // one per -c_i
  std::optional<SosReport> h_concave;

  bool all_certified() const;
};

struct Certificate {
  CertificateKind kind = CertificateKind::LowerBoundOnly;
  SosBattery battery;
  std::size_t rank_w = 0;            // rank M_t[w*]
  bool rank_one_z = false;           // rank M_{d1}[z*] = 1 for some d1 in [d0, k]
  bool double_rank_one = false;       // both rank-one checks passed, TKMP skipped
  bool membership = false;           // y* shown to have a representing measure on S
  std::optional<FlatTruncation> flat;
  bool gap_ok = false;
  bool fragile_rank = false;
  double eta = std::numeric_limits<double>::quiet_NaN();
  std::optional<HeuristicResult> heuristic;
};

struct TraceEntry {
  unsigned k = 0;
  unsigned k1 = 0;    // 0 for steps that do not involve the truncated moment problem
  std::string step;   // pair, rank_one, tkmp, flat, heuristic, verify
  std::string status;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  std::size_t rank = 0;
  std::string note;
};

struct DriverOptions {
  unsigned max_order = 0;  // 0: d0 + 3
  unsigned max_k1 = 0;     // 0: d0 + 4
  double rank_tol = 1e-6;
  std::uint64_t seed = 0;
  RelaxOptions relax;
  bool sos_battery = true;
  bool heuristic = true;
  /// Stop after the pair at the initial order and report pi(w*).
  bool initial_order_only = false;
};

struct DROResult {
  std::vector<double> x;
  double lower_bound = std::numeric_limits<double>::quiet_NaN();  // f*
  double value = std::numeric_limits<double>::quiet_NaN();        // f(x)
  Certificate certificate;
  std::optional<AtomicMeasure> worst_case;
  TMS w, y, z;
  unsigned k = 0, k1 = 0;
  Degrees degrees;
  std::vector<TraceEntry> trace;
  std::vector<std::string> diagnostics;
  bool solver_failure = false;
  double seconds = 0.0;
};

/// f SOS-convex, each -c_i SOS-convex, h robustly SOS-concave on S. By
/// default stops at the first test that is not certified.
SosBattery run_sos_battery(const DROProblem& problem, const SosOptions& opt = {}, bool short_circuit = true);

/// Picks the strongest applicable certificate kind from collected evidence
/// (sos_convex_tight > rank_one > heuristic_verified > lower_bound_only).
CertificateKind classify_certificate(const Certificate& evidence, double heuristic_gap_tol = 1e-5);

DROResult run(const DROProblem& problem, const DriverOptions& options = {});

}  // namespace polydro
