#include "polydro/polydro.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "polydro/driver.hpp"
#include "polydro/errors.hpp"
#include "polydro/portfolio.hpp"
#include "polydro/problem_io.hpp"

using namespace polydro;

struct polydro_problem {
  ProblemFile file;
};

struct polydro_result {
  DROResult result;
  DROProblem problem;
};

namespace {

thread_local std::string last_error;
thread_local int last_line = 0;
thread_local int last_column = 0;

polydro_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return POLYDRO_ERR_PARSE;
    case ErrorKind::Semantic: return POLYDRO_ERR_SEMANTIC;
    case ErrorKind::Dimension: return POLYDRO_ERR_DIMENSION;
    case ErrorKind::Degree: return POLYDRO_ERR_DEGREE;
    case ErrorKind::Unsupported: return POLYDRO_ERR_UNSUPPORTED;
    case ErrorKind::Extraction: return POLYDRO_ERR_EXTRACTION;
    case ErrorKind::Solver: return POLYDRO_ERR_SOLVER;
    case ErrorKind::Io: return POLYDRO_ERR_IO;
  }
  return POLYDRO_ERR_INTERNAL;
}

polydro_status set_error(polydro_status st, const std::string& msg) {
  last_error = msg;
  return st;
}

// Runs body and turns exceptions into status codes.
template <class F>
polydro_status guarded(F&& body) {
  last_error.clear();
  last_line = last_column = 0;
  try {
    body();
    return POLYDRO_OK;
  } catch (const ParseError& e) {
    last_line = e.line();
    last_column = e.column();
    return set_error(POLYDRO_ERR_PARSE, e.what());
  } catch (const Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(POLYDRO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(POLYDRO_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

DriverOptions driver_options(const ProblemFile& file, const polydro_options* opt) {
  DriverOptions d;
  apply_overrides(file.options, d);
  if (!opt) return d;
  if (opt->max_order) d.max_order = opt->max_order;
  if (opt->max_k1) d.max_k1 = opt->max_k1;
  if (opt->tol_rank > 0) d.rank_tol = opt->tol_rank;
  if (opt->has_seed) d.seed = opt->seed;
  if (opt->solver && *opt->solver) d.relax.backend = opt->solver;
  if (opt->dump_dir && *opt->dump_dir) d.relax.dump_dir = opt->dump_dir;
  d.initial_order_only = opt->initial_order_only != 0;
  d.sos_battery = opt->skip_sos_battery == 0;
  d.heuristic = opt->skip_heuristic == 0;
  return d;
}

}  // namespace

extern "C" {

const char* polydro_version(void) { return "0.1.0"; }

const char* polydro_last_error(void) { return last_error.c_str(); }

int polydro_last_error_line(void) { return last_line; }
int polydro_last_error_column(void) { return last_column; }

const char* polydro_status_name(polydro_status status) {
  switch (status) {
    case POLYDRO_OK: return "ok";
    case POLYDRO_ERR_PARSE: return "parse";
    case POLYDRO_ERR_SEMANTIC: return "semantic";
    case POLYDRO_ERR_DIMENSION: return "dimension";
    case POLYDRO_ERR_DEGREE: return "degree";
    case POLYDRO_ERR_UNSUPPORTED: return "unsupported";
    case POLYDRO_ERR_EXTRACTION: return "extraction";
    case POLYDRO_ERR_SOLVER: return "solver";
    case POLYDRO_ERR_IO: return "io";
    case POLYDRO_ERR_ARGUMENT: return "argument";
    case POLYDRO_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void polydro_string_free(char* s) { std::free(s); }

void polydro_options_default(polydro_options* opt) {
  if (opt) *opt = polydro_options{};
}

polydro_status polydro_problem_parse(const char* json_text, polydro_problem** out) {
  if (!json_text || !out) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new polydro_problem{parse_problem(json_text)}; });
}

polydro_status polydro_problem_load(const char* path, polydro_problem** out) {
  if (!path || !out) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new polydro_problem{load_problem(path)}; });
}

void polydro_problem_free(polydro_problem* problem) { delete problem; }

polydro_status polydro_problem_serialize(const polydro_problem* problem, char** out) {
  if (!problem || !out) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = dup(serialize_problem(problem->file)); });
}

size_t polydro_problem_n(const polydro_problem* problem) { return problem ? problem->file.problem.n : 0; }
size_t polydro_problem_p(const polydro_problem* problem) { return problem ? problem->file.problem.p : 0; }

polydro_status polydro_solve(const polydro_problem* problem, const polydro_options* opt, polydro_result** out) {
  if (!problem || !out) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const DriverOptions d = driver_options(problem->file, opt);
    auto* r = new polydro_result{run(problem->file.problem, d), problem->file.problem};
    *out = r;
  });
}

void polydro_result_free(polydro_result* result) { delete result; }

polydro_certificate polydro_result_certificate(const polydro_result* result) {
  if (!result) return POLYDRO_LOWER_BOUND_ONLY;
  switch (result->result.certificate.kind) {
    case CertificateKind::SosConvexTight: return POLYDRO_SOS_CONVEX_TIGHT;
    case CertificateKind::RankOne: return POLYDRO_RANK_ONE;
    case CertificateKind::HeuristicVerified: return POLYDRO_HEURISTIC_VERIFIED;
    case CertificateKind::LowerBoundOnly: break;
  }
  return POLYDRO_LOWER_BOUND_ONLY;
}

const char* polydro_certificate_name(polydro_certificate kind) {
  switch (kind) {
    case POLYDRO_SOS_CONVEX_TIGHT: return to_string(CertificateKind::SosConvexTight);
    case POLYDRO_RANK_ONE: return to_string(CertificateKind::RankOne);
    case POLYDRO_HEURISTIC_VERIFIED: return to_string(CertificateKind::HeuristicVerified);
    case POLYDRO_LOWER_BOUND_ONLY: return to_string(CertificateKind::LowerBoundOnly);
  }
  return "unknown";
}

size_t polydro_result_x(const polydro_result* result, double* buf, size_t cap) {
  if (!result) return 0;
  const auto& x = result->result.x;
  for (size_t i = 0; buf && i < cap && i < x.size(); ++i) buf[i] = x[i];
  return x.size();
}

double polydro_result_value(const polydro_result* result) { return result ? result->result.value : 0.0; }
double polydro_result_lower_bound(const polydro_result* result) { return result ? result->result.lower_bound : 0.0; }
int polydro_result_solver_failure(const polydro_result* result) { return result && result->result.solver_failure; }

size_t polydro_result_atom_count(const polydro_result* result) {
  if (!result || !result->result.worst_case) return 0;
  return result->result.worst_case->atoms.size();
}

size_t polydro_result_atom(const polydro_result* result, size_t i, double* weight, double* point, size_t cap) {
  if (i >= polydro_result_atom_count(result)) return 0;
  const Atom& a = result->result.worst_case->atoms[i];
  if (weight) *weight = a.weight;
  for (size_t j = 0; point && j < cap && j < a.point.size(); ++j) point[j] = a.point[j];
  return a.point.size();
}

polydro_status polydro_result_json(const polydro_result* result, char** out) {
  if (!result || !out) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = dup(result_to_json(result->result, result->problem).dump(2)); });
}

polydro_status polydro_result_summary(const polydro_result* result, char** out) {
  if (!result || !out) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = dup(result_summary(result->result, result->problem)); });
}

polydro_status polydro_check_convexity(const polydro_problem* problem, const polydro_options* opt, char** json_out,
                                       int* all_certified) {
  if (!problem) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const DriverOptions d = driver_options(problem->file, opt);
    SosOptions so;
    so.solver = d.relax.solver;
    so.backend = d.relax.backend;
    const SosBattery b = run_sos_battery(problem->file.problem, so, false);
    if (all_certified) *all_certified = b.all_certified() ? 1 : 0;
    if (json_out) {
      nlohmann::json doc = battery_to_json(b);
      doc["name"] = problem->file.problem.name;
      *json_out = dup(doc.dump(2));
    }
  });
}

void polydro_simulation_default(polydro_simulation* cfg) {
  if (!cfg) return;
  const SimulationConfig d;
  cfg->mean_variance = d.kind == PortfolioKind::MeanVariance;
  cfg->n = d.n;
  cfg->M = d.M;
  cfg->d = d.d;
  cfg->sims = d.sims;
  cfg->seed = d.seed;
  cfg->batches = d.batches;
  cfg->train_fraction = d.train_fraction;
  cfg->sigma_is_std = d.sigma_is_std;
  cfg->threads = d.threads;
}

polydro_status polydro_portfolio_simulate(const polydro_simulation* cfg, char** csv_row, char** runs_json) {
  if (!cfg) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    SimulationConfig c;
    c.kind = cfg->mean_variance ? PortfolioKind::MeanVariance : PortfolioKind::Linear;
    c.n = cfg->n;
    c.M = cfg->M;
    c.d = cfg->d;
    c.sims = cfg->sims;
    c.seed = cfg->seed;
    c.batches = cfg->batches;
    c.train_fraction = cfg->train_fraction;
    c.sigma_is_std = cfg->sigma_is_std != 0;
    c.threads = cfg->threads;
    const SimulationSummary s = simulate_portfolio(c);
    if (csv_row) *csv_row = dup(summary_csv_row(s));
    if (runs_json) {
      nlohmann::json runs = nlohmann::json::array();
      for (const SimulationRun& r : s.runs)
        runs.push_back({{"x", r.x}, {"J_in", r.J_in}, {"J_out", r.J_out}, {"seconds", r.seconds},
                        {"certificate", r.certificate}});
      *runs_json = dup(runs.dump(2));
    }
  });
}

polydro_status polydro_box_from_csv(const char* path, unsigned d, size_t batches, char** y_json) {
  if (!path || !y_json) return set_error(POLYDRO_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const RawY box = build_box_ambiguity(load_samples_csv(path), d, batches);
    const nlohmann::json doc = {{"degree", d}, {"raw", raw_y_to_json(box)}};
    *y_json = dup(doc.dump(2));
  });
}

const char* polydro_simulation_csv_header(void) {
  static const std::string header = summary_csv_header();
  return header.c_str();
}

}  // extern "C"
