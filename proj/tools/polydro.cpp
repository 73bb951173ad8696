// polydro command line: solve problem files, run the SOS-convexity battery,
// and replicate the portfolio experiment. Talks to the library only through
// the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polydro/polydro.h"

namespace {

enum Exit { kCertified = 0, kUsage = 1, kLowerBound = 2, kParse = 3, kSolver = 4 };

struct Global {
  unsigned max_order = 0;
  unsigned max_k1 = 0;
  double tol_rank = 0.0;
  std::uint64_t seed = 0;
  std::string solver;
  std::string dump_dir;
};

int exit_for(polydro_status st) {
  switch (st) {
    case POLYDRO_OK: return kCertified;
    case POLYDRO_ERR_PARSE:
    case POLYDRO_ERR_SEMANTIC:
    case POLYDRO_ERR_DIMENSION:
    case POLYDRO_ERR_DEGREE: return kParse;
    case POLYDRO_ERR_SOLVER:
    case POLYDRO_ERR_EXTRACTION: return kSolver;
    default: return kUsage;
  }
}

int report(polydro_status st) {
  std::fprintf(stderr, "error (%s): %s\n", polydro_status_name(st), polydro_last_error());
  return exit_for(st);
}

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s ? s : "";
  polydro_string_free(s);
  return out;
}

bool write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << "\n";
    return true;
  }
  std::ofstream os(path);
  if (!os) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    return false;
  }
  os << text << "\n";
  return true;
}

polydro_options make_options(const Global& g, CLI::App& app) {
  polydro_options o;
  polydro_options_default(&o);
  o.max_order = g.max_order;
  o.max_k1 = g.max_k1;
  o.tol_rank = g.tol_rank;
  o.has_seed = app.get_option("--seed")->count() > 0;
  o.seed = g.seed;
  o.solver = g.solver.empty() ? nullptr : g.solver.c_str();
  o.dump_dir = g.dump_dir.empty() ? nullptr : g.dump_dir.c_str();
  return o;
}

polydro_problem* load(const std::string& path, polydro_status& st) {
  polydro_problem* pr = nullptr;
  st = polydro_problem_load(path.c_str(), &pr);
  return pr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-SOS relaxations for distributionally robust polynomial optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(polydro_version()));

  Global g;
  app.add_option("--max-order", g.max_order, "largest relaxation order k (default d0 + 3)");
  app.add_option("--max-k1", g.max_k1, "largest order of the truncated moment problem (default d0 + 4)");
  app.add_option("--tol-rank", g.tol_rank, "relative singular value threshold for numeric rank (default 1e-6)");
  app.add_option("--seed", g.seed, "seed for the random SOS objective and extraction");
  app.add_option("--solver", g.solver, "conic backend name (default ipm)");
  app.add_option("--dump-conic", g.dump_dir, "write every conic program built into this directory");

  // solve
  auto* solve = app.add_subcommand("solve", "solve a problem file");
  std::string solve_file, json_out;
  bool quiet = false, first_order = false;
  solve->add_option("file", solve_file, "problem JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--json", json_out, "write the result document here ('-' for stdout)");
  solve->add_flag("--quiet", quiet, "suppress the summary");
  solve->add_flag("--initial-order-only", first_order, "stop after the pair at the initial order");

  // check-convexity
  auto* check = app.add_subcommand("check-convexity", "run the SOS-convexity battery on a problem file");
  std::string check_file;
  check->add_option("file", check_file, "problem JSON")->required()->check(CLI::ExistingFile);

  // portfolio simulate
  auto* portfolio = app.add_subcommand("portfolio", "portfolio experiments");
  portfolio->require_subcommand(1);
  auto* simulate = portfolio->add_subcommand("simulate", "average in- and out-of-sample J over seeded simulations");
  polydro_simulation sim;
  polydro_simulation_default(&sim);
  std::string model = "mv", runs_out;
  std::vector<unsigned> ds{sim.d};
  std::vector<std::size_t> Ms{sim.M};
  bool sigma_std = false;
  simulate->add_option("--model", model, "linear or mv")->check(CLI::IsMember({"linear", "mv"}));
  simulate->add_option("--n", sim.n, "number of assets");
  simulate->add_option("--M", Ms, "sample sizes (one row per value)");
  simulate->add_option("--d", ds, "moment degrees of the ambiguity set (one row per value)");
  simulate->add_option("--sims", sim.sims, "simulations per row");
  simulate->add_option("--seed", sim.seed, "base seed, simulation i uses seed + i");
  simulate->add_option("--batches", sim.batches, "batches for the moment box");
  simulate->add_option("--train-fraction", sim.train_fraction, "share of samples used to build the box");
  simulate->add_option("--threads", sim.threads, "worker threads (0: hardware concurrency)");
  simulate->add_flag("--sigma-is-std", sigma_std, "read 0.03 i as a standard deviation instead of a variance");
  simulate->add_option("--runs-json", runs_out, "write per-run details here");

  auto* box = portfolio->add_subcommand("box", "moment box ambiguity set from a sample CSV");
  std::string samples_csv;
  unsigned box_d = 2;
  std::size_t box_batches = 5;
  box->add_option("--samples", samples_csv, "CSV with header xi1,...,xip")->required()->check(CLI::ExistingFile);
  box->add_option("--d", box_d, "moment degree");
  box->add_option("--batches", box_batches, "number of consecutive batches");

  CLI11_PARSE(app, argc, argv);

  if (*solve) {
    polydro_status st;
    polydro_problem* pr = load(solve_file, st);
    if (st != POLYDRO_OK) return report(st);
    polydro_options o = make_options(g, app);
    o.initial_order_only = first_order;
    polydro_result* res = nullptr;
    st = polydro_solve(pr, &o, &res);
    polydro_problem_free(pr);
    if (st != POLYDRO_OK) return report(st);
    char* buf = nullptr;
    if (!quiet && polydro_result_summary(res, &buf) == POLYDRO_OK) std::cout << take(buf);
    if (!json_out.empty()) {
      if (polydro_result_json(res, &buf) != POLYDRO_OK) {
        polydro_result_free(res);
        return report(POLYDRO_ERR_INTERNAL);
      }
      if (!write_text(json_out, take(buf))) {
        polydro_result_free(res);
        return kUsage;
      }
    }
    const polydro_certificate cert = polydro_result_certificate(res);
    const bool failed = polydro_result_solver_failure(res) != 0;
    polydro_result_free(res);
    if (cert != POLYDRO_LOWER_BOUND_ONLY) return kCertified;
    return failed ? kSolver : kLowerBound;
  }

  if (*check) {
    polydro_status st;
    polydro_problem* pr = load(check_file, st);
    if (st != POLYDRO_OK) return report(st);
    const polydro_options o = make_options(g, app);
    char* buf = nullptr;
    int all = 0;
    st = polydro_check_convexity(pr, &o, &buf, &all);
    polydro_problem_free(pr);
    if (st != POLYDRO_OK) return report(st);
    std::cout << take(buf) << "\n";
    return all ? kCertified : kLowerBound;
  }

  if (*box) {
    char* buf = nullptr;
    const polydro_status st = polydro_box_from_csv(samples_csv.c_str(), box_d, box_batches, &buf);
    if (st != POLYDRO_OK) return report(st);
    std::cout << take(buf) << "\n";
    return 0;
  }

  if (*simulate) {
    sim.mean_variance = model == "mv";
    sim.sigma_is_std = sigma_std;
    std::cout << polydro_simulation_csv_header() << "\n";
    std::string runs = "[";
    for (std::size_t M : Ms) {
      for (unsigned d : ds) {
        sim.M = M;
        sim.d = d;
        char* row = nullptr;
        char* detail = nullptr;
        const polydro_status st = polydro_portfolio_simulate(&sim, &row, runs_out.empty() ? nullptr : &detail);
        if (st != POLYDRO_OK) return report(st);
        std::cout << take(row) << std::endl;
        if (!runs_out.empty()) {
          if (runs.size() > 1) runs += ",";
          runs += "{\"d\":" + std::to_string(d) + ",\"M\":" + std::to_string(M) + ",\"runs\":" + take(detail) + "}";
        }
      }
    }
    if (!runs_out.empty() && !write_text(runs_out, runs + "]")) return kUsage;
    return 0;
  }
  return kUsage;
}
