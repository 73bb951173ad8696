#ifndef POLYDRO_H
#define POLYDRO_H

/* C interface of the polydro shared library.
 *
 * Handles are opaque. Every call that can fail returns a polydro_status and
 * leaves a message for polydro_last_error() (per thread). Strings handed
 * out through char** must be released with polydro_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define POLYDRO_API __declspec(dllexport)
#else
#  define POLYDRO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum polydro_status {
  POLYDRO_OK = 0,
  POLYDRO_ERR_PARSE = 1,
  POLYDRO_ERR_SEMANTIC = 2,
  POLYDRO_ERR_DIMENSION = 3,
  POLYDRO_ERR_DEGREE = 4,
  POLYDRO_ERR_UNSUPPORTED = 5,
  POLYDRO_ERR_EXTRACTION = 6,
  POLYDRO_ERR_SOLVER = 7,
  POLYDRO_ERR_IO = 8,
  POLYDRO_ERR_ARGUMENT = 9,
  POLYDRO_ERR_INTERNAL = 10
} polydro_status;

typedef enum polydro_certificate {
  POLYDRO_SOS_CONVEX_TIGHT = 0,
  POLYDRO_RANK_ONE = 1,
  POLYDRO_HEURISTIC_VERIFIED = 2,
  POLYDRO_LOWER_BOUND_ONLY = 3
} polydro_certificate;

typedef struct polydro_problem polydro_problem;
typedef struct polydro_result polydro_result;

/* Zero / negative / NULL fields mean "keep the problem file's value or the
 * library default". */
typedef struct polydro_options {
  unsigned max_order;
  unsigned max_k1;
  double tol_rank;
  int has_seed;
  uint64_t seed;
  const char* solver;
  const char* dump_dir;
  int initial_order_only;
  int skip_sos_battery;
  int skip_heuristic;
} polydro_options;

POLYDRO_API const char* polydro_version(void);
POLYDRO_API const char* polydro_last_error(void);
POLYDRO_API const char* polydro_status_name(polydro_status status);
POLYDRO_API void polydro_string_free(char* s);
POLYDRO_API void polydro_options_default(polydro_options* opt);

/* problems */
POLYDRO_API polydro_status polydro_problem_parse(const char* json_text, polydro_problem** out);
POLYDRO_API polydro_status polydro_problem_load(const char* path, polydro_problem** out);
POLYDRO_API void polydro_problem_free(polydro_problem* problem);
POLYDRO_API polydro_status polydro_problem_serialize(const polydro_problem* problem, char** out);
POLYDRO_API size_t polydro_problem_n(const polydro_problem* problem);
POLYDRO_API size_t polydro_problem_p(const polydro_problem* problem);
/* On a parse error, the 1-based position when the JSON itself was malformed (0 otherwise). */
POLYDRO_API int polydro_last_error_line(void);
POLYDRO_API int polydro_last_error_column(void);

/* solving */
POLYDRO_API polydro_status polydro_solve(const polydro_problem* problem, const polydro_options* opt,
                                         polydro_result** out);
POLYDRO_API void polydro_result_free(polydro_result* result);
POLYDRO_API polydro_certificate polydro_result_certificate(const polydro_result* result);
POLYDRO_API const char* polydro_certificate_name(polydro_certificate kind);
/* Copies min(cap, n) entries of x* and returns n. */
POLYDRO_API size_t polydro_result_x(const polydro_result* result, double* buf, size_t cap);
POLYDRO_API double polydro_result_value(const polydro_result* result);
POLYDRO_API double polydro_result_lower_bound(const polydro_result* result);
POLYDRO_API int polydro_result_solver_failure(const polydro_result* result);
POLYDRO_API size_t polydro_result_atom_count(const polydro_result* result);
/* Weight of atom i and min(cap, p) coordinates; returns p, or 0 for a bad index. */
POLYDRO_API size_t polydro_result_atom(const polydro_result* result, size_t i, double* weight, double* point, size_t cap);
POLYDRO_API polydro_status polydro_result_json(const polydro_result* result, char** out);
POLYDRO_API polydro_status polydro_result_summary(const polydro_result* result, char** out);

/* SOS-convexity battery only; *all_certified is 1 when every test passed. */
POLYDRO_API polydro_status polydro_check_convexity(const polydro_problem* problem, const polydro_options* opt,
                                                   char** json_out, int* all_certified);

/* portfolio experiment */
typedef struct polydro_simulation {
  int mean_variance; /* 0: linear model */
  size_t n;
  size_t M;
  unsigned d;
  size_t sims;
  uint64_t seed;
  size_t batches;
  double train_fraction;
  int sigma_is_std;
  size_t threads;
} polydro_simulation;

POLYDRO_API void polydro_simulation_default(polydro_simulation* cfg);
/* One CSV row (no header) and, if runs_json is not NULL, the per-run details. */
POLYDRO_API polydro_status polydro_portfolio_simulate(const polydro_simulation* cfg, char** csv_row, char** runs_json);
POLYDRO_API const char* polydro_simulation_csv_header(void);
/* Moment box from a sample CSV (header xi1,...,xip): a Y block
 * {"degree": d, "raw": [{"type": "box", ...}]} ready to paste into a problem file. */
POLYDRO_API polydro_status polydro_box_from_csv(const char* path, unsigned d, size_t batches, char** y_json);

#ifdef __cplusplus
}
#endif

#endif
