/* dbx — numerical toolkit for degraded broadcast channels.
 *
 * C API over the C++ core: opaque handles, integer status codes, string
 * results. Handles are not thread-safe for concurrent mutation but all run
 * functions are pure given their inputs; distinct handles can be used from
 * distinct threads freely.
 *
 * Status codes double as CLI exit codes:
 *   0 success / all checks hold
 *   1 usage error (bad arguments)
 *   2 parse or validation error
 *   3 enumeration budget exceeded
 *   4 verification failure (a checker reported holds == false)
 *   5 internal error
 */
#ifndef DBX_H
#define DBX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DBX_API __declspec(dllexport)
#else
#define DBX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dbx_status {
  DBX_OK = 0,
  DBX_E_USAGE = 1,
  DBX_E_PARSE = 2,
  DBX_E_BUDGET = 3,
  DBX_E_VERIFY = 4,
  DBX_E_INTERNAL = 5
} dbx_status;

typedef struct dbx_channel dbx_channel;
typedef struct dbx_report dbx_report;

/* ---- channels ---- */

DBX_API dbx_status dbx_channel_from_json(const char* json_text, dbx_channel** out);
DBX_API dbx_status dbx_channel_from_file(const char* path, dbx_channel** out);
DBX_API void dbx_channel_free(dbx_channel* ch);
DBX_API int dbx_channel_x_size(const dbx_channel* ch);
DBX_API int dbx_channel_y_size(const dbx_channel* ch);
DBX_API int dbx_channel_z_size(const dbx_channel* ch);

/* ---- options ---- */

/* Log-spaced grid description. */
typedef struct dbx_grid {
  double lo;
  double hi;
  int points;
} dbx_grid;

typedef struct dbx_run_opts {
  int restarts;        /* optimizer random restarts (default 16) */
  int max_iters;       /* optimizer iteration cap (default 400) */
  int u_size;          /* auxiliary alphabet size; 0 -> |X| */
  uint64_t seed;       /* master seed for anything randomized */
  int threads;         /* worker cap; 0 -> DBX_THREADS env / all cores */
  int include_timing;  /* 0 omits wall_time_s from reports (bitwise diffs) */
} dbx_run_opts;

DBX_API void dbx_run_opts_init(dbx_run_opts* opts);
DBX_API void dbx_grid_init_mu(dbx_grid* g);     /* 61 points in [1e-3, 1e3] */
DBX_API void dbx_grid_init_lambda(dbx_grid* g); /* 61 points in [1e-3, 1e3] */

/* ---- runs; every run produces a report handle ---- */

DBX_API dbx_status dbx_run_capacity(const dbx_channel* ch, const dbx_grid* mu,
                                    const dbx_run_opts* opts, dbx_report** out);

DBX_API dbx_status dbx_run_region(const dbx_channel* ch, double r1, double r2,
                                  double slack, const dbx_grid* mu,
                                  const dbx_run_opts* opts, dbx_report** out);

/* want_grid_table != 0 additionally emits the full (mu, lambda, F) table. */
DBX_API dbx_status dbx_run_exponent(const dbx_channel* ch, double r1, double r2,
                                    const dbx_grid* mu, const dbx_grid* lambda,
                                    int want_grid_table, const dbx_run_opts* opts,
                                    dbx_report** out);

/* suite: lemma1|lemma2|prop1|lemma6|holder|prop2|percode|appendixC.
 * ch may be NULL (fresh random binary channel per trial; the per-code suite
 * falls back to the built-in BSC(0.1) cascade). r1,r2 feed the per-code
 * suite only. Returns DBX_OK even when trials fail; inspect
 * dbx_report_all_hold. */
DBX_API dbx_status dbx_run_verify(const char* suite, int n, int trials, uint64_t seed,
                                  const dbx_channel* ch, double r1, double r2,
                                  const dbx_run_opts* opts, dbx_report** out);

DBX_API dbx_status dbx_run_simulate(const dbx_channel* ch, double r1, double r2,
                                    const int* n_list, int n_count, long samples,
                                    uint64_t seed, const dbx_run_opts* opts,
                                    dbx_report** out);

/* ---- report access; strings are owned by the report ---- */

DBX_API const char* dbx_report_json(const dbx_report* rep);
DBX_API const char* dbx_report_csv(const dbx_report* rep); /* "" when no table */
/* 1 all hold, 0 some failed, -1 not applicable. */
DBX_API int dbx_report_all_hold(const dbx_report* rep);
/* Scalar lookup into the report results (e.g. "f_value", "best_mu",
 * "margin"); NaN when missing. */
DBX_API double dbx_report_value(const dbx_report* rep, const char* key);
DBX_API void dbx_report_free(dbx_report* rep);

/* ---- misc ---- */

/* Thread-local message for the last failed call in this thread. */
DBX_API const char* dbx_last_error(void);
DBX_API const char* dbx_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DBX_H */
