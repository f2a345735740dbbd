#ifndef PHISUM_H
#define PHISUM_H

/* C interface to the phisum library. Objects are opaque handles released
 * with the matching _free function. Calls return a phisum_status; on failure
 * phisum_last_error() describes the most recent error of the calling thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PHISUM_OK = 0,
  PHISUM_INVALID_ARGUMENT = 1,
  PHISUM_DIMENSION_MISMATCH = 2,
  PHISUM_NOT_POLYHEDRAL = 3,
  PHISUM_INFEASIBLE = 4,
  PHISUM_UNCERTIFIED = 5,
  PHISUM_PARSE_ERROR = 6,
  PHISUM_INTERNAL = 7
} phisum_status;

typedef struct phisum_config phisum_config;
typedef struct phisum_report phisum_report;
typedef struct phisum_suite phisum_suite;

const char* phisum_version(void);
const char* phisum_last_error(void);

/* Experiment configs (JSON, "schema": 1). */
phisum_status phisum_config_load(const char* path, phisum_config** out);
phisum_status phisum_config_parse(const char* text, const char* source, phisum_config** out);
phisum_status phisum_config_set_seed(phisum_config* cfg, uint64_t seed);
/* Normalized JSON; the string lives as long as the handle. */
const char* phisum_config_json(const phisum_config* cfg);
void phisum_config_free(phisum_config* cfg);

/* Runs the configured task. Errors inside the task still produce a report
 * with exit code 1; only invalid handles fail the call. */
phisum_status phisum_run(const phisum_config* cfg, phisum_report** out);
/* 0 certified, 2 gap-open, 1 error. */
int phisum_report_exit_code(const phisum_report* rep);
const char* phisum_report_json(const phisum_report* rep);
void phisum_report_free(phisum_report* rep);

/* Acceptance suite. ids == NULL (or count == 0) runs every criterion. */
phisum_status phisum_suite_run(const int* ids, size_t count, phisum_suite** out);
size_t phisum_suite_size(const phisum_suite* suite);
phisum_status phisum_suite_row(const phisum_suite* suite, size_t index, int* id, int* pass, double* value,
                               double* tol);
/* One printed line per criterion. */
const char* phisum_suite_line(const phisum_suite* suite, size_t index);
const char* phisum_suite_table(const phisum_suite* suite);
int phisum_suite_all_pass(const phisum_suite* suite);
void phisum_suite_free(phisum_suite* suite);

/* Two-sided summing constant of T: l_qin^n -> l_qout^m with identity Phi.
 * `coeffs` is row-major with the codomain index last (n x m entries);
 * q may be INFINITY. */
phisum_status phisum_summing_lq(int n, double q_in, int m, double q_out, const double* coeffs, double r,
                                double* lower, double* upper, int* certified);

#ifdef __cplusplus
}
#endif

#endif
