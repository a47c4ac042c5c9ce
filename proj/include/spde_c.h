/* C API for the spdenoise library: opaque handles plus integer error codes.
 * All functions return SPDE_OK (0) on success; on failure they return a
 * nonzero code and leave a message retrievable via spde_last_error() (the
 * message is thread-local).  Strings returned through char** outputs must be
 * released with spde_string_free(). */

#ifndef SPDE_C_H
#define SPDE_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
    SPDE_OK = 0,
    SPDE_ERR_INVALID = 1,    /* bad arguments or configuration */
    SPDE_ERR_IO = 2,         /* file read/write failure */
    SPDE_ERR_DEGENERATE = 3, /* experiment aborted: too many degenerate runs */
    SPDE_ERR_INTERNAL = 4
};

typedef struct spde_model spde_model;
typedef struct spde_record spde_record;

const char* spde_last_error(void);
void spde_string_free(char* s);

/* Model construction from the JSON descriptor schema; round-trips. */
int spde_model_parse(const char* json, spde_model** out);
int spde_model_to_json(const spde_model* model, char** json_out);
void spde_model_free(spde_model* model);

/* Exact-in-distribution simulation of the observation increments. */
int spde_simulate(const spde_model* model, double theta, int n_steps,
                  uint64_t seed, int retain_state, spde_record** out);
int spde_record_save(const spde_record* record, const char* path, int binary);
int spde_record_load(const char* path, spde_record** out);
void spde_record_free(spde_record* record);

/* Z/N estimator; degenerate is set to 1 when N falls below the zero
 * threshold (theta_hat is then 0). */
int spde_estimate(const spde_model* model, const spde_record* record,
                  double* z, double* n, double* theta_hat, int* degenerate);

/* Information functional, lower-bound rate, variance-condition diagnostic,
 * truncation tail and the closed-form example rate, as JSON. */
int spde_rate_report(const spde_model* model, double theta, char** json_out);

/* Hellinger bound between the laws at theta0 and theta1 plus the two-point
 * minimax statement, as JSON. */
int spde_hellinger_report(const spde_model* model, double theta0, double theta1,
                          char** json_out);

/* Full Monte Carlo sweep from an experiment config document.  Writes the CSV,
 * metrics sidecar and optional plot configured inside; a summary (slope fit,
 * RMSE per sweep value) is returned as JSON.  workers <= 0 reads WORKERS from
 * the environment. */
int spde_experiment_run(const char* config_json, int workers, char** summary_out);

/* Matrix-oracle self checks (solution-operator norm, perturbation identity,
 * covariance factorization, discretized Hellinger); residuals as JSON. */
int spde_oracle_check(char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* SPDE_C_H */
