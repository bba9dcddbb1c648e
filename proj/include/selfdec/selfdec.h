/* selfdec: simulation and verification of exponentially discounted
 * integrals of Lévy processes, with a stable C interface.
 *
 * Conventions
 *   - Every fallible call returns a selfdec_status; SELFDEC_OK is success.
 *     On failure, selfdec_last_error() describes it (per thread, valid until
 *     the next failing call on that thread).
 *   - Objects are opaque handles created by *_create / *_parse / *_load and
 *     released by the matching *_destroy (which accepts NULL).
 *   - Text outputs use caller buffers: pass buf/cap; *needed receives the
 *     length including the terminating NUL. A NULL or short buffer returns
 *     SELFDEC_ERR_BUFFER_TOO_SMALL and writes nothing.
 *   - Laws, models, rules and configs are passed as JSON text in the same
 *     schema as experiment configs (see the README).
 */
#ifndef SELFDEC_SELFDEC_H
#define SELFDEC_SELFDEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SELFDEC_BUILDING)
#define SELFDEC_API __declspec(dllexport)
#else
#define SELFDEC_API __declspec(dllimport)
#endif
#else
#define SELFDEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum selfdec_status {
  SELFDEC_OK = 0,
  SELFDEC_ERR_INVALID_ARGUMENT = 1,
  SELFDEC_ERR_INSUFFICIENT_HORIZON = 2,
  SELFDEC_ERR_NOT_CONTRACTIVE = 3,
  SELFDEC_ERR_SPECTRAL_CONDITION = 4,
  SELFDEC_ERR_CONFIG = 5,
  SELFDEC_ERR_IO = 6,
  SELFDEC_ERR_BUFFER_TOO_SMALL = 7,
  SELFDEC_ERR_INTERNAL = 8
} selfdec_status;

SELFDEC_API const char* selfdec_version(void);
SELFDEC_API const char* selfdec_last_error(void);
SELFDEC_API const char* selfdec_status_name(selfdec_status status);

/* ---- random streams (Philox4x32-10, counter based) ---------------------- */

typedef struct selfdec_stream selfdec_stream;

SELFDEC_API selfdec_status selfdec_stream_create(uint64_t seed, uint64_t stream_id,
                                                 selfdec_stream** out);
SELFDEC_API void selfdec_stream_destroy(selfdec_stream* stream);
/* Independent child stream for task `index`. */
SELFDEC_API selfdec_status selfdec_stream_substream(const selfdec_stream* stream, uint64_t index,
                                                    selfdec_stream** out);
SELFDEC_API selfdec_status selfdec_stream_next_u64(selfdec_stream* stream, uint64_t* out);
SELFDEC_API selfdec_status selfdec_sample_uniform(selfdec_stream* stream, double* out);
SELFDEC_API selfdec_status selfdec_sample_gamma(selfdec_stream* stream, double shape, double rate,
                                                double* out);
/* One draw from a scalar law given as JSON, e.g. {"type":"exp","rate":1}. */
SELFDEC_API selfdec_status selfdec_sample_law(selfdec_stream* stream, const char* law_json,
                                              double* out);

/* ---- Lévy models and paths ---------------------------------------------- */

typedef struct selfdec_model selfdec_model;
typedef struct selfdec_path selfdec_path;

/* {"jump_rate": r, "jump_law": {...}, "drift": d, "gauss_var": v} */
SELFDEC_API selfdec_status selfdec_model_parse(const char* model_json, selfdec_model** out);
SELFDEC_API void selfdec_model_destroy(selfdec_model* model);
SELFDEC_API selfdec_status selfdec_model_mean_increment(const selfdec_model* model, double* out);

SELFDEC_API selfdec_status selfdec_path_simulate(const selfdec_model* model, double horizon,
                                                 selfdec_stream* stream, selfdec_path** out);
/* {"horizon": T, "jumps": [[t, size], ...], "drift": d, "gauss_var": v} */
SELFDEC_API selfdec_status selfdec_path_parse(const char* path_json, selfdec_path** out);
SELFDEC_API selfdec_status selfdec_path_to_json(const selfdec_path* path, char* buf, size_t cap,
                                                size_t* needed);
SELFDEC_API void selfdec_path_destroy(selfdec_path* path);
SELFDEC_API selfdec_status selfdec_path_jump_count(const selfdec_path* path, size_t* out);
SELFDEC_API selfdec_status selfdec_path_value(const selfdec_path* path, double t, double* out);
/* Y_tau(t) = Y(t + tau) - Y(tau). */
SELFDEC_API selfdec_status selfdec_path_shift(const selfdec_path* path, double tau,
                                              selfdec_path** out);

/* int_(0,t] e^{-s} dY(s) as a sum over jumps, and by integration by parts. */
SELFDEC_API selfdec_status selfdec_eval_jump_sum(const selfdec_path* path, double t, double* out);
SELFDEC_API selfdec_status selfdec_eval_by_parts(const selfdec_path* path, double t, double* out);

/* n draws of the integral truncated at `horizon`; draw i uses
 * substream(i) of `stream`. `out` holds n doubles. */
SELFDEC_API selfdec_status selfdec_sample_discounted_integrals(const selfdec_model* model,
                                                               double horizon, size_t n,
                                                               const selfdec_stream* stream,
                                                               double* out);

/* ---- stopping-time decomposition ---------------------------------------- */

typedef struct selfdec_record {
  double tau;
  double x_tau;
  double discount;
  double x_prime;
  double x_total;
} selfdec_record;

/* rule_json: {"type":"fixed","t":0.7} | {"type":"first_jump"} |
 * {"type":"first_jump_in","set":{...}} | {"type":"kth_jump","k":3} |
 * {"type":"independent","law":{...}} */
SELFDEC_API selfdec_status selfdec_decompose(const selfdec_model* model, const char* rule_json,
                                             double horizon, selfdec_stream* stream,
                                             selfdec_record* out);
SELFDEC_API double selfdec_record_residual(const selfdec_record* record);

/* ---- statistics ------------------------------------------------------------ */

typedef struct selfdec_ks_result {
  double statistic;
  double threshold;
  double significance;
  int pass;
} selfdec_ks_result;

SELFDEC_API selfdec_status selfdec_ks_two_sample(const double* a, size_t n, const double* b,
                                                 size_t m, double significance,
                                                 selfdec_ks_result* out);

/* ---- experiments ------------------------------------------------------------ */

typedef struct selfdec_experiment selfdec_experiment;

/* Parses and fully validates a config; schema problems are SELFDEC_ERR_CONFIG. */
SELFDEC_API selfdec_status selfdec_experiment_parse(const char* config_json,
                                                    selfdec_experiment** out);
SELFDEC_API selfdec_status selfdec_experiment_load(const char* config_path,
                                                   selfdec_experiment** out);
SELFDEC_API void selfdec_experiment_destroy(selfdec_experiment* experiment);
SELFDEC_API selfdec_status selfdec_experiment_set_seed(selfdec_experiment* experiment,
                                                       uint64_t seed);
SELFDEC_API selfdec_status selfdec_experiment_set_out_dir(selfdec_experiment* experiment,
                                                          const char* dir);
SELFDEC_API selfdec_status selfdec_experiment_out_dir(const selfdec_experiment* experiment,
                                                      char* buf, size_t cap, size_t* needed);
/* Runs the experiment and writes samples.csv, report.json, cdf.csv and
 * ecf.csv to the output directory. *all_pass is 1 iff every verdict passed. */
SELFDEC_API selfdec_status selfdec_experiment_run(selfdec_experiment* experiment, int* all_pass);
/* After a run: number of reports and a one-line CSV summary of each. */
SELFDEC_API selfdec_status selfdec_experiment_report_count(const selfdec_experiment* experiment,
                                                           size_t* out);
SELFDEC_API selfdec_status selfdec_experiment_report_line(const selfdec_experiment* experiment,
                                                          size_t index, char* buf, size_t cap,
                                                          size_t* needed);
SELFDEC_API const char* selfdec_report_csv_header(void);

#ifdef __cplusplus
}
#endif

#endif /* SELFDEC_SELFDEC_H */
