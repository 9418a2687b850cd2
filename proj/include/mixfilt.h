/*
 * mixfilt C API: recursive approximate-Bayes filters for simple mixture
 * models, with exact-posterior and information-integral oracles.
 *
 * All functions return MIXFILT_OK (0) on success or a negative status code;
 * mixfilt_last_error() returns a thread-local message for the most recent
 * failure on the calling thread.  Strings returned through char** out
 * parameters are owned by the caller and released with mixfilt_string_free().
 */
#ifndef MIXFILT_H
#define MIXFILT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MIXFILT_API __declspec(dllexport)
#else
#define MIXFILT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  MIXFILT_OK = 0,
  MIXFILT_ERR_INVALID_ARGUMENT = -1, /* bad parameter or malformed config */
  MIXFILT_ERR_DOMAIN = -2,           /* input outside the mathematical domain */
  MIXFILT_ERR_NO_CONVERGENCE = -3,   /* iterative solver stopped short */
  MIXFILT_ERR_DEGENERATE = -4,       /* all component densities zero at x */
  MIXFILT_ERR_IO = -5,               /* file could not be read or written */
  MIXFILT_ERR_INTERNAL = -6
};

MIXFILT_API const char* mixfilt_version(void);
MIXFILT_API const char* mixfilt_last_error(void);
MIXFILT_API void mixfilt_string_free(char* s);

/* ---- special functions ------------------------------------------------ */

MIXFILT_API int mixfilt_log_gamma(double x, double* out);
MIXFILT_API int mixfilt_digamma(double x, double* out);
MIXFILT_API int mixfilt_trigamma(double x, double* out);

typedef struct {
  int max_iterations; /* >= 1 */
  double tolerance;   /* > 0, on |res1| + |res2| */
  double damping;     /* in (0, 1] */
} mixfilt_solver_settings;

/* Solve Psi(A)-Psi(A+B)=r1, Psi(B)-Psi(A+B)=r2 for A,B > 0.  settings may be
 * NULL for the defaults (100 iterations, 1e-12, no extra damping). */
MIXFILT_API int mixfilt_solve_digamma_system(double r1, double r2, double initial_a,
                                             double initial_b,
                                             const mixfilt_solver_settings* settings,
                                             double* a_out, double* b_out);

/* ---- models ------------------------------------------------------------ */

/* Opaque model handle built from a JSON spec, one of:
 *   {"type":"known-pair","f1":{...},"f2":{...},"beta":0.3}
 *   {"type":"known-set","densities":[{...},...],"weights":[...]}
 *   {"type":"mean-mixture","components":[{"c":..,"sigma":..,"weight":..},..],"mu":..}
 *   {"type":"mean-mixture","preset":"symmetric"|"clutter","mu":..}
 * Densities: {"type":"gaussian","mean":..,"sd":..} | {"type":"uniform","lo":..,"hi":..}
 *            | {"type":"tabulated","x":[..],"y":[..]}
 */
typedef struct mixfilt_model mixfilt_model;

MIXFILT_API int mixfilt_model_create(const char* spec_json, mixfilt_model** out);
MIXFILT_API void mixfilt_model_destroy(mixfilt_model* model);

enum {
  MIXFILT_MODEL_KNOWN_PAIR = 1,
  MIXFILT_MODEL_KNOWN_SET = 2,
  MIXFILT_MODEL_MEAN_MIXTURE = 3
};
MIXFILT_API int mixfilt_model_kind(const mixfilt_model* model);

/* ---- weight filter (known-pair models) --------------------------------- */

enum {
  MIXFILT_BETA_QUASI_BAYES = 1,
  MIXFILT_BETA_PE = 2, /* exact moment matching */
  MIXFILT_BETA_KL = 3, /* digamma-system projection */
  MIXFILT_BETA_VB = 4  /* recursive variational step */
};

typedef struct {
  double w1;
  double mass_increment;
  double epsilon;
} mixfilt_update_diag;

MIXFILT_API int mixfilt_beta_responsibility(const mixfilt_model* model, double a, double b,
                                            double x, double* out);

/* One recursive step of the chosen rule from Be(a,b); diag may be NULL, and
 * settings applies to the KL rule only (NULL for defaults). */
MIXFILT_API int mixfilt_beta_update(const mixfilt_model* model, int rule, double a, double b,
                                    double x, const mixfilt_solver_settings* settings,
                                    double* a_out, double* b_out, mixfilt_update_diag* diag);

MIXFILT_API int mixfilt_beta_confirmed_update(double a, double b, int z, double* a_out,
                                              double* b_out);

/* Multi-pass EP over xs[0..n); rule is MIXFILT_BETA_PE or MIXFILT_BETA_KL. */
MIXFILT_API int mixfilt_ep_fit(const mixfilt_model* model, int rule, double prior_a,
                               double prior_b, const double* xs, size_t n, int max_sweeps,
                               double tolerance, double* a_out, double* b_out,
                               int* sweeps_used, int* converged);

/* ---- gaussian mean filter (mean-mixture models) ------------------------ */

MIXFILT_API int mixfilt_mean_log_density(const mixfilt_model* model, double mu, double x,
                                         double* out);
MIXFILT_API int mixfilt_mean_adf_update(const mixfilt_model* model, double a, double b, double x,
                                        double* a_out, double* b_out);
MIXFILT_API int mixfilt_mean_score(const mixfilt_model* model, double mu, double x, double* out);
MIXFILT_API int mixfilt_mean_observed_information(const mixfilt_model* model, double mu, double x,
                                                  double* out);

/* ---- dirichlet filter (known-set models) ------------------------------- */

enum {
  MIXFILT_DIR_AVG_VARIANCE = 1,
  MIXFILT_DIR_AVG_VARIANCE_COVARIANCE = 2
};

/* alpha and alpha_out hold j entries, j = number of densities in the set. */
MIXFILT_API int mixfilt_dirichlet_pe_update(const mixfilt_model* model, int policy,
                                            const double* alpha, size_t j, double x,
                                            double* alpha_out);
MIXFILT_API int mixfilt_dirichlet_qb_update(const mixfilt_model* model, const double* alpha,
                                            size_t j, double x, double* alpha_out);

/* ---- oracles ------------------------------------------------------------ */

MIXFILT_API int mixfilt_fisher_information_beta(const mixfilt_model* model, double beta,
                                                double* out);
MIXFILT_API int mixfilt_pe_information_beta(const mixfilt_model* model, double beta, double* out);
MIXFILT_API int mixfilt_fisher_information_mu(const mixfilt_model* model, double mu, double* out);

/* ---- experiment harness ------------------------------------------------- */

/* Simulated draws for a config document: CSV with header "i,x,z", or a JSON
 * array of {i,x,z} rows.  format is "csv" or "json" (NULL means csv). */
MIXFILT_API int mixfilt_simulate_json(const char* config_json, const char* format,
                                      char** data_out);

/* Runs every configured method over one simulated stream; writes
 * <dir>/trace.<format> and <dir>/summary.json, and returns the summary
 * document.  out_dir and format fall back to the config's "output" block when
 * NULL or empty (format defaults to csv). */
MIXFILT_API int mixfilt_run_json(const char* config_json, const char* out_dir, const char* format,
                                 char** summary_json_out);

MIXFILT_API int mixfilt_oracle_json(const char* config_json, char** report_json_out);
MIXFILT_API int mixfilt_check_lemma_json(const char* config_json, char** report_json_out);
MIXFILT_API int mixfilt_ep_fit_json(const char* config_json, char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* MIXFILT_H */
