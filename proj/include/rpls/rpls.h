/* Riemannian partial least squares for SPD-valued predictors: C API.
 *
 * Every function returns an rpls_status; on failure a thread-local message is
 * available through rpls_last_error(). Objects are opaque handles created and
 * destroyed by matching *_free functions. Handles are immutable after
 * creation and safe to share across threads; creation functions are
 * thread-safe as long as each config handle is used from one thread at a
 * time.
 */
#ifndef RPLS_H
#define RPLS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RPLS_API __declspec(dllexport)
#else
#define RPLS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rpls_status {
  RPLS_OK = 0,
  RPLS_ERROR_INVALID_INPUT = 1,
  RPLS_ERROR_NOT_POSITIVE_DEFINITE = 2,
  RPLS_ERROR_BASE_MISMATCH = 3,
  RPLS_ERROR_INVALID_COMPONENTS = 4,
  RPLS_ERROR_DEGENERATE_RESPONSE = 5,
  RPLS_ERROR_NON_CONVERGENCE = 6,
  RPLS_ERROR_RANK_DEFICIENCY = 7,
  RPLS_ERROR_DEGENERATE_MODEL = 8,
  RPLS_ERROR_EMPTY_INPUT = 9,
  RPLS_ERROR_CONSTANT_SIGNAL = 10,
  RPLS_ERROR_OUT_OF_DOMAIN = 11,
  RPLS_ERROR_PARSE = 12,
  RPLS_ERROR_IO = 13,
  RPLS_ERROR_INTERNAL = 14
} rpls_status;

RPLS_API const char* rpls_status_name(rpls_status status);

/* Message from the most recent failing call on this thread. */
RPLS_API const char* rpls_last_error(void);

RPLS_API const char* rpls_version(void);

/* ------------------------------------------------------------------ */
/* configuration: string key/value pairs mirroring the CLI flags       */
/*
 * Keys (defaults in parentheses):
 *   method (riemannian|raw|fisher), regularize (false), components (2),
 *   input_kind (matrix|timeseries), responses (comma-separated names),
 *   group_response (group), classification_threshold (0.5),
 *   folds (10), max_components (10), permutations (200), alpha (0.05),
 *   smoothed_pvalues (false), seed (0), workers (1),
 *   frechet_tolerance (1e-6), frechet_step (1.0), frechet_max_iterations (200),
 *   nipals_tolerance (1e-10), nipals_max_iterations (500),
 *   sim_dim (10), sim_subjects (100), sim_latent (2), sim_response_dim (2),
 *   sim_loading_scale (1.0), sim_noise (0.05), sim_active_coords (0)
 */

typedef struct rpls_config rpls_config;

RPLS_API rpls_config* rpls_config_create(void);
RPLS_API void rpls_config_free(rpls_config* cfg);
RPLS_API rpls_status rpls_config_set(rpls_config* cfg, const char* key, const char* value);

/* ------------------------------------------------------------------ */
/* datasets                                                            */

typedef struct rpls_dataset rpls_dataset;

/* manifest: "subject_id path" lines; phenotypes: delimited table with a
 * header row (may be NULL/empty when responses are not needed). The
 * response columns are taken from the config "responses" key. */
RPLS_API rpls_status rpls_dataset_load(const char* manifest_path, const char* phenotype_path,
                                       const rpls_config* cfg, rpls_dataset** out);
RPLS_API void rpls_dataset_free(rpls_dataset* ds);
RPLS_API int rpls_dataset_size(const rpls_dataset* ds);
RPLS_API int rpls_dataset_dim(const rpls_dataset* ds);
RPLS_API int rpls_dataset_response_count(const rpls_dataset* ds);
RPLS_API const char* rpls_dataset_subject_id(const rpls_dataset* ds, int index);

/* Writes a simulated dataset (matrix files, manifest.txt, phenotypes.tsv,
 * truth.json) under out_dir, controlled by the sim_* config keys. */
RPLS_API rpls_status rpls_simulate(const rpls_config* cfg, const char* out_dir);

/* ------------------------------------------------------------------ */
/* models                                                              */

typedef struct rpls_model rpls_model;

RPLS_API rpls_status rpls_fit(const rpls_dataset* ds, const rpls_config* cfg, rpls_model** out);
RPLS_API void rpls_model_free(rpls_model* model);
RPLS_API rpls_status rpls_model_save(const rpls_model* model, const char* path);
RPLS_API rpls_status rpls_model_load(const char* path, rpls_model** out);
RPLS_API int rpls_model_components(const rpls_model* model);
RPLS_API int rpls_model_dim(const rpls_model* model);

/* Raw-unit predictions, row-major n_subjects x n_responses; out must hold
 * rpls_dataset_size(ds) * rpls_model_response_count(model) doubles. */
RPLS_API int rpls_model_response_count(const rpls_model* model);
RPLS_API rpls_status rpls_model_predict(const rpls_model* model, const rpls_dataset* ds,
                                        double* out, size_t out_len);
/* Predictions written to a TSV file. */
RPLS_API rpls_status rpls_model_write_predictions(const rpls_model* model, const rpls_dataset* ds,
                                                  const char* path);
/* model.json, per-response coefficient matrices, top-quartile masks, and
 * network-averaged matrices when network_map_path is non-NULL. */
RPLS_API rpls_status rpls_model_write_outputs(const rpls_model* model, const char* out_dir,
                                              const char* network_map_path);

/* ------------------------------------------------------------------ */
/* cross-validation                                                    */

typedef struct rpls_cv_result rpls_cv_result;

RPLS_API rpls_status rpls_cross_validate(const rpls_dataset* ds, const rpls_config* cfg,
                                         rpls_cv_result** out);
RPLS_API void rpls_cv_free(rpls_cv_result* cv);
RPLS_API int rpls_cv_chosen_components(const rpls_cv_result* cv);
RPLS_API rpls_status rpls_cv_write_report(const rpls_cv_result* cv, const char* path);

/* All methods named in the config "method" key (comma-separated) evaluated
 * side by side with shared fold splits. */
RPLS_API rpls_status rpls_cross_validate_compare(const rpls_dataset* ds, const rpls_config* cfg,
                                                 const char* report_path);

/* ------------------------------------------------------------------ */
/* VIP permutation inference                                           */

typedef struct rpls_vip_result rpls_vip_result;

RPLS_API rpls_status rpls_vip(const rpls_dataset* ds, const rpls_config* cfg,
                              rpls_vip_result** out);
RPLS_API void rpls_vip_free(rpls_vip_result* vip);
RPLS_API int rpls_vip_coordinate_count(const rpls_vip_result* vip);
RPLS_API int rpls_vip_significant_count(const rpls_vip_result* vip);
RPLS_API rpls_status rpls_vip_scores(const rpls_vip_result* vip, double* out, size_t out_len);
RPLS_API rpls_status rpls_vip_p_values(const rpls_vip_result* vip, double* out, size_t out_len);
RPLS_API rpls_status rpls_vip_q_values(const rpls_vip_result* vip, double* out, size_t out_len);
/* network_map_path may be NULL; it only supplies ROI labels. */
RPLS_API rpls_status rpls_vip_write_report(const rpls_vip_result* vip, const char* network_map_path,
                                           const char* path);

/* ------------------------------------------------------------------ */
/* low-level SPD geometry on row-major dim x dim buffers               */

RPLS_API rpls_status rpls_spd_distance(const double* a, const double* b, int dim, double* out);
RPLS_API rpls_status rpls_spd_exp(const double* base, const double* tangent, int dim, double* out);
RPLS_API rpls_status rpls_spd_log(const double* base, const double* point, int dim, double* out);
/* n stacked dim x dim matrices; returns the Fréchet mean and whether the
 * gradient descent converged. */
RPLS_API rpls_status rpls_spd_frechet_mean(const double* stacked, int n, int dim, double tolerance,
                                           double step, int max_iterations, double* out_mean,
                                           int* out_converged);

#ifdef __cplusplus
}
#endif

#endif /* RPLS_H */
