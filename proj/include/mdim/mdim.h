/* SPDX-License-Identifier: Apache-2.0 */
#ifndef MDIM_MDIM_H
#define MDIM_MDIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(MDIM_BUILDING_LIBRARY)
#define MDIM_API __attribute__((visibility("default")))
#else
#define MDIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdim_status {
  MDIM_OK = 0,
  MDIM_E_INVALID = 1,
  MDIM_E_CONFIG = 2,
  MDIM_E_NUMERIC = 3,
  MDIM_E_IO = 4,
  MDIM_E_RESOURCE = 5,
  MDIM_E_INTERNAL = 6
} mdim_status;

typedef struct mdim_config mdim_config;
typedef struct mdim_result mdim_result;
typedef struct mdim_process mdim_process;
typedef struct mdim_path mdim_path;

/* Message of the last failed call on this thread ("" if none). */
MDIM_API const char* mdim_last_error(void);
MDIM_API const char* mdim_version(void);
/* Worker threads for parallel work; 0 = hardware concurrency. */
MDIM_API void mdim_set_threads(int n);

/* ---- configuration ------------------------------------------------------ */
MDIM_API mdim_status mdim_config_load(const char* path, mdim_config** out);
MDIM_API mdim_status mdim_config_parse(const char* json_text, mdim_config** out);
MDIM_API mdim_status mdim_config_set_seed(mdim_config* cfg, uint64_t seed);
MDIM_API mdim_status mdim_config_set_output_dir(mdim_config* cfg, const char* dir);
/* Output directory from the config (owned by cfg). */
MDIM_API const char* mdim_config_output_dir(const mdim_config* cfg);
MDIM_API void mdim_config_free(mdim_config* cfg);

/* ---- runs --------------------------------------------------------------- */
enum {
  MDIM_RUN_DIMENSIONS = 1u << 0,
  MDIM_RUN_CHECKS = 1u << 1
};

/* Dimension experiment and/or checks. `only_checks` is a comma-separated
   list of check names to keep, or NULL for all. */
MDIM_API mdim_status mdim_run_experiment(const mdim_config* cfg, unsigned flags,
                                         const char* only_checks, mdim_result** out);
MDIM_API mdim_status mdim_run_simulate(const mdim_config* cfg, int dump_paths,
                                       mdim_result** out);
MDIM_API mdim_status mdim_run_cover(const mdim_config* cfg, mdim_result** out);

/* 1 if every dimension comparison and check passed, else 0. */
MDIM_API int mdim_result_passed(const mdim_result* res);
/* Report JSON without timestamp (owned by res). */
MDIM_API const char* mdim_result_json(const mdim_result* res);
/* Writes report.json, artifacts and manifest.json under dir. */
MDIM_API mdim_status mdim_result_write(const mdim_result* res, const mdim_config* cfg,
                                       const char* dir);
MDIM_API void mdim_result_free(mdim_result* res);

/* ---- processes and paths ------------------------------------------------ */
MDIM_API mdim_status mdim_process_from_json(const char* json_text, mdim_process** out);
MDIM_API int mdim_process_dim(const mdim_process* p);
MDIM_API double mdim_process_natural_index(const mdim_process* p);
MDIM_API void mdim_process_free(mdim_process* p);

/* Levy exponent psi(xi), E e^{i<xi,X_t>} = e^{-t psi}; xi has dim entries. */
MDIM_API mdim_status mdim_levy_exponent(const mdim_process* p, const double* xi,
                                        double* re, double* im);

/* Path on t = i T / n_steps from x0 (dim entries, NULL for the origin). */
MDIM_API mdim_status mdim_simulate(const mdim_process* p, const double* x0, double T,
                                   uint64_t n_steps, uint64_t seed, uint64_t stream,
                                   mdim_path** out);
MDIM_API size_t mdim_path_points(const mdim_path* path);
MDIM_API int mdim_path_dim(const mdim_path* path);
MDIM_API double mdim_path_dt(const mdim_path* path);
/* Row-major (points x dim) values owned by the path. */
MDIM_API const double* mdim_path_values(const mdim_path* path);
MDIM_API void mdim_path_free(mdim_path* path);

/* ---- estimators --------------------------------------------------------- */
/* Box-counting slope of n points (row-major, dim columns) over a strictly
   decreasing ladder, dropping drop_coarse/drop_fine scales; the CI is a
   bootstrap over scale points. saturated is set to 0/1. */
MDIM_API mdim_status mdim_box_dimension(const double* points, size_t n, int dim,
                                        const double* ladder, size_t n_ladder,
                                        int drop_coarse, int drop_fine, double* slope,
                                        double* lo, double* hi, int* saturated);
MDIM_API double mdim_hawkes_inverse_image_dimension(double rho, double dim_e);

#ifdef __cplusplus
}
#endif

#endif /* MDIM_MDIM_H */
