/* C interface to the cell-free massive MIMO simulator.
 *
 * Every function returns a cfm_status; on failure cfm_last_error() holds a
 * message for the calling thread. Handles are opaque and owned by the caller
 * once created; release them with the matching destroy function.
 */
#ifndef CFMIMO_H
#define CFMIMO_H

#include <stddef.h>
#include <stdint.h>

#if defined(CFMIMO_BUILDING_LIBRARY)
#define CFM_API __attribute__((visibility("default")))
#else
#define CFM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cfm_status {
  CFM_OK = 0,
  CFM_INVALID_ARGUMENT = 1,
  CFM_DOMAIN = 2,
  CFM_INFEASIBLE = 3,
  CFM_NUMERIC = 4,
  CFM_IO = 5,
  CFM_INTERNAL = 6
} cfm_status;

typedef struct cfm_config cfm_config;
typedef struct cfm_trial cfm_trial;

CFM_API const char* cfm_last_error(void);
CFM_API const char* cfm_status_string(cfm_status status);

/* Configuration. Field names match the JSON config keys. */
CFM_API cfm_status cfm_config_create(cfm_config** out);
CFM_API cfm_status cfm_config_load(const char* path, cfm_config** out);
CFM_API cfm_status cfm_config_clone(const cfm_config* cfg, cfm_config** out);
CFM_API void cfm_config_destroy(cfm_config* cfg);
/* value is parsed as JSON, e.g. "12", "1e-3" or "true". */
CFM_API cfm_status cfm_config_set(cfm_config* cfg, const char* name, const char* value);
/* Writes the JSON value of a field into buf (NUL terminated). *needed receives
 * the required size including the terminator; buf may be NULL to query it. */
CFM_API cfm_status cfm_config_get(const cfm_config* cfg, const char* name, char* buf,
                                  size_t len, size_t* needed);
CFM_API cfm_status cfm_config_dump(const cfm_config* cfg, char* buf, size_t len,
                                   size_t* needed);
CFM_API size_t cfm_config_field_count(void);
CFM_API const char* cfm_config_field_name(size_t index);
CFM_API cfm_status cfm_config_validate(const cfm_config* cfg);
CFM_API cfm_status cfm_config_hash(const cfm_config* cfg, uint64_t* out);

/* Experiments. Schemes are comma-separated, e.g. "heap_fd+zf_rd,rand_fd+zf_rd".
 * threads = 0 uses every hardware thread. */
CFM_API cfm_status cfm_nmse_sweep(const cfm_config* cfg, const int* ue_counts, size_t n_counts,
                                  const int* taus, size_t n_taus, const char* schemes,
                                  int trials, int threads, const char* out_path);
/* summary_path may be NULL. */
CFM_API cfm_status cfm_se_sweep(const cfm_config* cfg, const int* ue_counts, size_t n_counts,
                                const char* schemes, int trials, int threads,
                                const char* out_path, const char* summary_path);
CFM_API cfm_status cfm_service_map(const cfm_config* cfg, const char* scheme, uint64_t trial,
                                   const char* out_path);

/* A single pipeline run kept in memory. */
CFM_API cfm_status cfm_single_run(const cfm_config* cfg, const char* scheme, uint64_t trial,
                                  cfm_trial** out);
CFM_API void cfm_trial_destroy(cfm_trial* trial);
CFM_API int cfm_trial_feasible(const cfm_trial* trial);
CFM_API int cfm_trial_converged(const cfm_trial* trial);
CFM_API double cfm_trial_f_se_bits(const cfm_trial* trial);
CFM_API double cfm_trial_effective_se(const cfm_trial* trial);
CFM_API double cfm_trial_nmse_db(const cfm_trial* trial);
CFM_API int cfm_trial_sca_iterations(const cfm_trial* trial);
CFM_API const char* cfm_trial_message(const cfm_trial* trial);
/* Summary as one CSV row with a header. */
CFM_API cfm_status cfm_trial_write_summary(const cfm_trial* trial, const char* path);
/* iteration,objective_nats,max_constraint_residual,solver_newton_steps */
CFM_API cfm_status cfm_trial_write_trace(const cfm_trial* trial, const char* path);
/* type,i,j,distance_m,beta */
CFM_API cfm_status cfm_trial_write_links(const cfm_trial* trial, const char* path);
/* ue_index,pilot_index,beta_tilde,final_load for the DL and UL phases */
CFM_API cfm_status cfm_trial_write_assignment(const cfm_trial* trial, const char* path);
CFM_API cfm_status cfm_trial_write_service_map(const cfm_trial* trial, const char* path);

/* Heap pilot assignment on raw weights. initial_pilots (length min(n, tau))
 * may be NULL, in which case a permutation is drawn from seed. pilot_of
 * receives n entries and loads tau entries. */
CFM_API cfm_status cfm_assign_pilots_heap(const double* weights, size_t n, int tau,
                                          const int* initial_pilots, uint64_t seed,
                                          int* pilot_of, double* loads);

#ifdef __cplusplus
}
#endif

#endif /* CFMIMO_H */
