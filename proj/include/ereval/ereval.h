/* C interface to the ereval entity-resolution evaluation library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns an ereval_status; on failure a message for the
 * calling thread is available from ereval_last_error() until the next call.
 * Strings returned through `char**` are heap-allocated and released with
 * ereval_string_free(). Structured results are UTF-8 JSON documents carrying
 * a top-level "v": 1.
 */
#ifndef EREVAL_EREVAL_H
#define EREVAL_EREVAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(EREVAL_BUILDING_LIBRARY)
#define EREVAL_API __attribute__((visibility("default")))
#else
#define EREVAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ereval_status {
  EREVAL_OK = 0,
  EREVAL_E_INVALID = 1,    /* malformed input or arguments */
  EREVAL_E_NOT_FOUND = 2,  /* unknown record, cluster, session or task */
  EREVAL_E_CONFLICT = 3,   /* lease held by someone else, overlapping export */
  EREVAL_E_QC = 4,         /* hard quality-control violation */
  EREVAL_E_DEGENERATE = 5, /* estimator undefined (k < 2, zero denominator) */
  EREVAL_E_IO = 6,         /* file system failure */
  EREVAL_E_INTERNAL = 7
} ereval_status;

typedef struct ereval_clustering ereval_clustering;
typedef struct ereval_attributes ereval_attributes;
typedef struct ereval_sample ereval_sample;
typedef struct ereval_error_table ereval_error_table;
typedef struct ereval_store ereval_store;
typedef struct ereval_service ereval_service;

EREVAL_API const char* ereval_version(void);
EREVAL_API const char* ereval_last_error(void);
EREVAL_API void ereval_string_free(char* s);

/* Clusterings: membership CSV with header record_id,cluster_id. */
EREVAL_API int ereval_clustering_load(const char* path, ereval_clustering** out);
EREVAL_API int ereval_clustering_parse(const char* csv, size_t len, ereval_clustering** out);
EREVAL_API int ereval_clustering_save(const ereval_clustering* c, const char* path);
EREVAL_API int ereval_clustering_counts(const ereval_clustering* c, size_t* records, size_t* clusters);
EREVAL_API void ereval_clustering_free(ereval_clustering* c);

/* Attribute tables: CSV with header record_id,label[,attr...]. */
EREVAL_API int ereval_attributes_load(const char* path, ereval_attributes** out);
EREVAL_API int ereval_attributes_save(const ereval_attributes* a, const char* path);
EREVAL_API void ereval_attributes_free(ereval_attributes* a);

/* Summary statistics of a clustering. `attrs` may be NULL (no homonymy or
 * name variation). `grid` of length 0 selects the default Hill grid; use
 * INFINITY for the q -> infinity order. */
EREVAL_API int ereval_summary_json(const ereval_clustering* c, const ereval_attributes* attrs, const double* grid,
                                   size_t grid_len, char** out_json);

/* Samples of ground-truth clusters. `design` is pps_record, uniform_cluster
 * or expected_error; the latter needs `match_probabilities` (CSV path,
 * record_a,record_b,p), otherwise NULL. */
EREVAL_API int ereval_sample_draw(const ereval_clustering* truth, const char* design, size_t k, uint64_t seed,
                                  const char* match_probabilities, ereval_sample** out);
/* Benchmark JSON lines (one object per draw). */
EREVAL_API int ereval_sample_load(const char* path, ereval_sample** out);
EREVAL_API int ereval_sample_parse(const char* jsonl, size_t len, ereval_sample** out);
EREVAL_API int ereval_sample_save(const ereval_sample* s, const char* path);
EREVAL_API int ereval_sample_jsonl(const ereval_sample* s, char** out_jsonl);
EREVAL_API int ereval_sample_size(const ereval_sample* s, size_t* draws);
EREVAL_API void ereval_sample_free(ereval_sample* s);

/* Error tables: one row of averaged record-wise errors per draw. */
EREVAL_API int ereval_error_table_build(const ereval_sample* s, const ereval_clustering* prediction,
                                        ereval_error_table** out);
EREVAL_API int ereval_error_table_census(const ereval_clustering* truth, const ereval_clustering* prediction,
                                         ereval_error_table** out);
EREVAL_API int ereval_error_table_load(const char* path, ereval_error_table** out);
EREVAL_API int ereval_error_table_save(const ereval_error_table* t, const char* path);
EREVAL_API int ereval_error_table_rows(const ereval_error_table* t, size_t* rows);
EREVAL_API void ereval_error_table_free(ereval_error_table* t);

/* Estimates. `metrics` is a comma-separated list or "all". */
EREVAL_API int ereval_estimate_json(const ereval_sample* s, const ereval_clustering* prediction, const char* metrics,
                                    double beta, int clamp, char** out_json);
/* From a stored error table; the prediction's record and cluster counts are
 * needed by cluster precision, cluster F and homogeneity (0 if unknown). */
EREVAL_API int ereval_estimate_table_json(const ereval_error_table* t, const char* metrics, double beta, int clamp,
                                          size_t universe_size, size_t pred_clusters, const char* design,
                                          char** out_json);
/* Ratio estimates of ground-truth summary statistics from a sample. */
EREVAL_API int ereval_summary_estimate_json(const ereval_sample* s, const char* statistics,
                                            const ereval_attributes* attrs, char** out_json);
/* Exact metric values when the full truth is known. */
EREVAL_API int ereval_oracle_json(const ereval_clustering* truth, const ereval_clustering* prediction, double beta,
                                  char** out_json);

/* Synthetic populations and the all-but-one reference matcher. */
EREVAL_API int ereval_generate_population(const char* config_json, ereval_clustering** truth,
                                          ereval_attributes** attrs);
EREVAL_API int ereval_load_rldata(const char* path, ereval_clustering** truth, ereval_attributes** attrs);
EREVAL_API int ereval_match_all_but_one(const ereval_attributes* attrs, int exact, ereval_clustering** out);

/* Monte-Carlo study. config_json keys: designs, sizes, reps, metrics, seed,
 * beta, threads, checkpoint. `out_csv` may be NULL. */
EREVAL_API int ereval_simulate(const ereval_clustering* truth, const ereval_clustering* prediction,
                               const char* config_json, char** out_json, char** out_csv);

/* Quality control of externally produced labels (JSON lines of
 * {seed_record, removed, added}). `attrs` may be NULL. */
EREVAL_API int ereval_qc_labels_json(const char* labels_path, const ereval_clustering* prediction,
                                     const ereval_attributes* attrs, int token_rule, char** out_json);

/* Inverse-probability-weighted frequencies of audit tags (CSV file). */
EREVAL_API int ereval_audit_report_json(const char* tags_path, char** out_json);

/* Top `limit` records for a token query with one-edit tolerance. */
EREVAL_API int ereval_search_json(const ereval_attributes* attrs, const char* query, size_t limit, char** out_json);

/* Journal-backed labeling sessions. */
EREVAL_API int ereval_store_open(const char* directory, ereval_store** out);
EREVAL_API void ereval_store_free(ereval_store* store);
/* params_json: {id, design, k, seed, labeler, now}; expected_error also
 * needs "match_probabilities": path. */
EREVAL_API int ereval_session_create(ereval_store* store, const ereval_clustering* prediction,
                                     const char* params_json, char** out_state_json);
/* One mutation, journaled. op_json: {"op": "begin"|"release"|"edit"|
 * "finalize"|"tag", "task", "labeler", "now", ...}; edits carry "edit"
 * (add|remove|restore|retract) and "record"; tags carry "cluster_id",
 * "direction", "label", "note". `prediction` and `attrs` may be NULL. */
EREVAL_API int ereval_session_apply(ereval_store* store, const char* session_id, const char* op_json,
                                    const ereval_clustering* prediction, const ereval_attributes* attrs,
                                    char** out_event_json);
EREVAL_API int ereval_session_state(ereval_store* store, const char* session_id, char** out_state_json);
EREVAL_API int ereval_session_qc_json(ereval_store* store, const char* session_id, const ereval_attributes* attrs,
                                      char** out_json);
EREVAL_API int ereval_session_export(ereval_store* store, const char* session_id, char** out_jsonl);
EREVAL_API int ereval_session_audit_json(ereval_store* store, const char* session_id, char** out_json);
/* State rebuilt from the journal alone. */
EREVAL_API int ereval_journal_replay(const char* journal_path, char** out_state_json);

/* HTTP service. config_json: {prediction, attributes, truth,
 * match_probabilities, journal, static, host, port, token, lease_seconds}.
 * ereval_serve blocks; start/stop run it on a background thread. */
EREVAL_API int ereval_serve(const char* config_json);
EREVAL_API int ereval_service_start(const char* config_json, ereval_service** out, int* port);
EREVAL_API void ereval_service_stop(ereval_service* service);

#ifdef __cplusplus
}
#endif

#endif /* EREVAL_EREVAL_H */
