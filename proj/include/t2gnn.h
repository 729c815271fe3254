#ifndef T2GNN_H
#define T2GNN_H

#if defined(_WIN32)
#  if defined(T2GNN_BUILDING)
#    define T2GNN_API __declspec(dllexport)
#  else
#    define T2GNN_API __declspec(dllimport)
#  endif
#else
#  define T2GNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum t2gnn_status {
  T2GNN_OK = 0,
  T2GNN_ERR_RUNTIME = 1, /* data, numeric, or I/O failure */
  T2GNN_ERR_CONFIG = 2   /* invalid configuration or arguments */
} t2gnn_status;

enum { T2GNN_LOG_INFO = 0, T2GNN_LOG_WARNING = 1 };

typedef struct t2gnn_experiment t2gnn_experiment;

typedef void (*t2gnn_log_fn)(int level, const char* message, void* user);

T2GNN_API const char* t2gnn_version(void);

/* Message of the last failed call on this thread; "" if none. */
T2GNN_API const char* t2gnn_last_error(void);

/* Releases any string returned through a char** out-parameter. */
T2GNN_API void t2gnn_string_free(char* s);

/* Both constructors apply T2GNN_DATA_ROOT. */
T2GNN_API t2gnn_status t2gnn_experiment_load(const char* config_path, t2gnn_experiment** out);
T2GNN_API t2gnn_status t2gnn_experiment_from_json(const char* config_json, t2gnn_experiment** out);
T2GNN_API void t2gnn_experiment_destroy(t2gnn_experiment* exp);

/* Dotted-key override such as "distill.lambda", "0.3". */
T2GNN_API t2gnn_status t2gnn_experiment_set(t2gnn_experiment* exp, const char* key, const char* value);
T2GNN_API t2gnn_status t2gnn_experiment_validate(const t2gnn_experiment* exp);
T2GNN_API t2gnn_status t2gnn_experiment_config_json(const t2gnn_experiment* exp, char** out);
T2GNN_API void t2gnn_experiment_set_logger(t2gnn_experiment* exp, t2gnn_log_fn fn, void* user);

/* Any out-parameter may be NULL. */
T2GNN_API t2gnn_status t2gnn_experiment_run(t2gnn_experiment* exp, char** result_json, char** table_text);
T2GNN_API t2gnn_status t2gnn_experiment_sweep(t2gnn_experiment* exp, char** summary_json);
T2GNN_API t2gnn_status t2gnn_experiment_ablate(t2gnn_experiment* exp, int with_baselines, char** summary_json);
T2GNN_API t2gnn_status t2gnn_experiment_write_mask_bundle(t2gnn_experiment* exp, char** path_out);
T2GNN_API t2gnn_status t2gnn_experiment_write_enhanced_adjacency(t2gnn_experiment* exp, char** path_out);

/* Table over every result.json under results_dir. The CSV goes to csv_path
   unless it is NULL. */
T2GNN_API t2gnn_status t2gnn_report(const char* results_dir, const char* csv_path, char** text_out);

#ifdef __cplusplus
}
#endif

#endif
