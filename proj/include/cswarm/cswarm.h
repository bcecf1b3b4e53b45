#ifndef CSWARM_H
#define CSWARM_H

/* C interface to the Compton-camera swarm simulator.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every call returns a cswarm_status; on failure a
 * description is available from cswarm_last_error() on the same thread.
 * Strings returned through char** are heap-allocated and released with
 * cswarm_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CSWARM_BUILDING_LIBRARY)
#    define CSWARM_API __declspec(dllexport)
#  else
#    define CSWARM_API __declspec(dllimport)
#  endif
#else
#  define CSWARM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cswarm_status {
  CSWARM_OK = 0,
  CSWARM_ERR_INVALID_ARGUMENT = 1,
  CSWARM_ERR_CONFIG = 2,       /* config rejected; message names the field */
  CSWARM_ERR_IO = 3,
  CSWARM_ERR_PARSE = 4,        /* run log syntax; message carries the line */
  CSWARM_ERR_SCHEMA = 5,       /* run log schema name or version mismatch */
  CSWARM_ERR_RUN_FAILED = 6,   /* every Monte Carlo run failed */
  CSWARM_ERR_INTERNAL = 99
} cswarm_status;

typedef enum cswarm_truth_source {
  CSWARM_TRUTH_RECORDS = 0,
  CSWARM_TRUTH_SCRIPT = 1
} cswarm_truth_source;

typedef struct cswarm_config cswarm_config;
typedef struct cswarm_runlog cswarm_runlog;
typedef struct cswarm_batch cswarm_batch;

CSWARM_API const char* cswarm_version(void);
CSWARM_API const char* cswarm_last_error(void);
CSWARM_API void cswarm_string_free(char* s);

/* configuration */
CSWARM_API cswarm_status cswarm_config_load_file(const char* path, cswarm_config** out);
CSWARM_API cswarm_status cswarm_config_load_string(const char* json, cswarm_config** out);
CSWARM_API cswarm_status cswarm_config_to_json(const cswarm_config* cfg, char** out);
CSWARM_API void cswarm_config_free(cswarm_config* cfg);

/* single run */
CSWARM_API cswarm_status cswarm_run(const cswarm_config* cfg, uint64_t seed, cswarm_runlog** out);
CSWARM_API cswarm_status cswarm_runlog_load_file(const char* path, cswarm_runlog** out);
CSWARM_API cswarm_status cswarm_runlog_load_string(const char* jsonl, cswarm_runlog** out);
CSWARM_API cswarm_status cswarm_runlog_write_file(const cswarm_runlog* log, const char* path);
CSWARM_API cswarm_status cswarm_runlog_to_string(const cswarm_runlog* log, char** out);
CSWARM_API cswarm_status cswarm_runlog_record_count(const cswarm_runlog* log, size_t* out);
/* 1 when some agent reached the tracking stage */
CSWARM_API cswarm_status cswarm_runlog_initialized(const cswarm_runlog* log, int* out);
CSWARM_API cswarm_status cswarm_runlog_metrics_json(const cswarm_runlog* log,
                                                    cswarm_truth_source truth, char** out);
/* kind: "paths", "spacing", "speed" or "error" */
CSWARM_API cswarm_status cswarm_runlog_plotdata_csv(const cswarm_runlog* log, const char* kind,
                                                    char** out);
CSWARM_API void cswarm_runlog_free(cswarm_runlog* log);

/* Monte Carlo: seeds seed_base .. seed_base + runs - 1 on `jobs` threads.
 * Returns CSWARM_ERR_RUN_FAILED (with *out still set) if every run failed. */
CSWARM_API cswarm_status cswarm_montecarlo(const cswarm_config* cfg, int runs, uint64_t seed_base,
                                           int jobs, cswarm_batch** out);
CSWARM_API cswarm_status cswarm_batch_summary_csv(const cswarm_batch* batch, char** out);
CSWARM_API cswarm_status cswarm_batch_runs_csv(const cswarm_batch* batch, char** out);
CSWARM_API cswarm_status cswarm_batch_run_count(const cswarm_batch* batch, size_t* out);
CSWARM_API cswarm_status cswarm_batch_run_seed(const cswarm_batch* batch, size_t index,
                                               uint64_t* out);
/* *ok = 0 for a failed run; its metrics text is then null */
CSWARM_API cswarm_status cswarm_batch_run_metrics_json(const cswarm_batch* batch, size_t index,
                                                       int* ok, char** out);
CSWARM_API void cswarm_batch_free(cswarm_batch* batch);

#ifdef __cplusplus
}
#endif

#endif /* CSWARM_H */
