#ifndef INTEGRULE_H
#define INTEGRULE_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(INTEGRULE_BUILDING_LIBRARY)
#    define INTEGRULE_API __declspec(dllexport)
#  else
#    define INTEGRULE_API __declspec(dllimport)
#  endif
#else
#  define INTEGRULE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum integrule_status {
  INTEGRULE_OK = 0,
  INTEGRULE_INVALID_ARGUMENT,
  INTEGRULE_INVALID_EXPRESSION,
  INTEGRULE_PARSE_ERROR,
  INTEGRULE_EVAL_OVERFLOW,
  INTEGRULE_DEGENERATE,
  INTEGRULE_CONFIG_ERROR,
  INTEGRULE_GRID_MISMATCH,
  INTEGRULE_FIT_FAILURE,
  INTEGRULE_REGRESSION_ERROR,
  INTEGRULE_AMBIGUOUS_FORM,
  INTEGRULE_INSUFFICIENT_DATA,
  INTEGRULE_NO_RULE,
  INTEGRULE_IO_ERROR,
  INTEGRULE_BUFFER_TOO_SMALL,
  INTEGRULE_INTERNAL_ERROR
} integrule_status;

/* Source families, in the order used by integrule_pipeline_summary. */
typedef enum integrule_family {
  INTEGRULE_FAMILY_POLY = 0,
  INTEGRULE_FAMILY_SIN = 1,
  INTEGRULE_FAMILY_COS = 2,
  INTEGRULE_FAMILY_EXP = 3
} integrule_family;

typedef struct integrule_config integrule_config;
typedef struct integrule_expr integrule_expr;

typedef struct integrule_pipeline_summary {
  size_t total[4];
  size_t accepted[4];
  size_t fit_failure;
  size_t exceeds_epsilon;
  size_t eval_overflow;
} integrule_pipeline_summary;

INTEGRULE_API const char* integrule_version(void);
INTEGRULE_API const char* integrule_status_string(integrule_status status);
/* Message of the last failed call on this thread; "" if none. */
INTEGRULE_API const char* integrule_last_error_message(void);

/* Text outputs follow one convention: `len` receives the length without the
   terminating NUL; if `cap` is too small the call returns
   INTEGRULE_BUFFER_TOO_SMALL and writes nothing. `buf` may be NULL when
   `cap` is 0. */

INTEGRULE_API integrule_status integrule_config_create(integrule_config** out);
INTEGRULE_API void integrule_config_destroy(integrule_config* cfg);
INTEGRULE_API integrule_status integrule_config_load_file(integrule_config* cfg, const char* path);
INTEGRULE_API integrule_status integrule_config_merge_json(integrule_config* cfg, const char* json_text);
/* Applies the output directory environment override. */
INTEGRULE_API integrule_status integrule_config_apply_env(integrule_config* cfg);
INTEGRULE_API integrule_status integrule_config_validate(const integrule_config* cfg);
INTEGRULE_API integrule_status integrule_config_to_json(const integrule_config* cfg, char* buf, size_t cap,
                                                        size_t* len);
INTEGRULE_API integrule_status integrule_config_output_path(const integrule_config* cfg, const char* name,
                                                            char* buf, size_t cap, size_t* len);

INTEGRULE_API integrule_status integrule_expr_parse(const char* text, integrule_expr** out);
INTEGRULE_API void integrule_expr_destroy(integrule_expr* e);
INTEGRULE_API integrule_status integrule_expr_evaluate(const integrule_expr* e, double x, double* out);
INTEGRULE_API integrule_status integrule_expr_serialize(const integrule_expr* e, char* buf, size_t cap,
                                                        size_t* len);

/* Integrates `f_text` numerically and fits a closed form. Writes the rounded
   fit to buf and its relative error to rel_error (either may be NULL). */
INTEGRULE_API integrule_status integrule_integrate(const integrule_config* cfg, const char* f_text, char* buf,
                                                   size_t cap, size_t* len, double* rel_error);

INTEGRULE_API integrule_status integrule_run_gen(const integrule_config* cfg, const char* dataset_path,
                                                 size_t* records);
INTEGRULE_API integrule_status integrule_run_pipeline(const integrule_config* cfg, const char* dataset_path,
                                                      const char* pairs_path, const char* rejected_path,
                                                      integrule_pipeline_summary* summary);
/* `family` is "poly", "sin", "cos" or "exp". */
INTEGRULE_API integrule_status integrule_run_discover(const integrule_config* cfg, const char* pairs_path,
                                                      const char* family, const char* json_path,
                                                      const char* text_path);
INTEGRULE_API integrule_status integrule_run_export_training(const char* pairs_path, const char* corpus_path,
                                                             size_t* lines);
/* Text rendering of a saved JSON report. */
INTEGRULE_API integrule_status integrule_render_report(const char* json_path, char* buf, size_t cap,
                                                       size_t* len);
/* One-line per-family retention summary. */
INTEGRULE_API integrule_status integrule_summary_line(const integrule_pipeline_summary* summary, char* buf,
                                                      size_t cap, size_t* len);

#ifdef __cplusplus
}
#endif

#endif /* INTEGRULE_H */
