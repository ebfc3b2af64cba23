/* homlab: homogenisation and paracontrolled gPAM experiments, C interface. */
#ifndef HOMLAB_H
#define HOMLAB_H

#include <stddef.h>

#if defined(_WIN32)
#define HL_API __declspec(dllexport)
#else
#define HL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hl_status {
    HL_OK = 0,
    HL_ERR_INVALID_ARGUMENT = 1,
    HL_ERR_CONFIG = 2,
    HL_ERR_SOLVER = 3,
    HL_ERR_IO = 4,
    HL_ERR_INTERNAL = 5
} hl_status;

typedef struct hl_config hl_config;
typedef struct hl_result hl_result;
typedef struct hl_field hl_field;

HL_API const char* hl_version(void);

/* Message of the last failing call on this thread; empty when none. */
HL_API const char* hl_last_error(void);
HL_API const char* hl_status_name(hl_status s);

/* Configuration. Setters record parse problems instead of failing, so that
 * hl_config_problem_count reports everything at once. */
HL_API hl_status hl_config_create(hl_config** out);
HL_API void hl_config_destroy(hl_config* cfg);
HL_API hl_status hl_config_set(hl_config* cfg, const char* key, const char* value);
HL_API hl_status hl_config_load_file(hl_config* cfg, const char* path);
HL_API hl_status hl_config_load_text(hl_config* cfg, const char* text);
HL_API hl_status hl_config_problem_count(const hl_config* cfg, size_t* count);
/* Borrowed string, valid until the next call on cfg. */
HL_API const char* hl_config_problem(const hl_config* cfg, size_t index);
/* Key = value echo of the effective configuration. Borrowed. */
HL_API const char* hl_config_echo(const hl_config* cfg);

HL_API int hl_command_known(const char* command);

/* Runs a subcommand. Fails with HL_ERR_CONFIG if the configuration has any
 * problem; no compute starts in that case. */
HL_API hl_status hl_run(const char* command, const hl_config* cfg, hl_result** out);
HL_API void hl_result_destroy(hl_result* res);

/* Writes every output into the configured directory. */
HL_API hl_status hl_result_emit(const hl_result* res, const hl_config* cfg, size_t* files_written);
/* Borrowed JSON text of the run summary, valid until hl_result_destroy. */
HL_API const char* hl_result_summary(const hl_result* res);
HL_API size_t hl_result_table_count(const hl_result* res);
HL_API const char* hl_result_table_name(const hl_result* res, size_t index);
HL_API const char* hl_result_table_csv(const hl_result* res, size_t index);
HL_API size_t hl_result_fit_count(const hl_result* res);
/* Fit JSON {component, theta_hat, r_squared, ...}. Borrowed. */
HL_API const char* hl_result_fit_json(const hl_result* res, size_t index);

/* Binary field files. */
HL_API hl_status hl_field_read(const char* path, hl_field** out);
HL_API void hl_field_destroy(hl_field* f);
HL_API hl_status hl_field_shape(const hl_field* f, int* n, int* components, size_t* frames);
HL_API const double* hl_field_values(const hl_field* f, size_t* count);
HL_API const double* hl_field_times(const hl_field* f, size_t* count);

/* Homogenised matrix of a cell coefficient ("identity", "laminate", "trig"),
 * row-major into abar[4]. */
HL_API hl_status hl_homogenised_matrix(const char* coefficient, double base, double amplitude, double skew, int cell_n,
                                       double abar[4]);

#ifdef __cplusplus
}
#endif

#endif
