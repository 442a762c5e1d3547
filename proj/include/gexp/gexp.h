/* C interface to the gexp library. All handles are opaque; every call that
 * can fail returns a gexp_status and leaves a message for gexp_last_error(). */
#ifndef GEXP_GEXP_H
#define GEXP_GEXP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(GEXP_BUILDING)
#define GEXP_API __attribute__((visibility("default")))
#else
#define GEXP_API
#endif

typedef struct gexp_instance gexp_instance;
typedef struct gexp_result gexp_result;

typedef enum gexp_status {
  GEXP_OK = 0,
  GEXP_PARSE = 1,
  GEXP_INVALID_ARGUMENT = 2,
  GEXP_DEGENERATE_SET = 3,
  GEXP_DEGENERATE_DOMAIN = 4,
  GEXP_NOT_UNITAL = 5,
  GEXP_NOT_SYMMETRIC = 6,
  GEXP_INVALID_RANGE = 7,
  GEXP_MISSING_LEVEL = 8,
  GEXP_OUTSIDE_FAMILY = 9,
  GEXP_NUMERICAL_FAILURE = 10,
  GEXP_NOT_NORMALIZED = 11,
  GEXP_HAS_ZERO_SET = 12,
  GEXP_INSUFFICIENT_INSTRUMENTS = 13,
  GEXP_WINDOW_EXCEEDED = 14,
  GEXP_INVALID_PATH = 15,
  GEXP_INVARIANT_VIOLATION = 16,
  GEXP_IO = 17,
  GEXP_INTERNAL = 18
} gexp_status;

typedef enum gexp_verdict { GEXP_PROVEN = 0, GEXP_REFUTED = 1, GEXP_UNKNOWN = 2 } gexp_verdict;

GEXP_API const char* gexp_version(void);
GEXP_API const char* gexp_status_name(gexp_status status);
/* Message of the last failed call on this thread; "" if none. */
GEXP_API const char* gexp_last_error(void);

/* gpd/1 file on disk. */
GEXP_API gexp_status gexp_instance_load(const char* path, gexp_instance** out);
/* gpd/1 document as text. */
GEXP_API gexp_status gexp_instance_from_json(const char* text, gexp_instance** out);
/* Factory spec as JSON text (gpd object, file, pair, action, family, example). */
GEXP_API gexp_status gexp_instance_from_spec(const char* text, gexp_instance** out);
/* Built-in instance by name: pair-cycle, pair-complete, pair-path, action-zn, pendant. */
GEXP_API gexp_status gexp_instance_example(const char* name, size_t n, gexp_instance** out);
GEXP_API size_t gexp_instance_atoms(const gexp_instance* inst);
GEXP_API size_t gexp_instance_elements(const gexp_instance* inst);
/* gpd/1 text; release with gexp_string_free. */
GEXP_API gexp_status gexp_instance_to_json(const gexp_instance* inst, char** out);
GEXP_API void gexp_instance_free(gexp_instance* inst);

/* Runs one command. `inst` may be NULL for graph617, family and verify;
 * `options` is a JSON object text or NULL. */
GEXP_API gexp_status gexp_run(const char* command, const gexp_instance* inst, const char* options,
                              gexp_result** out);
GEXP_API gexp_verdict gexp_result_verdict(const gexp_result* res);
/* Strings below are owned by the result. */
GEXP_API const char* gexp_result_certificate(const gexp_result* res);
GEXP_API const char* gexp_result_table(const gexp_result* res);
GEXP_API const char* gexp_result_csv(const gexp_result* res);
GEXP_API void gexp_result_free(gexp_result* res);

/* Writes through a temporary file and a rename. */
GEXP_API gexp_status gexp_write_file(const char* path, const char* data);
GEXP_API void gexp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
