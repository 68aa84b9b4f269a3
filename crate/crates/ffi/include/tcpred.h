#ifndef TCPRED_H
#define TCPRED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Number of complexity classes; the length of probability arrays.
 */
#define TCPRED_NUM_CLASSES 7

/*
 Complexity classes in dominance order. Also the index into probability
 arrays.
 */
typedef enum TcpredClass {
  TCPRED_CLASS_CONSTANT = 0,
  TCPRED_CLASS_LOGN = 1,
  TCPRED_CLASS_LINEAR = 2,
  TCPRED_CLASS_NLOGN = 3,
  TCPRED_CLASS_QUADRATIC = 4,
  TCPRED_CLASS_CUBIC = 5,
  TCPRED_CLASS_EXPONENTIAL = 6,
} TcpredClass;

typedef enum TcpredLanguage {
  TCPRED_LANGUAGE_PYTHON = 0,
  TCPRED_LANGUAGE_JAVA = 1,
} TcpredLanguage;

/*
 Result of every fallible call.
 */
typedef enum TcpredStatus {
  TCPRED_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  TCPRED_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not valid UTF-8.
   */
  TCPRED_STATUS_INVALID_UTF8 = 2,
  /*
   An enum value or count was out of range.
   */
  TCPRED_STATUS_INVALID_ARGUMENT = 3,
  /*
   The snippet could not be parsed.
   */
  TCPRED_STATUS_ANALYSIS_UNAVAILABLE = 4,
  /*
   The snippet has no loop that can be converted.
   */
  TCPRED_STATUS_UNSUPPORTED_LOOP_FORM = 5,
  /*
   Fitting or prediction failed.
   */
  TCPRED_STATUS_CLASSIFIER_ERROR = 6,
  /*
   A model file could not be read or written.
   */
  TCPRED_STATUS_IO = 7,
  /*
   The library panicked. The handle involved should be discarded.
   */
  TCPRED_STATUS_INTERNAL = 8,
} TcpredStatus;

/*
 Opaque analyzer verdict.
 */
typedef struct TcpredAnalysis TcpredAnalysis;

/*
 Opaque built-in classifier.
 */
typedef struct TcpredModel TcpredModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 The message of the most recent failure on this thread, or NULL. Valid
 until the next failing call on the same thread. Do not free it.
 */
const char *tcpred_last_error(void);

/*
 Library version as a static string.
 */
const char *tcpred_version(void);

/*
 Lowercase name of a class ("nlogn", ...), or NULL for an invalid value.
 The string is static.
 */
const char *tcpred_class_name(enum TcpredClass class_);

/*
 Releases a string returned by this library.

 # Safety
 `s` must be NULL or a string obtained from this library, not yet freed.
 */
void tcpred_string_free(char *s);

/*
 Runs the symbolic analyzer on `source`.

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
enum TcpredStatus tcpred_analyze(const char *source,
                                 enum TcpredLanguage language,
                                 struct TcpredAnalysis **out);

/*
 The class of an analysis.

 # Safety
 `analysis` must be a live handle.
 */
enum TcpredClass tcpred_analysis_class(const struct TcpredAnalysis *analysis);

/*
 Number of lines in the derivation trace.

 # Safety
 `analysis` must be a live handle.
 */
size_t tcpred_analysis_trace_len(const struct TcpredAnalysis *analysis);

/*
 Line `i` of the derivation trace, or NULL when out of range. Owned by
 the handle.

 # Safety
 `analysis` must be a live handle.
 */
const char *tcpred_analysis_trace_line(const struct TcpredAnalysis *analysis, size_t i);

/*
 # Safety
 `analysis` must be NULL or a live handle.
 */
void tcpred_analysis_free(struct TcpredAnalysis *analysis);

/*
 Rewrites the snippet's loops between `for` and `while` form. On success
 `*out_code` receives the converted program.

 # Safety
 `source` must be a NUL-terminated string; `out_code` must be writable.
 */
enum TcpredStatus tcpred_loop_convert(const char *source,
                                      enum TcpredLanguage language,
                                      char **out_code);

/*
 Creates an unfitted model over `n_classes` classes with default
 hyperparameters. `n_classes == 0` selects all seven classes.

 # Safety
 `classes` must point to `n_classes` values (or be NULL when zero); `out`
 must be writable.
 */
enum TcpredStatus tcpred_model_new(const enum TcpredClass *classes,
                                   size_t n_classes,
                                   struct TcpredModel **out);

/*
 Fits the model on `n` examples given as parallel arrays.

 # Safety
 `model` must be a live handle; each array must hold `n` valid entries.
 */
enum TcpredStatus tcpred_model_fit(struct TcpredModel *model,
                                   const char *const *sources,
                                   const enum TcpredLanguage *languages,
                                   const enum TcpredClass *labels,
                                   size_t n,
                                   uint64_t seed);

/*
 Predicts one snippet. `out_probs` receives `TCPRED_NUM_CLASSES` values
 indexed by class, zero for classes outside the model's set. `out_class`
 may be NULL.

 # Safety
 `model` must be a live handle; `out_probs` must have room for seven
 doubles.
 */
enum TcpredStatus tcpred_model_predict(const struct TcpredModel *model,
                                       const char *source,
                                       enum TcpredLanguage language,
                                       double *out_probs,
                                       enum TcpredClass *out_class);

/*
 Writes the model to `path` as JSON.

 # Safety
 `model` must be a live handle; `path` a NUL-terminated string.
 */
enum TcpredStatus tcpred_model_save(const struct TcpredModel *model, const char *path);

/*
 Reads a model written by `tcpred_model_save` or `tcpred train`.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TcpredStatus tcpred_model_load(const char *path, struct TcpredModel **out);

/*
 # Safety
 `model` must be NULL or a live handle.
 */
void tcpred_model_free(struct TcpredModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TCPRED_H */
