#ifndef SLANGCHOICE_H
#define SLANGCHOICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_UTF8 = 2,
  SC_STATUS_CONFIG = 3,
  SC_STATUS_DATA = 4,
  SC_STATUS_IO = 5,
  SC_STATUS_NUMERICAL = 6,
  SC_STATUS_BUFFER_TOO_SMALL = 7,
  SC_STATUS_OUT_OF_RANGE = 8,
  SC_STATUS_PANIC = 9,
} ScStatus;

/**
 * A filtered lexicon read from `lexicon.jsonl`.
 */
typedef struct ScLexicon ScLexicon;

/**
 * A fitted model together with the resources it scores against.
 */
typedef struct ScModel ScModel;

/**
 * Vectors in the `dim <d> count <n>` text format.
 */
typedef struct ScStore ScStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *sc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sc_version(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ScStatus sc_lexicon_read(const char *path, struct ScLexicon **out);

/**
 * # Safety
 * `lex` must come from [`sc_lexicon_read`] and not be used afterwards.
 */
void sc_lexicon_free(struct ScLexicon *lex);

/**
 * Number of candidate words.
 *
 * # Safety
 * `lex` must be a live handle and `out` a valid pointer.
 */
enum ScStatus sc_lexicon_vocabulary_len(const struct ScLexicon *lex, size_t *out);

/**
 * Number of slang senses.
 *
 * # Safety
 * `lex` must be a live handle and `out` a valid pointer.
 */
enum ScStatus sc_lexicon_slang_len(const struct ScLexicon *lex, size_t *out);

/**
 * Copies candidate word `i` into `buf`.
 *
 * # Safety
 * `lex` must be a live handle; `buf` must hold `cap` bytes; `needed` may
 * be null.
 */
enum ScStatus sc_lexicon_word(const struct ScLexicon *lex,
                              size_t i,
                              char *buf,
                              size_t cap,
                              size_t *needed);

/**
 * Copies the id of slang sense `i` into `buf`.
 *
 * # Safety
 * As for [`sc_lexicon_word`].
 */
enum ScStatus sc_lexicon_slang_id(const struct ScLexicon *lex,
                                  size_t i,
                                  char *buf,
                                  size_t cap,
                                  size_t *needed);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ScStatus sc_store_read(const char *path, struct ScStore **out);

/**
 * # Safety
 * `store` must come from [`sc_store_read`] and not be used afterwards.
 */
void sc_store_free(struct ScStore *store);

/**
 * Vector dimension and number of rows.
 *
 * # Safety
 * `store` must be a live handle; `dim` and `len` valid pointers.
 */
enum ScStatus sc_store_shape(const struct ScStore *store, size_t *dim, size_t *len);

/**
 * Copies the vector stored under `id` into `out`, which must hold
 * `cap >= dim` values.
 *
 * # Safety
 * `store` must be a live handle, `id` NUL-terminated, `out` valid for
 * `cap` doubles.
 */
enum ScStatus sc_store_get(const struct ScStore *store, const char *id, double *out, size_t cap);

/**
 * Opens model `spec` (for example `cse:proto+cf@ssp`) from a finished
 * run. `config_path` null selects the built-in synthetic configuration;
 * `output_dir`, when not null, overrides the configured output directory.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be valid.
 */
enum ScStatus sc_model_open(const char *config_path,
                            const char *output_dir,
                            const char *spec,
                            struct ScModel **out);

/**
 * # Safety
 * `model` must come from [`sc_model_open`] and not be used afterwards.
 */
void sc_model_free(struct ScModel *model);

/**
 * Number of candidate words, which is the length of every posterior.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum ScStatus sc_model_vocabulary_len(const struct ScModel *model, size_t *out);

/**
 * Copies candidate word `i` into `buf`.
 *
 * # Safety
 * As for [`sc_lexicon_word`].
 */
enum ScStatus sc_model_word(const struct ScModel *model,
                            size_t i,
                            char *buf,
                            size_t cap,
                            size_t *needed);

/**
 * Fitted kernel widths.
 *
 * # Safety
 * `model` must be a live handle; `h_s` and `h_cf` valid pointers.
 */
enum ScStatus sc_model_kernels(const struct ScModel *model, double *h_s, double *h_cf);

/**
 * Posterior over the candidate words for slang sense `sense_id`, written
 * in vocabulary order into `probs`, which must hold the vocabulary size.
 *
 * # Safety
 * `model` must be a live handle, `sense_id` NUL-terminated and `probs`
 * valid for `cap` doubles.
 */
enum ScStatus sc_model_posterior(const struct ScModel *model,
                                 const char *sense_id,
                                 double *probs,
                                 size_t cap);

/**
 * AUC in percent of `n` one-based ranks over a vocabulary of `vocab_size`.
 *
 * # Safety
 * `ranks` must be valid for `n` values and `out` a valid pointer.
 */
enum ScStatus sc_auc(const size_t *ranks, size_t n, size_t vocab_size, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLANGCHOICE_H */
