/* C interface for the seersc scoring and budget-allocation core. */

#ifndef SEERSC_H
#define SEERSC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code for every fallible call.
 */
typedef enum SeerscStatus {
  SeerscStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  SeerscStatus_NullArgument = 1,
  /**
   * An argument was out of range or otherwise unusable.
   */
  SeerscStatus_InvalidArgument = 2,
  /**
   * The input held no usable samples or values.
   */
  SeerscStatus_EmptyInput = 3,
  /**
   * A string argument was not valid UTF-8.
   */
  SeerscStatus_InvalidUtf8 = 4,
  /**
   * The computation itself failed.
   */
  SeerscStatus_ComputeFailed = 5,
} SeerscStatus;

/**
 * Budget tier for one problem.
 */
typedef enum SeerscTier {
  SeerscTier_Single = 1,
  SeerscTier_Half = 2,
  SeerscTier_Full = 3,
} SeerscTier;

/**
 * Opaque accumulator of probe samples.
 */
typedef struct SeerscSampleSet SeerscSampleSet;

/**
 * Outcome of a budget allocation over a sample set.
 */
typedef struct SeerscAllocation {
  double entropy_nats;
  double tau1;
  double tau2;
  enum SeerscTier tier;
  /**
   * Number of reasoning paths to draw.
   */
  uintptr_t samples;
} SeerscAllocation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create an empty sample set. Release with `seersc_sample_set_free`.
 */
struct SeerscSampleSet *seersc_sample_set_new(void);

/**
 * Destroy a sample set created by `seersc_sample_set_new`. Null is a
 * no-op.
 *
 * # Safety
 * `set` must be null or a pointer previously returned by
 * `seersc_sample_set_new` that has not been freed.
 */
void seersc_sample_set_free(struct SeerscSampleSet *set);

/**
 * Number of samples pushed so far; 0 for null.
 *
 * # Safety
 * `set` must be null or a live sample set pointer.
 */
uintptr_t seersc_sample_set_len(const struct SeerscSampleSet *set);

/**
 * Append one sample.
 *
 * `answer` may be null for a sample whose answer could not be extracted;
 * otherwise it is normalized before grouping. `logprobs` may be null for
 * a backend without log-probabilities (such samples weigh in with
 * confidence 1.0); when non-null, `logprob_count` must be at least 1 and
 * every value finite.
 *
 * # Safety
 * `set` must be a live sample set pointer; `answer` must be null or a
 * NUL-terminated string; `logprobs` must be null or valid for
 * `logprob_count` reads.
 */
enum SeerscStatus seersc_sample_set_push(struct SeerscSampleSet *set,
                                         const char *answer,
                                         const double *logprobs,
                                         uintptr_t logprob_count);

/**
 * Confidence-weighted entropy of the answer spread in nats.
 *
 * # Safety
 * `set` must be a live sample set pointer; `out_entropy` must be valid
 * for one write.
 */
enum SeerscStatus seersc_sample_set_entropy(const struct SeerscSampleSet *set, double *out_entropy);

/**
 * Plurality answer over the extractable samples, earliest pushed sample
 * breaking ties. `*out_answer` is null when no sample has an answer;
 * otherwise release it with `seersc_string_free`.
 *
 * # Safety
 * `set` must be a live sample set pointer; `out_answer` must be valid for
 * one write.
 */
enum SeerscStatus seersc_sample_set_majority(const struct SeerscSampleSet *set, char **out_answer);

/**
 * Entropy, thresholds, and budget tier for this probe, treating the set
 * size as the probe size M and using the default threshold fractions.
 * `budget_n` is the full reasoning budget N.
 *
 * # Safety
 * `set` must be a live sample set pointer; `out` must be valid for one
 * write.
 */
enum SeerscStatus seersc_sample_set_allocate(const struct SeerscSampleSet *set,
                                             uintptr_t budget_n,
                                             struct SeerscAllocation *out);

/**
 * Exponentiated mean token log-probability of one path.
 *
 * # Safety
 * `logprobs` must be valid for `count` reads; `out_confidence` must be
 * valid for one write.
 */
enum SeerscStatus seersc_confidence(const double *logprobs,
                                    uintptr_t count,
                                    double *out_confidence);

/**
 * Entropy thresholds `(tau1, tau2)` for a probe of `probe_size` samples:
 * the given fractions of `ln(probe_size)`.
 *
 * # Safety
 * `out_tau1` and `out_tau2` must each be valid for one write.
 */
enum SeerscStatus seersc_thresholds(uintptr_t probe_size,
                                    double tau1_fraction,
                                    double tau2_fraction,
                                    double *out_tau1,
                                    double *out_tau2);

/**
 * Map an entropy score to a budget tier and sample count under the
 * default threshold fractions.
 *
 * # Safety
 * `out_tier` and `out_samples` must each be valid for one write.
 */
enum SeerscStatus seersc_allocate(double entropy_nats,
                                  uintptr_t probe_size,
                                  uintptr_t budget_n,
                                  enum SeerscTier *out_tier,
                                  uintptr_t *out_samples);

/**
 * Extract and normalize the final answer from completion text: the last
 * boxed-answer marker, falling back to the last non-empty line.
 * `*out_answer` is null when the text holds no answer; otherwise release
 * it with `seersc_string_free`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out_answer` must be valid for
 * one write.
 */
enum SeerscStatus seersc_extract_answer(const char *text, char **out_answer);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string pointer returned by this library that has
 * not been freed.
 */
void seersc_string_free(char *s);

/**
 * Static description of a status code. Do not free.
 */
const char *seersc_status_message(enum SeerscStatus status);

/**
 * Static library version string. Do not free.
 */
const char *seersc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEERSC_H */
