/* C interface to the tadevoc streaming speech decoder. Generated; do not edit. */

#ifndef TADEVOC_H
#define TADEVOC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>
typedef struct tadevoc_decoder tadevoc_decoder;

/**
 * Status of one call. Anything other than `TADEVOC_OK` leaves the
 * decoder state unchanged.
 */
typedef enum tadevoc_status {
  /**
   * Success.
   */
  TADEVOC_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TADEVOC_NULL_ARG = 1,
  /**
   * File could not be read.
   */
  TADEVOC_IO = 2,
  /**
   * Bytes do not parse as the expected container format.
   */
  TADEVOC_FORMAT = 3,
  /**
   * Well-formed input violating a consistency contract.
   */
  TADEVOC_VALIDATION = 4,
  /**
   * An index field exceeds its coded range.
   */
  TADEVOC_RANGE = 5,
  /**
   * An output buffer has the wrong length.
   */
  TADEVOC_BUFFER_SIZE = 6,
  /**
   * Internal panic caught at the boundary; the decoder should be
   * closed.
   */
  TADEVOC_PANIC = 7,
} tadevoc_status;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens a decoder from a weight container and codebook tables on
 * disk. On success `*out` owns the decoder; release it with
 * `tadevoc_decoder_close`.
 *
 * # Safety
 * `weights_path` and `codebooks_path` are NUL-terminated UTF-8;
 * `out` is a valid pointer.
 */
enum tadevoc_status tadevoc_decoder_open(const char *weights_path,
                                         const char *codebooks_path,
                                         tadevoc_decoder **out);

/**
 * Opens a decoder over deterministic seeded weights and the default
 * codebooks — no files involved. Intended for tests and benchmarks.
 *
 * # Safety
 * `out` is a valid pointer.
 */
enum tadevoc_status tadevoc_decoder_seeded(uint64_t seed, tadevoc_decoder **out);

/**
 * Releases a decoder. Null is a no-op.
 *
 * # Safety
 * `dec` came from an open call and is not used afterwards.
 */
void tadevoc_decoder_close(tadevoc_decoder *dec);

/**
 * Returns the decoder to its exact cold-start state.
 *
 * # Safety
 * `dec` is a live decoder or null (no-op).
 */
void tadevoc_decoder_reset(tadevoc_decoder *dec);

/**
 * PCM samples produced per 10 ms feature frame (160), or 0 on null.
 *
 * # Safety
 * `dec` is a live decoder or null.
 */
size_t tadevoc_frame_samples(const tadevoc_decoder *dec);

/**
 * PCM samples produced per 40 ms packet (640), or 0 on null.
 *
 * # Safety
 * `dec` is a live decoder or null.
 */
size_t tadevoc_packet_samples(const tadevoc_decoder *dec);

/**
 * Decodes one 8-byte coded packet into PCM in [-1, 1]. `pcm_len`
 * must equal `tadevoc_packet_samples(dec)`.
 *
 * # Safety
 * `packet` holds `packet_len` readable bytes; `pcm` holds `pcm_len`
 * writable floats; `dec` is a live decoder.
 */
enum tadevoc_status tadevoc_decode_packet(tadevoc_decoder *dec,
                                          const uint8_t *packet,
                                          size_t packet_len,
                                          float *pcm,
                                          size_t pcm_len);

/**
 * Decodes one already-dequantized feature frame: an 18-value
 * cepstrum (energy in the first value), a pitch-lag index, and a
 * pitch correlation in [0, 1]. `pcm_len` must equal
 * `tadevoc_frame_samples(dec)`.
 *
 * # Safety
 * `cepstrum` holds 18 readable floats; `pcm` holds `pcm_len`
 * writable floats; `dec` is a live decoder.
 */
enum tadevoc_status tadevoc_decode_features(tadevoc_decoder *dec,
                                            const float *cepstrum,
                                            uint8_t pitch_lag_idx,
                                            float pitch_corr,
                                            float *pcm,
                                            size_t pcm_len);

/**
 * Closed-form multiply-accumulate rate of the decoder's network, per
 * second of audio. 0 on null.
 *
 * # Safety
 * `dec` is a live decoder or null.
 */
uint64_t tadevoc_macs_per_second(const tadevoc_decoder *dec);

/**
 * Stored parameter count of the decoder's network. 0 on null.
 *
 * # Safety
 * `dec` is a live decoder or null.
 */
uint64_t tadevoc_parameter_count(const tadevoc_decoder *dec);

/**
 * End-to-end delay budget in milliseconds: upstream encoder plus
 * measured filter-bank group delay (the network itself adds none).
 * 0 on null.
 *
 * # Safety
 * `dec` is a live decoder or null.
 */
double tadevoc_total_delay_ms(const tadevoc_decoder *dec);

/**
 * Static description of a status code; never null.
 */
const char *tadevoc_status_message(enum tadevoc_status status);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TADEVOC_H */
