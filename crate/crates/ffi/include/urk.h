#ifndef URK_H
#define URK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum UrkStatus {
  URK_STATUS_OK = 0,
  // An argument violated a documented precondition.
  URK_STATUS_PARAM = 1,
  // Input bytes could not be parsed.
  URK_STATUS_FORMAT = 2,
  // Decoding would exceed the search work limit.
  URK_STATUS_REFUSED = 3,
  // A required pointer was NULL.
  URK_STATUS_NULL = 4,
  // An output buffer was too small; the required size was written.
  URK_STATUS_BUFFER = 5,
  // An internal panic was caught at the boundary.
  URK_STATUS_INTERNAL = 6,
} UrkStatus;

// Alice's message.
typedef struct UrkMessage UrkMessage;

// Sketch-based universal-relation protocol.
typedef struct UrkProtocol UrkProtocol;

// Strict-turnstile sketch.
typedef struct UrkSketch UrkSketch;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `cap` bytes, and returns the full message length.
//
// # Safety
// `buf` must be NULL or valid for `cap` bytes.
size_t urk_last_error(uint8_t *buf, size_t cap);

// Builds the protocol with the given shared seed.
//
// # Safety
// `out` must be valid for one write.
enum UrkStatus urk_protocol_new(size_t n,
                                size_t k,
                                uint32_t q,
                                size_t oversample,
                                size_t slack,
                                uint64_t seed,
                                struct UrkProtocol **out);

// # Safety
// `p` must be NULL or a handle from [`urk_protocol_new`] not yet freed.
void urk_protocol_free(struct UrkProtocol *p);

// Alice's message for the 0/1 vector `x` of length `n`.
//
// # Safety
// `p` must be a live handle, `x` valid for `n` bytes, `out` for one write.
enum UrkStatus urk_alice(const struct UrkProtocol *p,
                         const uint8_t *x,
                         size_t n,
                         struct UrkMessage **out);

// Bob's answer for the 0/1 vector `y`. On success `*failed` tells whether
// Bob gave up; otherwise up to `cap` indices are written and their
// number stored in `*count`.
//
// # Safety
// Handles must be live, `y` valid for `n` bytes, `indices` for `cap`
// entries, `count` and `failed` for one write.
enum UrkStatus urk_bob(const struct UrkProtocol *p,
                       const struct UrkMessage *m,
                       const uint8_t *y,
                       size_t n,
                       size_t *indices,
                       size_t cap,
                       size_t *count,
                       bool *failed);

// Serializes a message. With `cap` too small, only `*len` is written and
// [`UrkStatus::Buffer`] returned.
//
// # Safety
// `m` must be live, `buf` valid for `cap` bytes, `len` for one write.
enum UrkStatus urk_message_serialize(const struct UrkMessage *m,
                                     uint8_t *buf,
                                     size_t cap,
                                     size_t *len);

// # Safety
// `bytes` must be valid for `len` bytes and `out` for one write.
enum UrkStatus urk_message_deserialize(const uint8_t *bytes, size_t len, struct UrkMessage **out);

// Payload size in bits, excluding the header.
//
// # Safety
// `m` must be live and `bits` valid for one write.
enum UrkStatus urk_message_payload_bits(const struct UrkMessage *m, uint64_t *bits);

// # Safety
// `m` must be NULL or a live message handle.
void urk_message_free(struct UrkMessage *m);

// An empty sketch sharing the protocol's randomness.
//
// # Safety
// `p` must be live and `out` valid for one write.
enum UrkStatus urk_sketch_new(const struct UrkProtocol *p, struct UrkSketch **out);

// `z_i += delta`.
//
// # Safety
// `s` must be live and not used concurrently.
enum UrkStatus urk_sketch_update(struct UrkSketch *s, size_t i, int64_t delta);

// A new sketch of the combined streams of `a` and `b`.
//
// # Safety
// `a` and `b` must be live and `out` valid for one write.
enum UrkStatus urk_sketch_merge(const struct UrkSketch *a,
                                const struct UrkSketch *b,
                                struct UrkSketch **out);

// Up to `k` support indices; output convention as in [`urk_bob`].
//
// # Safety
// As for [`urk_bob`].
enum UrkStatus urk_sketch_support_find(const struct UrkSketch *s,
                                       size_t *indices,
                                       size_t cap,
                                       size_t *count,
                                       bool *failed);

// Up to `k` support indices drawn without replacement using `sample_seed`.
//
// # Safety
// As for [`urk_bob`].
enum UrkStatus urk_sketch_sample(const struct UrkSketch *s,
                                 uint64_t sample_seed,
                                 size_t *indices,
                                 size_t cap,
                                 size_t *count,
                                 bool *failed);

// The sketch state in the message wire format.
//
// # Safety
// As for [`urk_message_serialize`].
enum UrkStatus urk_sketch_serialize(const struct UrkSketch *s,
                                    uint8_t *buf,
                                    size_t cap,
                                    size_t *len);

// # Safety
// `s` must be NULL or a live sketch handle.
void urk_sketch_free(struct UrkSketch *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* URK_H */
