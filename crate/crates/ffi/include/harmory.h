/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef HARMORY_H
#define HARMORY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HarmoryMeasure {
  HARMORY_MEASURE_DTW = 0,
  HARMORY_MEASURE_TPSD = 1,
  HARMORY_MEASURE_LHARP = 2,
} HarmoryMeasure;

typedef enum HarmoryStatus {
  HARMORY_STATUS_OK = 0,
  HARMORY_STATUS_NULL_ARGUMENT = 1,
  HARMORY_STATUS_INVALID_UTF8 = 2,
  HARMORY_STATUS_PARSE_ERROR = 3,
  HARMORY_STATUS_NO_CHORD = 4,
  HARMORY_STATUS_INVALID_INPUT = 5,
  HARMORY_STATUS_IO = 6,
  HARMORY_STATUS_INTERNAL = 7,
} HarmoryStatus;

/*
 A parsed chord.
 */
typedef struct HarmoryChord HarmoryChord;

/*
 A harmonic memory graph.
 */
typedef struct HarmoryMemory HarmoryMemory;

/*
 A piece: timed chord events with keys.
 */
typedef struct HarmoryTimeline HarmoryTimeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null if none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *harmory_last_error_message(void);

/*
 Character offset of the last chord syntax error on this thread, or -1.
 */
int64_t harmory_last_error_position(void);

/*
 Library version as a static string.
 */
const char *harmory_version(void);

/*
 Frees a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void harmory_string_free(char *s);

/*
 Parses a Harte chord string.

 # Safety
 `text` must be a nul-terminated string; `out` must be writable.
 */
enum HarmoryStatus harmory_chord_parse(const char *text, struct HarmoryChord **out);

/*
 # Safety
 `chord` must come from [`harmory_chord_parse`] and not have been freed.
 */
void harmory_chord_free(struct HarmoryChord *chord);

/*
 Canonical Harte rendering; free the result with [`harmory_string_free`].

 # Safety
 `chord` must be a live handle; `out` must be writable.
 */
enum HarmoryStatus harmory_chord_render(const struct HarmoryChord *chord, char **out);

/*
 Sounding pitch classes as a 12-bit mask (bit `i` is pitch class `i`,
 C = 0). Fails with `NoChord` for `N`.

 # Safety
 `chord` must be a live handle; `out_mask` must be writable.
 */
enum HarmoryStatus harmory_chord_pitch_classes(const struct HarmoryChord *chord,
                                               uint16_t *out_mask);

/*
 Symmetric TPS distance between two chords in `key` (e.g. "C:maj").

 # Safety
 Handles must be live, `key` nul-terminated, `out` writable.
 */
enum HarmoryStatus harmory_tps_distance(const struct HarmoryChord *a,
                                        const struct HarmoryChord *b,
                                        const char *key,
                                        double *out);

/*
 Reads a plain-text chord chart.

 # Safety
 `text` must be nul-terminated; `out` writable.
 */
enum HarmoryStatus harmory_timeline_from_chart(const char *text, struct HarmoryTimeline **out);

/*
 Reads a JAMS document from `len` bytes.

 # Safety
 `data` must point to `len` readable bytes; `out` writable.
 */
enum HarmoryStatus harmory_timeline_from_jams(const uint8_t *data,
                                              size_t len,
                                              struct HarmoryTimeline **out);

/*
 Loads a `.chart` or JAMS file; pieces without an id take the file stem.

 # Safety
 `path` must be nul-terminated; `out` writable.
 */
enum HarmoryStatus harmory_timeline_load(const char *path, struct HarmoryTimeline **out);

/*
 # Safety
 `timeline` must be a live handle or null.
 */
void harmory_timeline_free(struct HarmoryTimeline *timeline);

/*
 Number of chord events, `N` included. Returns 0 for null.

 # Safety
 `timeline` must be a live handle or null.
 */
size_t harmory_timeline_event_count(const struct HarmoryTimeline *timeline);

/*
 Similarity score in [0, 1] with default parameters.

 # Safety
 Handles must be live; `out` writable.
 */
enum HarmoryStatus harmory_similarity(const struct HarmoryTimeline *a,
                                      const struct HarmoryTimeline *b,
                                      enum HarmoryMeasure measure,
                                      double *out);

/*
 Full similarity report as JSON; free with [`harmory_string_free`].

 # Safety
 Handles must be live; `out` writable.
 */
enum HarmoryStatus harmory_similarity_report(const struct HarmoryTimeline *a,
                                             const struct HarmoryTimeline *b,
                                             enum HarmoryMeasure measure,
                                             char **out);

/*
 Segment boundaries (sounded-event indices) with default parameters. The
 array is freed with [`harmory_boundaries_free`]; an empty result is a
 null pointer with length 0.

 # Safety
 `timeline` must be live; `out` and `out_len` writable.
 */
enum HarmoryStatus harmory_segment_boundaries(const struct HarmoryTimeline *timeline,
                                              size_t **out,
                                              size_t *out_len);

/*
 # Safety
 `ptr`/`len` must come from [`harmory_segment_boundaries`].
 */
void harmory_boundaries_free(size_t *ptr, size_t len);

/*
 Builds a memory graph from `count` timelines with default segmentation
 and the given thresholds. The timelines are not consumed.

 # Safety
 `timelines` must point to `count` live handles; `out` writable.
 */
enum HarmoryStatus harmory_memory_build(const struct HarmoryTimeline *const *timelines,
                                        size_t count,
                                        double theta_sim,
                                        double theta_merge,
                                        struct HarmoryMemory **out);

/*
 Sorted N-Triples; free with [`harmory_string_free`].

 # Safety
 `memory` must be live; `out` writable.
 */
enum HarmoryStatus harmory_memory_export_ntriples(const struct HarmoryMemory *memory, char **out);

/*
 Number of patterns in the graph; 0 for null.

 # Safety
 `memory` must be live or null.
 */
size_t harmory_memory_pattern_count(const struct HarmoryMemory *memory);

/*
 # Safety
 `memory` must be a live handle or null.
 */
void harmory_memory_free(struct HarmoryMemory *memory);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARMORY_H */
