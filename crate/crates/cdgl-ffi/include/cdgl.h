#ifndef CDGL_H
#define CDGL_H

/* Generated by cbindgen from crates/cdgl-ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum CdglStatus {
  CDGL_STATUS_OK = 0,
  /*
   A required pointer was null.
   */
  CDGL_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not UTF-8.
   */
  CDGL_STATUS_INVALID_UTF8 = 2,
  /*
   The source text or a formula did not parse.
   */
  CDGL_STATUS_SYNTAX = 3,
  /*
   The proof file did not parse.
   */
  CDGL_STATUS_PROOF_FORMAT = 4,
  /*
   The configuration was rejected.
   */
  CDGL_STATUS_CONFIG = 5,
  /*
   No such theorem, or nothing loaded yet.
   */
  CDGL_STATUS_NOT_FOUND = 6,
  /*
   The proof does not check; the JSON result says where.
   */
  CDGL_STATUS_CHECK_FAILED = 7,
  /*
   Extraction or play failed, or a script or state was malformed.
   */
  CDGL_STATUS_PLAY_FAILED = 8,
  /*
   An internal error; the session should be freed.
   */
  CDGL_STATUS_PANIC = 9,
} CdglStatus;

/*
 Opaque session handle.
 */
typedef struct CdglSession CdglSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *cdgl_version(void);

/*
 A new empty session with the default configuration.
 */
struct CdglSession *cdgl_session_new(void);

/*
 Frees a session. Null is ignored.

 # Safety
 `s` must come from [`cdgl_session_new`] and not be used afterwards.
 */
void cdgl_session_free(struct CdglSession *s);

/*
 Message of the last failed call on `s`, or null. Owned by the session.

 # Safety
 `s` must be a live session or null.
 */
const char *cdgl_last_error(const struct CdglSession *s);

/*
 Frees a string returned through an `out` parameter. Null is ignored.

 # Safety
 `p` must come from this library and not be freed twice.
 */
void cdgl_string_free(char *p);

/*
 Replaces the run configuration with TOML text (same keys as the CLI's
 `--config` file). Clears cached check results.

 # Safety
 `s` must be a live session; `toml` a NUL-terminated string.
 */
enum CdglStatus cdgl_configure(struct CdglSession *s, const char *toml);

/*
 Loads `.cdgl` source text, dropping any proofs loaded before.

 # Safety
 `s` must be a live session; `src` a NUL-terminated string.
 */
enum CdglStatus cdgl_load_source(struct CdglSession *s, const char *src);

/*
 Loads `.cdglp` proof text against the loaded source.

 # Safety
 `s` must be a live session; `proofs` a NUL-terminated string.
 */
enum CdglStatus cdgl_load_proofs(struct CdglSession *s, const char *proofs);

/*
 Checks a theorem and writes the result as JSON to `*out` (if `out` is
 not null), also when the proof fails.

 # Safety
 `s` must be a live session; `theorem` a NUL-terminated string; `out`
 null or writable.
 */
enum CdglStatus cdgl_check(struct CdglSession *s, const char *theorem, char **out);

/*
 Plays a checked theorem: the extracted strategy against `opponent`, a
 JSON script (null for a player who never decides). `state` is a JSON
 object of initial values such as `{"x": "1/2"}`, or null. The trace is
 written as JSON to `*out`.

 # Safety
 `s` must be a live session; string arguments NUL-terminated or null
 where allowed; `out` null or writable.
 */
enum CdglStatus cdgl_play(struct CdglSession *s,
                          const char *theorem,
                          const char *opponent,
                          const char *state,
                          char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CDGL_H */
