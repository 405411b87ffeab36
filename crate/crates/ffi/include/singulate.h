#ifndef SINGULATE_H
#define SINGULATE_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Side of the rendered visual grid in pixels.
 */
#define SG_GRID_SIDE 128

typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_ARGUMENT = 1,
  SG_STATUS_INVALID_ARGUMENT = 2,
  SG_STATUS_CONFIG = 3,
  SG_STATUS_MALFORMED = 4,
  SG_STATUS_NO_TARGET = 5,
  SG_STATUS_NO_FREE_PATCH = 6,
  SG_STATUS_EPISODE_DONE = 7,
  SG_STATUS_BUFFER_TOO_SMALL = 8,
  SG_STATUS_PANIC = 9,
  SG_STATUS_INTERNAL = 10,
} SgStatus;

typedef enum SgRewardScheme {
  SG_REWARD_SCHEME_SPARSE = 0,
  SG_REWARD_SCHEME_ES_SHAPED = 1,
  SG_REWARD_SCHEME_LES_SHAPED = 2,
} SgRewardScheme;

typedef enum SgOutcome {
  SG_OUTCOME_RUNNING = 0,
  SG_OUTCOME_SINGULATED = 1,
  SG_OUTCOME_FELL_OFF = 2,
  SG_OUTCOME_TIMEOUT = 3,
} SgOutcome;

/**
 * Opaque episode handle.
 */
typedef struct SgEnv SgEnv;

/**
 * Opaque scene handle.
 */
typedef struct SgScene SgScene;

typedef struct SgPushCommand {
  double theta;
  double d;
} SgPushCommand;

typedef struct SgStepResult {
  double reward;
  bool done;
  enum SgOutcome outcome;
  double e_es;
  double e_les;
  /**
   * False when no free start patch existed and the push was skipped.
   */
  bool pushed;
} SgStepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or null. The
 * pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *sg_last_error_message(void);

/**
 * Generates a random cluttered scene. Pass `n_min = n_max = 0` for the
 * default 8 to 13 obstacles.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum SgStatus sg_scene_generate(uint64_t seed,
                                uint32_t n_min,
                                uint32_t n_max,
                                struct SgScene **out);

/**
 * Parses a scene from its JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SgStatus sg_scene_from_json(const char *json, struct SgScene **out);

/**
 * Serializes a scene. The returned string must be released with
 * [`sg_string_free`].
 *
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_scene_to_json(const struct SgScene *scene, char **out);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void sg_string_free(char *s);

/**
 * # Safety
 * `scene` is null or a live handle; it must not be used afterwards.
 */
void sg_scene_free(struct SgScene *scene);

/**
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_scene_obstacle_count(const struct SgScene *scene, uint32_t *out);

/**
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_scene_is_singulated(const struct SgScene *scene, bool *out);

/**
 * Global empty-space heuristic decision for `scene`.
 *
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_es_decide(const struct SgScene *scene, struct SgPushCommand *out);

/**
 * Local empty-space heuristic decision for `scene`.
 *
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_les_decide(const struct SgScene *scene, struct SgPushCommand *out);

/**
 * Starts an episode from a copy of `scene`.
 *
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_env_new(const struct SgScene *scene,
                         uint32_t t_max,
                         enum SgRewardScheme scheme,
                         struct SgEnv **out);

/**
 * # Safety
 * `env` is null or a live handle; it must not be used afterwards.
 */
void sg_env_free(struct SgEnv *env);

/**
 * Executes one push.
 *
 * # Safety
 * `env` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_env_step(struct SgEnv *env, struct SgPushCommand cmd, struct SgStepResult *out);

/**
 * Copies the current scene of an episode into a new handle.
 *
 * # Safety
 * `env` must be a live handle; `out` must be writable.
 */
enum SgStatus sg_env_scene(const struct SgEnv *env, struct SgScene **out);

/**
 * Copies the current visual state, row-major, into `buf`, which must hold
 * `SG_GRID_SIDE * SG_GRID_SIDE` values (0 table, 0.5 target, 1 obstacle).
 *
 * # Safety
 * `env` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum SgStatus sg_env_render(const struct SgEnv *env, double *buf, size_t len);

/**
 * Pushes taken so far in the episode, or -1 for a null handle.
 *
 * # Safety
 * `env` is null or a live handle.
 */
int64_t sg_env_steps_taken(const struct SgEnv *env);

/**
 * Direction disagreement `(1 - cos|a - b|) / 2`.
 */
double sg_shaping_error(double theta_p, double theta_h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINGULATE_H */
